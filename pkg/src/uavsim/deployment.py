"""Hexagonal macro layout and UE drops.

Sites sit on a triangular lattice (tiers 0..N around a centre site); every
site carries ``sectors_per_site`` sectors. UEs are dropped uniformly inside
the sector's rhombic share of the site hexagon.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
import math

import numpy as np

SCENARIOS = ("UMa-AV", "RMa-AV", "UMi-AV")
CASES = ("case1", "case5", "custom")

TERRESTRIAL = 0
AERIAL = 1
DEVICE_CLASSES = ("terrestrial", "aerial")

# per-scenario geometry defaults; every value can be overridden in ScenarioConfig
SCENARIO_DEFAULTS = {
    "UMa-AV": dict(inter_site_distance=500.0, antenna_height=25.0,
                   carrier_frequency=2.0e9, min_distance=35.0),
    "RMa-AV": dict(inter_site_distance=1732.0, antenna_height=35.0,
                   carrier_frequency=700.0e6, min_distance=35.0),
    "UMi-AV": dict(inter_site_distance=200.0, antenna_height=10.0,
                   carrier_frequency=2.0e9, min_distance=10.0),
}

_CASE_COUNTS = {"case1": (10, 0), "case5": (10, 5)}


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to build a layout and drop UEs.

    ``None`` geometry fields are filled from :data:`SCENARIO_DEFAULTS`, and
    ``None`` UE counts from the deployment case (case1: 10+0, case5: 10+5).
    ``case="custom"`` lifts the count restriction.
    """

    scenario: str = "UMa-AV"
    case: str = "case5"
    terrestrial_per_cell: int | None = None
    aerial_per_cell: int | None = None
    target_ru: float = 0.5
    aerial_altitude_range: tuple[float, float] = (1.5, 300.0)
    seed: int = 0
    num_tiers: int = 2
    sectors_per_site: int = 3
    inter_site_distance: float | None = None
    antenna_height: float | None = None
    mechanical_downtilt: float = 0.0
    tx_power_per_carrier: float = 46.0
    carrier_frequency: float | None = None
    system_bandwidth: float = 10.0e6
    num_prbs: int = 50
    wraparound: bool = True
    ue_height: float = 1.5
    min_distance: float | None = None
    p_cmax: float = 23.0

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}; expected one of {SCENARIOS}")
        if self.case not in CASES:
            raise ValueError(f"unknown case {self.case!r}; expected one of {CASES}")
        for name, value in SCENARIO_DEFAULTS[self.scenario].items():
            if getattr(self, name) is None:
                object.__setattr__(self, name, value)
        if self.case in _CASE_COUNTS:
            n_terr, n_aer = _CASE_COUNTS[self.case]
            if self.terrestrial_per_cell is None:
                object.__setattr__(self, "terrestrial_per_cell", n_terr)
            if self.aerial_per_cell is None:
                object.__setattr__(self, "aerial_per_cell", n_aer)
            if (self.terrestrial_per_cell, self.aerial_per_cell) != (n_terr, n_aer):
                raise ValueError(
                    f"{self.case} requires {n_terr} terrestrial and {n_aer} aerial UEs per cell")
        else:
            if self.terrestrial_per_cell is None:
                object.__setattr__(self, "terrestrial_per_cell", 10)
            if self.aerial_per_cell is None:
                object.__setattr__(self, "aerial_per_cell", 0)
        object.__setattr__(self, "aerial_altitude_range",
                           tuple(float(h) for h in self.aerial_altitude_range))
        self.validate()

    def validate(self):
        if not self.inter_site_distance > 0:
            raise ValueError("inter_site_distance must be positive")
        if not 0.0 < self.target_ru <= 1.0:
            raise ValueError("target_ru must lie in (0, 1]")
        if self.terrestrial_per_cell < 0 or self.aerial_per_cell < 0:
            raise ValueError("UE counts must be non-negative")
        if self.num_tiers < 0 or self.sectors_per_site < 1:
            raise ValueError("num_tiers >= 0 and sectors_per_site >= 1 required")
        lo, hi = self.aerial_altitude_range
        if len(self.aerial_altitude_range) != 2 or not 0 < lo <= hi:
            raise ValueError("aerial_altitude_range must be (min, max) with 0 < min <= max")
        if self.num_prbs < 1 or self.system_bandwidth <= 0:
            raise ValueError("num_prbs and system_bandwidth must be positive")
        if self.ue_height <= 0 or self.antenna_height <= 0:
            raise ValueError("heights must be positive")
        if self.min_distance < 0 or self.min_distance >= self.inter_site_distance / 2:
            raise ValueError("min_distance must lie in [0, inter_site_distance/2)")

    @property
    def ues_per_cell(self) -> int:
        return self.terrestrial_per_cell + self.aerial_per_cell

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            out[f.name] = list(value) if isinstance(value, tuple) else value
        return out


@dataclass(frozen=True, eq=False)
class NetworkLayout:
    site_xy: np.ndarray            # (S, 2) metres
    cell_site: np.ndarray          # (C,) site index of every cell
    cell_azimuth: np.ndarray       # (C,) boresight azimuth, degrees from +x
    inter_site_distance: float
    sectors_per_site: int
    antenna_height: float
    mechanical_downtilt: float
    tx_power_per_carrier: float
    carrier_frequency: float
    system_bandwidth: float
    num_prbs: int
    wraparound: bool
    wrap_offsets: np.ndarray = field(repr=False)  # (W, 2) translations incl. (0, 0)

    @property
    def sites(self) -> np.ndarray:
        return self.site_xy

    @property
    def num_sites(self) -> int:
        return len(self.site_xy)

    @property
    def num_cells(self) -> int:
        return len(self.cell_site)

    @property
    def cell_xy(self) -> np.ndarray:
        return self.site_xy[self.cell_site]

    @property
    def tx_power(self) -> np.ndarray:
        """Per-cell carrier power in dBm."""
        return np.full(self.num_cells, self.tx_power_per_carrier)

    def __eq__(self, other):
        if not isinstance(other, NetworkLayout):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, f.name), getattr(other, f.name))
            for f in fields(self))


def _hex_axial(num_tiers: int) -> list[tuple[int, int]]:
    cells = []
    for q in range(-num_tiers, num_tiers + 1):
        for r in range(-num_tiers, num_tiers + 1):
            if max(abs(q), abs(r), abs(q + r)) <= num_tiers:
                cells.append((q, r))
    return cells


def _lattice_basis(isd: float) -> tuple[np.ndarray, np.ndarray]:
    return np.array([isd, 0.0]), np.array([isd / 2.0, isd * math.sqrt(3.0) / 2.0])


def build_network(config: ScenarioConfig) -> NetworkLayout:
    """Sites on a hexagonal grid with ``num_tiers`` rings (2 -> 19 sites, 57 cells)."""
    config.validate()
    isd = float(config.inter_site_distance)
    a1, a2 = _lattice_basis(isd)

    sites = []
    for q, r in _hex_axial(config.num_tiers):
        xy = q * a1 + r * a2
        ring = max(abs(q), abs(r), abs(q + r))
        angle = round(math.degrees(math.atan2(xy[1], xy[0])) % 360.0, 6)
        sites.append((ring, angle, xy))
    sites.sort(key=lambda s: (s[0], s[1]))
    site_xy = np.array([s[2] for s in sites])
    site_xy[np.abs(site_xy) < 1e-9] = 0.0

    n_sec = config.sectors_per_site
    sector_az = (30.0 + 360.0 / n_sec * np.arange(n_sec)) % 360.0
    cell_site = np.repeat(np.arange(len(site_xy)), n_sec)
    cell_azimuth = np.tile(sector_az, len(site_xy))

    if config.wraparound and config.num_tiers > 0:
        n = config.num_tiers
        v0 = (n + 1) * a1 + n * a2
        offsets = [np.zeros(2)]
        for k in range(6):
            t = math.radians(60.0 * k)
            rot = np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])
            offsets.append(rot @ v0)
        wrap_offsets = np.array(offsets)
    else:
        wrap_offsets = np.zeros((1, 2))

    return NetworkLayout(
        site_xy=site_xy,
        cell_site=cell_site,
        cell_azimuth=cell_azimuth,
        inter_site_distance=isd,
        sectors_per_site=n_sec,
        antenna_height=float(config.antenna_height),
        mechanical_downtilt=float(config.mechanical_downtilt),
        tx_power_per_carrier=float(config.tx_power_per_carrier),
        carrier_frequency=float(config.carrier_frequency),
        system_bandwidth=float(config.system_bandwidth),
        num_prbs=int(config.num_prbs),
        wraparound=bool(config.wraparound and config.num_tiers > 0),
        wrap_offsets=wrap_offsets,
    )


@dataclass(frozen=True)
class Ue:
    id: int
    position: tuple[float, float, float]
    device_class: str
    p_cmax: float


@dataclass(frozen=True, eq=False)
class UePopulation:
    position: np.ndarray     # (U, 3) x, y, altitude
    is_aerial: np.ndarray    # (U,) bool
    p_cmax: np.ndarray       # (U,) dBm
    drop_cell: np.ndarray    # (U,) cell whose area the UE was dropped in

    def __len__(self):
        return len(self.position)

    @property
    def ids(self) -> np.ndarray:
        return np.arange(len(self))

    @property
    def altitude(self) -> np.ndarray:
        return self.position[:, 2]

    @property
    def device_class(self) -> np.ndarray:
        return np.where(self.is_aerial, AERIAL, TERRESTRIAL)

    def __getitem__(self, i: int) -> Ue:
        x, y, h = (float(v) for v in self.position[i])
        return Ue(id=int(i), position=(x, y, h),
                  device_class=DEVICE_CLASSES[int(self.is_aerial[i])],
                  p_cmax=float(self.p_cmax[i]))

    def __eq__(self, other):
        if not isinstance(other, UePopulation):
            return NotImplemented
        return all(np.array_equal(getattr(self, f.name), getattr(other, f.name))
                   for f in fields(self))

    @classmethod
    def from_arrays(cls, position, is_aerial=None, p_cmax=23.0, drop_cell=None):
        """Hand-built population, mostly for small test networks."""
        position = np.atleast_2d(np.asarray(position, dtype=float))
        n = len(position)
        is_aerial = np.zeros(n, bool) if is_aerial is None else np.asarray(is_aerial, bool)
        p_cmax = np.broadcast_to(np.asarray(p_cmax, float), (n,)).copy()
        drop_cell = np.full(n, -1) if drop_cell is None else np.asarray(drop_cell, int)
        return cls(position, is_aerial, p_cmax, drop_cell)


def _sample_sector(rng, site_xy, azimuth_deg, circumradius, min_distance, n):
    """Uniform points in the rhombus spanned by the hexagon vertices at azimuth +/- 60 deg."""
    if n == 0:
        return np.empty((0, 2))
    e1 = circumradius * np.array([math.cos(math.radians(azimuth_deg - 60.0)),
                                  math.sin(math.radians(azimuth_deg - 60.0))])
    e2 = circumradius * np.array([math.cos(math.radians(azimuth_deg + 60.0)),
                                  math.sin(math.radians(azimuth_deg + 60.0))])
    out = np.empty((0, 2))
    while len(out) < n:
        uv = rng.random((2 * (n - len(out)) + 4, 2))
        pts = uv[:, :1] * e1 + uv[:, 1:] * e2
        pts = pts[np.hypot(pts[:, 0], pts[:, 1]) >= min_distance]
        out = np.vstack([out, pts])
    return site_xy + out[:n]


def drop_ues(layout: NetworkLayout, config: ScenarioConfig, seed: int) -> UePopulation:
    """Drop ``terrestrial_per_cell + aerial_per_cell`` UEs in every cell's area.

    UEs are ordered cell by cell, terrestrial before aerial.
    """
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 1]))
    n_terr, n_aer = config.terrestrial_per_cell, config.aerial_per_cell
    n_per = n_terr + n_aer
    circumradius = layout.inter_site_distance / math.sqrt(3.0)
    if layout.sectors_per_site != 3:
        # rhombic sector regions only tile the hexagon for three sectors
        raise ValueError("UE dropping supports 3 sectors per site")
    lo, hi = config.aerial_altitude_range

    xy, alt, aerial, cells = [], [], [], []
    for c in range(layout.num_cells):
        site = layout.site_xy[layout.cell_site[c]]
        pts = _sample_sector(rng, site, layout.cell_azimuth[c], circumradius,
                             config.min_distance, n_per)
        h_aer = rng.uniform(lo, hi, n_aer)
        xy.append(pts)
        alt.append(np.concatenate([np.full(n_terr, config.ue_height), h_aer]))
        aerial.append(np.r_[np.zeros(n_terr, bool), np.ones(n_aer, bool)])
        cells.append(np.full(n_per, c))

    if layout.num_cells == 0 or n_per == 0:
        position = np.empty((0, 3))
        return UePopulation(position, np.empty(0, bool), np.empty(0), np.empty(0, int))
    position = np.column_stack([np.vstack(xy), np.concatenate(alt)])
    is_aerial = np.concatenate(aerial)
    return UePopulation(
        position=position,
        is_aerial=is_aerial,
        p_cmax=np.full(len(position), float(config.p_cmax)),
        drop_cell=np.concatenate(cells),
    )
