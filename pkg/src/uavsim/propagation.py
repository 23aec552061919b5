"""Link-level large-scale channel: LOS state, pathloss, shadowing, BS antenna gain.

The pathloss model is log-distance, ``PL = A + 10 n log10(d3d) + 20 log10(f)``
with ``d3d`` in metres and ``f`` in Hz, separately for LOS and NLOS. The
exponent ``n`` and intercept ``A`` are interpolated linearly in UE altitude
between a ground-level set and an aerial set. Coefficient defaults are
rough fits of the usual 3GPP macro/micro curves; load exact ones through the
propagation section of the config file.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
import math

import numpy as np

from .deployment import NetworkLayout, UePopulation

SPEED_OF_LIGHT = 299_792_458.0
# 20 log10(4 pi / c): free-space intercept with d in m and f in Hz
FREE_SPACE_INTERCEPT = 20.0 * math.log10(4.0 * math.pi / SPEED_OF_LIGHT)


@dataclass(frozen=True)
class PathlossCoefficients:
    los_exponent: float
    los_intercept: float
    nlos_exponent: float
    nlos_intercept: float


@dataclass(frozen=True)
class ShadowingStd:
    terrestrial_los: float = 4.0
    terrestrial_nlos: float = 6.0
    aerial_los: float = 2.5
    aerial_nlos: float = 6.0

    def lookup(self, is_aerial, los):
        is_aerial = np.asarray(is_aerial, bool)
        los = np.asarray(los, bool)
        return np.where(
            is_aerial,
            np.where(los, self.aerial_los, self.aerial_nlos),
            np.where(los, self.terrestrial_los, self.terrestrial_nlos))

    def scaled(self, factor: float) -> "ShadowingStd":
        return ShadowingStd(*(factor * getattr(self, f.name) for f in fields(self)))


@dataclass(frozen=True)
class AntennaPattern:
    """Sector element: parabolic-in-dB lobes, vertical side-lobe cap, front-to-back floor."""

    max_gain: float = 8.0
    horizontal_3db_beamwidth: float = 65.0
    vertical_3db_beamwidth: float = 10.0
    front_to_back_ratio: float = 30.0
    side_lobe_floor: float = 25.0
    electrical_downtilt: float = 6.0

    def __post_init__(self):
        if self.horizontal_3db_beamwidth <= 0 or self.vertical_3db_beamwidth <= 0:
            raise ValueError("beamwidths must be positive")
        if self.front_to_back_ratio < 0 or self.side_lobe_floor < 0:
            raise ValueError("attenuation caps must be non-negative")


@dataclass(frozen=True)
class PropagationParams:
    ground: PathlossCoefficients
    air: PathlossCoefficients
    los_breakpoint: float              # d1: LOS certain below this 2D distance
    los_decay: float                   # p1: exponential decay length of ground LOS probability
    los_height_threshold: float = 100.0
    ground_height: float = 1.5
    air_reference_height: float = 100.0
    shadowing: ShadowingStd = field(default_factory=ShadowingStd)
    antenna: AntennaPattern = field(default_factory=AntennaPattern)
    frequency_coefficient: float = 20.0

    def __post_init__(self):
        if self.air_reference_height <= self.ground_height:
            raise ValueError("air_reference_height must exceed ground_height")
        if self.los_height_threshold <= self.ground_height:
            raise ValueError("los_height_threshold must exceed ground_height")
        for c in (self.ground, self.air):
            if c.los_exponent <= 0 or c.nlos_exponent <= 0:
                raise ValueError("pathloss exponents must be positive")


SCENARIO_PROPAGATION = {
    "UMa-AV": PropagationParams(
        ground=PathlossCoefficients(2.2, -152.0, 3.908, -166.46),
        air=PathlossCoefficients(2.2, -152.0, 3.2, -165.06),
        los_breakpoint=18.0, los_decay=63.0,
        los_height_threshold=100.0, air_reference_height=100.0,
        shadowing=ShadowingStd(4.0, 6.0, 2.5, 6.0),
        antenna=AntennaPattern(electrical_downtilt=6.0),
    ),
    "RMa-AV": PropagationParams(
        ground=PathlossCoefficients(2.05, -148.26, 3.863, -176.36),
        air=PathlossCoefficients(2.03, -147.56, 3.44, -159.56),
        los_breakpoint=10.0, los_decay=1000.0,
        los_height_threshold=40.0, air_reference_height=40.0,
        shadowing=ShadowingStd(4.0, 8.0, 2.5, 6.0),
        antenna=AntennaPattern(electrical_downtilt=10.0),
    ),
    "UMi-AV": PropagationParams(
        ground=PathlossCoefficients(2.1, -147.6, 3.53, -157.6),
        air=PathlossCoefficients(2.125, -149.1, 2.8, -147.6),
        los_breakpoint=18.0, los_decay=36.0,
        los_height_threshold=100.0, air_reference_height=100.0,
        shadowing=ShadowingStd(4.0, 8.0, 3.0, 8.0),
        antenna=AntennaPattern(electrical_downtilt=6.0),
    ),
}


def scenario_params(scenario) -> PropagationParams:
    if isinstance(scenario, PropagationParams):
        return scenario
    try:
        return SCENARIO_PROPAGATION[scenario]
    except KeyError:
        raise ValueError(f"unknown scenario {scenario!r}") from None


def _height_weight(altitude, low, high):
    return np.clip((np.asarray(altitude, float) - low) / (high - low), 0.0, 1.0)


def los_probability(link_distance_2d, ue_altitude, scenario="UMa-AV"):
    """LOS probability, ground-level curve lifted linearly to 1 at the height threshold."""
    p = scenario_params(scenario)
    d = np.asarray(link_distance_2d, float)
    h = np.asarray(ue_altitude, float)
    if np.any(d < 0) or np.any(h < 0):
        raise ValueError("distance and altitude must be non-negative")
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        ratio = p.los_breakpoint / d
        p_ground = np.where(d <= p.los_breakpoint, 1.0,
                            ratio + np.exp(-d / p.los_decay) * (1.0 - ratio))
    w = _height_weight(h, p.ground_height, p.los_height_threshold)
    out = p_ground + (1.0 - p_ground) * w
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def log_distance_pathloss(distance, exponent, intercept, frequency, frequency_coefficient=20.0):
    d = np.asarray(distance, float)
    if np.any(d <= 0):
        raise ValueError("pathloss needs a strictly positive distance")
    pl = (intercept + 10.0 * exponent * np.log10(d)
          + frequency_coefficient * math.log10(frequency))
    return float(pl) if pl.ndim == 0 else pl


def pathloss(distance_3d, ue_altitude, los, scenario="UMa-AV", frequency=2.0e9):
    """Height-interpolated LOS/NLOS pathloss in dB; NLOS never below LOS."""
    p = scenario_params(scenario)
    w = _height_weight(ue_altitude, p.ground_height, p.air_reference_height)
    g, a = p.ground, p.air
    pl_los = log_distance_pathloss(
        distance_3d, g.los_exponent + w * (a.los_exponent - g.los_exponent),
        g.los_intercept + w * (a.los_intercept - g.los_intercept),
        frequency, p.frequency_coefficient)
    pl_nlos = log_distance_pathloss(
        distance_3d, g.nlos_exponent + w * (a.nlos_exponent - g.nlos_exponent),
        g.nlos_intercept + w * (a.nlos_intercept - g.nlos_intercept),
        frequency, p.frequency_coefficient)
    out = np.where(np.asarray(los, bool), pl_los, np.maximum(pl_los, pl_nlos))
    return float(out) if out.ndim == 0 else out


def antenna_gain(pattern: AntennaPattern, azimuth_offset, elevation_offset):
    """Element gain in dBi for angular offsets from boresight (degrees).

    ``elevation_offset`` is measured from the tilted boresight; positive is
    further below it.
    """
    phi = (np.asarray(azimuth_offset, float) + 180.0) % 360.0 - 180.0
    theta = np.asarray(elevation_offset, float)
    a_h = np.minimum(12.0 * (phi / pattern.horizontal_3db_beamwidth) ** 2,
                     pattern.front_to_back_ratio)
    a_v = np.minimum(12.0 * (theta / pattern.vertical_3db_beamwidth) ** 2,
                     pattern.side_lobe_floor)
    g = pattern.max_gain - np.minimum(a_h + a_v, pattern.front_to_back_ratio)
    return float(g) if g.ndim == 0 else g


@dataclass(frozen=True)
class LinkState:
    pathloss: float
    shadowing: float
    antenna_gain: float
    los: bool
    coupling_gain: float


@dataclass(frozen=True, eq=False)
class CouplingMatrix:
    """Per (UE, cell) link quantities, all arrays of shape (U, C)."""

    pathloss: np.ndarray
    shadowing: np.ndarray
    antenna_gain: np.ndarray
    los: np.ndarray
    distance_2d: np.ndarray
    distance_3d: np.ndarray

    @property
    def coupling_gain(self) -> np.ndarray:
        return self.antenna_gain - self.pathloss - self.shadowing

    @property
    def shape(self):
        return self.pathloss.shape

    @property
    def num_ues(self) -> int:
        return self.pathloss.shape[0]

    @property
    def num_cells(self) -> int:
        return self.pathloss.shape[1]

    def link(self, ue: int, cell: int) -> LinkState:
        return LinkState(
            pathloss=float(self.pathloss[ue, cell]),
            shadowing=float(self.shadowing[ue, cell]),
            antenna_gain=float(self.antenna_gain[ue, cell]),
            los=bool(self.los[ue, cell]),
            coupling_gain=float(self.coupling_gain[ue, cell]),
        )

    def __eq__(self, other):
        if not isinstance(other, CouplingMatrix):
            return NotImplemented
        return all(np.array_equal(getattr(self, f.name), getattr(other, f.name))
                   for f in fields(self))

    @classmethod
    def from_coupling_gain(cls, coupling_gain):
        """Matrix with all loss folded into pathloss; for hand-built test networks."""
        cg = np.atleast_2d(np.asarray(coupling_gain, float))
        zeros = np.zeros_like(cg)
        return cls(pathloss=-cg, shadowing=zeros, antenna_gain=zeros.copy(),
                   los=np.ones(cg.shape, bool), distance_2d=np.full(cg.shape, np.nan),
                   distance_3d=np.full(cg.shape, np.nan))

    def dump_csv(self, path):
        u, c = np.indices(self.shape)
        table = np.column_stack([
            u.ravel(), c.ravel(), self.pathloss.ravel(), self.shadowing.ravel(),
            self.antenna_gain.ravel(), self.los.ravel().astype(int),
            self.coupling_gain.ravel()])
        np.savetxt(path, table, delimiter=",", comments="",
                   header="ue,cell,pathloss,shadowing,antenna_gain,los,coupling_gain",
                   fmt=["%d", "%d", "%.17g", "%.17g", "%.17g", "%d", "%.17g"])


def link_geometry(layout: NetworkLayout, population: UePopulation):
    """Distances and angles from every cell to every UE, using the nearest wrap image."""
    ue_xy = population.position[:, None, None, :2]                            # (U,1,1,2)
    images = layout.site_xy[None, :, None, :] + layout.wrap_offsets[None, None]  # (1,S,W,2)
    delta = ue_xy - images                                                    # (U,S,W,2)
    dist = np.hypot(delta[..., 0], delta[..., 1])
    best = np.argmin(dist, axis=2)
    delta = np.take_along_axis(delta, best[:, :, None, None], axis=2)[:, :, 0, :]
    delta = delta[:, layout.cell_site, :]                                     # (U,C,2)
    d2d = np.hypot(delta[..., 0], delta[..., 1])
    dh = layout.antenna_height - population.altitude[:, None]
    d3d = np.hypot(d2d, dh)
    bearing = np.degrees(np.arctan2(delta[..., 1], delta[..., 0]))
    azimuth_offset = (bearing - layout.cell_azimuth[None, :] + 180.0) % 360.0 - 180.0
    depression = np.degrees(np.arctan2(dh, d2d))
    return d2d, d3d, azimuth_offset, depression


def build_coupling_matrix(layout: NetworkLayout, population: UePopulation, seed: int,
                          propagation: PropagationParams | str = "UMa-AV") -> CouplingMatrix:
    params = scenario_params(propagation)
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 2]))
    d2d, d3d, az_off, depression = link_geometry(layout, population)
    tilt = layout.mechanical_downtilt + params.antenna.electrical_downtilt
    gain = antenna_gain(params.antenna, az_off, depression - tilt)
    gain = np.asarray(gain, float).reshape(d2d.shape)

    altitude = population.altitude[:, None]
    p_los = np.asarray(los_probability(d2d, np.broadcast_to(altitude, d2d.shape), params))
    los = rng.random(d2d.shape) < p_los
    std = params.shadowing.lookup(population.is_aerial[:, None], los)
    shadowing = std * rng.standard_normal(d2d.shape)
    pl = np.asarray(pathloss(d3d, np.broadcast_to(altitude, d2d.shape), los, params,
                             layout.carrier_frequency), float).reshape(d2d.shape)
    return CouplingMatrix(pathloss=pl, shadowing=shadowing, antenna_gain=gain, los=los,
                          distance_2d=d2d, distance_3d=d3d)


def with_overrides(params: PropagationParams, overrides: dict) -> PropagationParams:
    """Apply a nested dict of overrides (from a config file) to scenario parameters."""
    kwargs = {}
    nested = {"ground": PathlossCoefficients, "air": PathlossCoefficients,
              "shadowing": ShadowingStd, "antenna": AntennaPattern}
    valid = {f.name for f in fields(params)}
    for key, value in overrides.items():
        if key not in valid:
            raise ValueError(f"unknown propagation key {key!r}")
        if key in nested:
            cur = getattr(params, key)
            sub_valid = {f.name for f in fields(cur)}
            unknown = set(value) - sub_valid
            if unknown:
                raise ValueError(f"unknown {key} keys: {sorted(unknown)}")
            kwargs[key] = replace(cur, **{k: float(v) for k, v in value.items()})
        else:
            kwargs[key] = float(value)
    return replace(params, **kwargs)
