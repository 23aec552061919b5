"""Downlink geometry SINR with every cell at full power, and acquisition-channel outage."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
import math

import numpy as np

from .association import Associations, associate
from .deployment import DEVICE_CLASSES, ScenarioConfig, build_network, drop_ues
from .propagation import CouplingMatrix, PropagationParams, build_coupling_matrix, scenario_params
from .ul_engine import PRB_BANDWIDTH, drop_seeds

CHANNELS = ("SCH", "PBCH", "SystemInformation")


@dataclass(frozen=True)
class ChannelThresholds:
    """Required SINR per acquisition channel, normal coverage vs coverage extension.

    The normal-coverage defaults are placeholders, not link-budget values.
    """

    required_sinr_normal: dict = field(
        default_factory=lambda: {"SCH": -6.0, "PBCH": -7.5, "SystemInformation": -4.0})
    required_sinr_ce: dict = field(
        default_factory=lambda: {"SCH": -14.3, "PBCH": -14.2, "SystemInformation": -14.2})

    def __post_init__(self):
        for name in ("required_sinr_normal", "required_sinr_ce"):
            table = getattr(self, name)
            if set(table) != set(CHANNELS):
                raise ValueError(f"{name} must define exactly {CHANNELS}")
        for ch in CHANNELS:
            if not self.required_sinr_ce[ch] < self.required_sinr_normal[ch]:
                raise ValueError(f"CE threshold for {ch} must be below the normal one")

    def threshold(self, channel: str, ce_enabled: bool) -> float:
        table = self.required_sinr_ce if ce_enabled else self.required_sinr_normal
        return float(table[channel])

    def to_dict(self) -> dict:
        return {"required_sinr_normal": dict(self.required_sinr_normal),
                "required_sinr_ce": dict(self.required_sinr_ce)}


@dataclass(frozen=True)
class DlConfig:
    noise_density: float = -174.0
    noise_figure: float = 9.0      # UE receiver
    thresholds: ChannelThresholds = field(default_factory=ChannelThresholds)

    def noise_power(self, num_prbs: int) -> float:
        return self.noise_density + self.noise_figure + 10.0 * math.log10(num_prbs * PRB_BANDWIDTH)

    def to_dict(self) -> dict:
        return {"noise_density": self.noise_density, "noise_figure": self.noise_figure,
                **self.thresholds.to_dict()}


@dataclass(frozen=True)
class GeometrySample:
    ue_id: int
    device_class: str
    geometry_sinr: float


@dataclass(frozen=True, eq=False)
class GeometrySamples:
    ue_id: np.ndarray
    is_aerial: np.ndarray
    sinr: np.ndarray      # dB
    snr: np.ndarray       # dB, interference-free reference

    def __len__(self):
        return len(self.sinr)

    def __getitem__(self, i) -> GeometrySample:
        return GeometrySample(int(self.ue_id[i]), DEVICE_CLASSES[int(self.is_aerial[i])],
                              float(self.sinr[i]))

    def aerial(self) -> np.ndarray:
        return self.sinr[self.is_aerial]


def geometry_sinr(coupling, assignments: Associations | None, noise_dbm: float,
                  tx_power=46.0, is_aerial=None) -> GeometrySamples:
    """Wideband SINR: serving received power over all other cells plus noise."""
    cg = coupling.coupling_gain if isinstance(coupling, CouplingMatrix) else np.atleast_2d(
        np.asarray(coupling, float))
    if assignments is None:
        assignments = associate(cg, tx_power)
    n_ue, n_cell = cg.shape
    tx = np.broadcast_to(np.asarray(tx_power, float), (n_cell,))
    rx = np.power(10.0, (tx[None, :] + cg) / 10.0)
    serving = assignments.serving
    own = np.zeros_like(rx, dtype=bool)
    own[np.arange(n_ue), serving] = True
    signal = rx[own]
    interference = np.where(own, 0.0, rx).sum(axis=1)
    noise = 10.0 ** (noise_dbm / 10.0)
    sinr = 10.0 * np.log10(signal / (interference + noise))
    snr = 10.0 * np.log10(signal / noise)
    is_aerial = np.zeros(n_ue, bool) if is_aerial is None else np.asarray(is_aerial, bool)
    return GeometrySamples(np.arange(n_ue), is_aerial, sinr, snr)


def outage(samples, thresholds: ChannelThresholds = ChannelThresholds(), ce_enabled=False) -> dict:
    """Fraction of samples below each channel's required SINR.

    ``samples`` is a :class:`GeometrySamples` (its aerial UEs are used) or a
    plain array of SINR values.
    """
    values = samples.aerial() if isinstance(samples, GeometrySamples) else np.asarray(samples, float)
    values = np.ravel(values)
    if values.size == 0:
        raise ValueError("outage needs at least one sample")
    return {ch: float(np.mean(values < thresholds.threshold(ch, ce_enabled))) for ch in CHANNELS}


def outage_table(per_scenario: dict, thresholds: ChannelThresholds = ChannelThresholds()) -> dict:
    """{scenario: {"w/o CE": {...}, "w/ CE": {...}}} for a set of UAV SINR samples."""
    return {scen: {"w/o CE": outage(v, thresholds, False), "w/ CE": outage(v, thresholds, True)}
            for scen, v in per_scenario.items()}


def simulate_dl_drop(scenario: ScenarioConfig, seed: int, dl: DlConfig = DlConfig(),
                     propagation=None) -> GeometrySamples:
    layout = build_network(scenario)
    population = drop_ues(layout, scenario, seed)
    if len(population) == 0:
        raise ValueError("empty UE population")
    params = scenario_params(scenario.scenario if propagation is None else propagation)
    coupling = build_coupling_matrix(layout, population, seed, params)
    assoc = associate(coupling, layout)
    return geometry_sinr(coupling, assoc, dl.noise_power(layout.num_prbs), layout.tx_power,
                         population.is_aerial)


@dataclass(frozen=True, eq=False)
class DlCampaignResult:
    scenario: str
    drops: list

    def samples(self, device_class: str = "aerial") -> np.ndarray:
        out = []
        for d in self.drops:
            if device_class == "all":
                out.append(d.sinr)
            else:
                out.append(d.sinr[d.is_aerial == (device_class == "aerial")])
        return np.concatenate(out)


def _dl_job(args):
    return simulate_dl_drop(*args)


def run_dl_campaign(scenario: ScenarioConfig, num_drops: int, dl: DlConfig = DlConfig(),
                    propagation: PropagationParams | None = None, seed: int | None = None,
                    workers: int = 1) -> DlCampaignResult:
    if num_drops < 1:
        raise ValueError("num_drops must be >= 1")
    if scenario.ues_per_cell == 0:
        raise ValueError("empty UE population")
    seeds = drop_seeds(scenario.seed if seed is None else seed, num_drops)
    jobs = [(scenario, s, dl, propagation) for s in seeds]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            drops = list(pool.map(_dl_job, jobs))
    else:
        drops = [_dl_job(j) for j in jobs]
    return DlCampaignResult(scenario.scenario, drops)
