"""Snapshot uplink simulation: scheduling, power setting, interference, IoT, throughput."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
import logging
import math

import numpy as np

from .association import Associations, associate
from .deployment import ScenarioConfig, build_network, drop_ues
from .power_control import (
    PowerControlConfig, aerial_target_power, beta_adjustment, converge_closed_loop,
    open_loop_power, total_cpc_adjustment)
from .propagation import CouplingMatrix, PropagationParams, build_coupling_matrix, scenario_params

log = logging.getLogger(__name__)

PRB_BANDWIDTH = 180.0e3


@dataclass(frozen=True)
class UlConfig:
    noise_density: float = -174.0      # dBm/Hz
    noise_figure: float = 5.0          # BS receiver, dB
    prb_bandwidth: float = PRB_BANDWIDTH
    max_active_ues: int = 4            # scheduled UEs per cell and snapshot
    bandwidth_efficiency: float = 0.75
    max_spectral_efficiency: float = 6.0   # bit/s/Hz
    min_sinr: float = -10.0            # dB; zero throughput below
    convergence_tolerance: float = 0.5
    inner_max_rounds: int = 50
    outer_max_iterations: int = 20
    outer_damping: float = 0.5
    iot_target_weight: float = 0.0     # dB of target raise per dB of serving-cell IoT

    def __post_init__(self):
        if self.max_active_ues < 1:
            raise ValueError("max_active_ues must be >= 1")
        if not 0 < self.outer_damping <= 1:
            raise ValueError("outer_damping must lie in (0, 1]")

    @property
    def noise_per_prb(self) -> float:
        return self.noise_density + self.noise_figure + 10.0 * math.log10(self.prb_bandwidth)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True, eq=False)
class Allocation:
    prb_owner: np.ndarray   # (C, K) scheduled UE per cell and PRB, -1 if idle
    serving: np.ndarray     # (U,) serving cell of every UE

    @property
    def num_cells(self) -> int:
        return self.prb_owner.shape[0]

    @property
    def num_prbs(self) -> int:
        return self.prb_owner.shape[1]

    @property
    def m_prb(self) -> np.ndarray:
        owners = self.prb_owner[self.prb_owner >= 0]
        return np.bincount(owners, minlength=len(self.serving))

    @property
    def active(self) -> np.ndarray:
        return self.m_prb > 0

    @property
    def occupancy(self) -> float:
        return float(np.mean(self.prb_owner >= 0))

    def prbs_of(self, ue: int) -> np.ndarray:
        return np.flatnonzero(self.prb_owner[self.serving[ue]] == ue)

    def __eq__(self, other):
        if not isinstance(other, Allocation):
            return NotImplemented
        return (np.array_equal(self.prb_owner, other.prb_owner)
                and np.array_equal(self.serving, other.serving))


def schedule_snapshot(assignments, target_ru: float, num_prbs: int, seed: int,
                      num_cells: int | None = None, max_active_ues: int = 4) -> Allocation:
    """Pick active UEs and PRBs in every cell.

    Each cell occupies ``target_ru * num_prbs`` PRBs (randomly rounded so the
    expectation is exact) as one cyclic run at a random offset; up to
    ``max_active_ues`` attached UEs, chosen at random, split the run into
    contiguous blocks.
    """
    if not 0.0 < target_ru <= 1.0:
        raise ValueError("target_ru must lie in (0, 1]")
    if isinstance(assignments, Associations):
        serving = assignments.serving
        num_cells = assignments.ranked_cells.shape[1] if num_cells is None else num_cells
    else:
        serving = np.asarray(assignments, int)
        if num_cells is None:
            num_cells = int(serving.max()) + 1 if serving.size else 0
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 3]))
    owner = np.full((num_cells, num_prbs), -1, dtype=np.int64)
    base = target_ru * num_prbs
    k_floor = int(math.floor(base + 1e-12))
    frac = base - k_floor
    for c in range(num_cells):
        u_round, u_offset = rng.random(2)
        k = min(num_prbs, k_floor + (1 if u_round < frac else 0))
        attached = np.flatnonzero(serving == c)
        n_active = min(len(attached), max_active_ues, k)
        if n_active == 0:
            continue
        active = rng.choice(attached, n_active, replace=False)
        start = int(u_offset * num_prbs)
        prbs = (start + np.arange(k)) % num_prbs
        for ue, block in zip(active, np.array_split(prbs, n_active)):
            owner[c, block] = ue
    return Allocation(owner, serving.copy())


def _db_to_lin(x):
    return np.power(10.0, np.asarray(x, float) / 10.0)


def _lin_to_db(x):
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(x)


def _received_per_prb(allocation: Allocation, coupling_gain: np.ndarray, tx_power_dbm):
    """Linear received power (mW) at every cell from the owner of every (cell, PRB).

    Returns an array of shape (C_tx, K, C_rx).
    """
    owner = allocation.prb_owner
    m = allocation.m_prb
    tx = np.asarray(tx_power_dbm, float)
    busy = owner >= 0
    safe = np.where(busy, owner, 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        per_prb = np.where(m > 0, tx - 10.0 * np.log10(np.maximum(m, 1)), -np.inf)
    rx_db = per_prb[safe][..., None] + coupling_gain[safe]      # (C, K, C)
    rx = np.where(busy[..., None], _db_to_lin(rx_db), 0.0)
    return rx


def compute_ul_interference(allocation: Allocation, coupling, tx_powers) -> np.ndarray:
    """Inter-cell interference in dBm per (cell, PRB); -inf where nobody interferes."""
    cg = coupling.coupling_gain if isinstance(coupling, CouplingMatrix) else np.asarray(coupling, float)
    rx = _received_per_prb(allocation, cg, tx_powers)
    c = allocation.num_cells
    rx[np.arange(c), :, np.arange(c)] = 0.0          # own-cell UEs are not interference
    interference = rx.sum(axis=0).T                  # (C_rx, K)
    return _lin_to_db(interference)


def iot(interference, noise):
    """(I + N) / N in dB."""
    out = 10.0 * np.log10(1.0 + _db_to_lin(np.asarray(interference, float) - np.asarray(noise, float)))
    return float(out) if np.ndim(out) == 0 else out


def cell_iot(interference, noise):
    """Wideband IoT per cell, averaging (I + N) / N linearly across PRBs."""
    ratio = 1.0 + _db_to_lin(np.asarray(interference, float) - noise)
    return 10.0 * np.log10(ratio.mean(axis=-1))


def shannon_throughput(sinr_db, bandwidth, efficiency=0.75, max_spectral_efficiency=6.0,
                       min_sinr=-10.0):
    """Attenuated Shannon rate in bit/s with a spectral-efficiency ceiling and SINR floor."""
    sinr_db = np.asarray(sinr_db, float)
    with np.errstate(over="ignore"):
        se = efficiency * np.log2(1.0 + _db_to_lin(sinr_db))
    se = np.minimum(se, max_spectral_efficiency)
    se = np.where(sinr_db < min_sinr, 0.0, se)
    out = np.where(np.asarray(bandwidth) > 0, se * bandwidth, 0.0)
    return float(out) if out.ndim == 0 else out


def ul_sinr_and_throughput(allocation: Allocation, interference, coupling, tx_powers,
                           ul: UlConfig = UlConfig()):
    """Per-UE SINR (dB, NaN when idle) and throughput (bit/s, 0 when idle).

    SINR is total signal over total interference plus noise on the UE's PRBs.
    """
    cg = coupling.coupling_gain if isinstance(coupling, CouplingMatrix) else np.asarray(coupling, float)
    n_ue = len(allocation.serving)
    m = allocation.m_prb
    noise = _db_to_lin(ul.noise_per_prb)
    in_lin = _db_to_lin(interference) + noise          # (C, K)
    owner = allocation.prb_owner
    busy = owner >= 0
    denom = np.bincount(owner[busy], weights=in_lin[busy], minlength=n_ue)
    tx = np.asarray(tx_powers, float)
    sinr = np.full(n_ue, np.nan)
    act = m > 0
    idx = np.flatnonzero(act)
    signal_db = tx[idx] + cg[idx, allocation.serving[idx]]
    sinr[idx] = signal_db - 10.0 * np.log10(denom[idx])
    tput = np.zeros(n_ue)
    tput[idx] = shannon_throughput(sinr[idx], m[idx] * ul.prb_bandwidth,
                                   ul.bandwidth_efficiency, ul.max_spectral_efficiency,
                                   ul.min_sinr)
    return sinr, tput


@dataclass(frozen=True, eq=False)
class UlDropResult:
    seed: int
    cell_iot: np.ndarray          # (C,) dB
    interference: np.ndarray      # (C, K) dBm
    sinr: np.ndarray              # (U,) dB, NaN for idle UEs
    throughput: np.ndarray        # (U,) bit/s
    tx_power: np.ndarray          # (U,) dBm, NaN for idle UEs
    is_aerial: np.ndarray         # (U,)
    active: np.ndarray            # (U,)
    serving: np.ndarray           # (U,)
    pcpc: np.ndarray              # (U,) (1 - alpha) PL
    achieved_ru: float
    outer_iterations: int = 1


def ue_powers(policy: PowerControlConfig, assoc: Associations, is_aerial, m_prb,
              target_offset=None, ul: UlConfig = UlConfig()):
    """Transmit power (dBm) of every UE for its allocation; NaN where idle."""
    is_aerial = np.asarray(is_aerial, bool)
    m = np.asarray(m_prb)
    act = m > 0
    pl = assoc.serving_pathloss
    p0 = np.where(is_aerial, policy.p0_aerial, policy.p0_terrestrial)
    if policy.beta_enabled and assoc.num_neighbors >= policy.beta_neighbor_index:
        n = policy.beta_neighbor_index
        ratio = assoc.pathloss_ratios(n) if policy.beta_input == "pathloss_ratio" else assoc.rsrp_ratios(n)
        beta = np.asarray(beta_adjustment(ratio, policy.beta_table))
        if policy.beta_applies_to == "aerial":
            beta = np.where(is_aerial, beta, 0.0)
        p0 = p0 + beta

    power = np.full(len(m), np.nan)
    if not np.any(act):
        return power
    f = np.zeros(len(m))
    if policy.closed_loop_mode != "off":
        n = min(policy.beta_neighbor_index, assoc.num_neighbors)
        neighbor_rsrp = assoc.ranked_rsrp[:, n] if n >= 1 else assoc.serving_rsrp
        target_aer = aerial_target_power(assoc.serving_rsrp, neighbor_rsrp, policy.aerial_target,
                                         policy.aerial_target_mode, policy.target_mapping)
        target = np.where(is_aerial, target_aer, policy.terrestrial_target)
        if target_offset is not None:
            target = target + target_offset
        ol_per_prb = p0 + policy.alpha * pl + policy.delta_tf
        cap_per_prb = policy.p_cmax - 10.0 * np.log10(np.maximum(m, 1))
        f_act, _ = converge_closed_loop(
            ol_per_prb[act], -pl[act], target[act], cap_per_prb[act], policy.tpc_step_set,
            policy.closed_loop_mode, ul.inner_max_rounds, ul.convergence_tolerance)
        f[act] = f_act
    power[act] = open_loop_power(m[act], p0[act], policy.alpha, pl[act], policy.delta_tf,
                                 f[act], policy.p_cmax)
    return power


def simulate_ul_drop(scenario: ScenarioConfig, policy: PowerControlConfig, seed: int,
                     ul: UlConfig = UlConfig(), propagation=None) -> UlDropResult:
    layout = build_network(scenario)
    population = drop_ues(layout, scenario, seed)
    params = scenario_params(scenario.scenario if propagation is None else propagation)
    coupling = build_coupling_matrix(layout, population, seed, params)
    assoc = associate(coupling, layout)
    alloc = schedule_snapshot(assoc, scenario.target_ru, layout.num_prbs, seed,
                              max_active_ues=ul.max_active_ues)
    return evaluate_ul(alloc, assoc, coupling, population.is_aerial, policy, ul, seed)


def evaluate_ul(alloc: Allocation, assoc: Associations, coupling, is_aerial,
                policy: PowerControlConfig, ul: UlConfig = UlConfig(), seed: int = 0) -> UlDropResult:
    """Power setting, interference and per-UE metrics for one scheduled snapshot."""
    cg = coupling.coupling_gain if isinstance(coupling, CouplingMatrix) else np.asarray(coupling, float)
    is_aerial = np.asarray(is_aerial, bool)
    m = alloc.m_prb
    noise = ul.noise_per_prb
    offset = None
    iterations = 1
    power = ue_powers(policy, assoc, is_aerial, m, None, ul)
    interference = compute_ul_interference(alloc, cg, power)
    if policy.closed_loop_mode != "off" and ul.iot_target_weight != 0.0:
        offset = np.zeros(len(m))
        for iterations in range(1, ul.outer_max_iterations + 1):
            wanted = ul.iot_target_weight * cell_iot(interference, noise)[alloc.serving]
            step = ul.outer_damping * (wanted - offset)
            offset = offset + step
            power = ue_powers(policy, assoc, is_aerial, m, offset, ul)
            interference = compute_ul_interference(alloc, cg, power)
            if np.max(np.abs(step)) < ul.convergence_tolerance:
                break
    sinr, tput = ul_sinr_and_throughput(alloc, interference, cg, power, ul)
    return UlDropResult(
        seed=int(seed),
        cell_iot=cell_iot(interference, noise),
        interference=interference,
        sinr=sinr,
        throughput=tput,
        tx_power=power,
        is_aerial=is_aerial,
        active=m > 0,
        serving=alloc.serving,
        pcpc=np.asarray(total_cpc_adjustment(policy.alpha, assoc.serving_pathloss)),
        achieved_ru=alloc.occupancy,
        outer_iterations=iterations,
    )


def drop_seeds(seed: int, num_drops: int) -> list[int]:
    """Independent per-drop seeds derived from a campaign seed."""
    children = np.random.SeedSequence(int(seed)).spawn(num_drops)
    return [int(c.generate_state(1, dtype=np.uint32)[0]) for c in children]


_METRIC_CLASSES = {"all": None, "terrestrial": False, "aerial": True}


@dataclass(frozen=True, eq=False)
class UlCampaignResult:
    scenario: str
    policy: PowerControlConfig
    drops: list

    def samples(self, metric: str, device_class: str = "all") -> np.ndarray:
        """Concatenated samples over drops, in drop order.

        ``iot`` is per cell (class must be ``all``); ``sinr``, ``throughput``
        and ``tx_power`` cover scheduled UEs; ``pcpc`` covers every UE.
        """
        want = _METRIC_CLASSES[device_class]
        out = []
        for d in self.drops:
            if metric == "iot":
                if want is not None:
                    raise ValueError("IoT is a per-cell metric; use class 'all'")
                out.append(d.cell_iot)
                continue
            values = getattr(d, metric)
            mask = d.active.copy() if metric != "pcpc" else np.ones(len(values), bool)
            if want is not None:
                mask &= d.is_aerial == want
            out.append(values[mask])
        return np.concatenate(out) if out else np.empty(0)

    @property
    def interference(self) -> np.ndarray:
        return np.stack([d.interference for d in self.drops])

    @property
    def achieved_ru(self) -> np.ndarray:
        return np.array([d.achieved_ru for d in self.drops])


def _ul_job(args):
    scenario, policy, seed, ul, propagation = args
    return simulate_ul_drop(scenario, policy, seed, ul, propagation)


def run_ul_campaign(scenario: ScenarioConfig, policy: PowerControlConfig, num_drops: int,
                    ul: UlConfig = UlConfig(), propagation: PropagationParams | None = None,
                    seed: int | None = None, workers: int = 1) -> UlCampaignResult:
    """Independent seeded drops; results ordered by drop index whatever ``workers`` is."""
    if num_drops < 1:
        raise ValueError("num_drops must be >= 1")
    seeds = drop_seeds(scenario.seed if seed is None else seed, num_drops)
    jobs = [(scenario, policy, s, ul, propagation) for s in seeds]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            drops = list(pool.map(_ul_job, jobs))
    else:
        drops = [_ul_job(j) for j in jobs]
    log.debug("UL campaign %s/%s: %d drops", scenario.scenario, policy.label, num_drops)
    return UlCampaignResult(scenario.scenario, policy, drops)
