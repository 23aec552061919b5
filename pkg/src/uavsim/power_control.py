"""PUSCH power control: open-loop formula, neighbour-based back-off, TPC loop."""

from __future__ import annotations

from dataclasses import dataclass, field, fields
import math

import numpy as np

ALPHA_VALUES = (0.0, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)
LEGACY_TPC_STEPS = (-1.0, 0.0, 1.0, 3.0)
EXTENDED_TPC_STEPS = (-8.0, -4.0, -1.0, 0.0, 1.0, 4.0, 8.0)
CLOSED_LOOP_MODES = ("off", "accumulate", "absolute")
BETA_INPUTS = ("pathloss_ratio", "rsrp_ratio")
TARGET_MODES = ("fixed", "rsrp_conditioned")
BETA_SCOPES = ("aerial", "all")


@dataclass(frozen=True)
class BetaTable:
    """Piecewise-constant back-off keyed on a dB ratio.

    A ratio maps to the adjustment of the largest threshold not above it;
    ratios beyond the last threshold get ``above``, ratios under the first
    get the first adjustment.
    """

    thresholds: tuple[float, ...] = (0.0, 1.0, 2.0, 3.0, 4.0, 5.0)
    adjustments: tuple[float, ...] = (-6.0, -5.0, -4.0, -3.0, -2.0, -1.0)
    above: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "thresholds", tuple(float(t) for t in self.thresholds))
        object.__setattr__(self, "adjustments", tuple(float(a) for a in self.adjustments))
        if len(self.thresholds) != len(self.adjustments) or not self.thresholds:
            raise ValueError("beta table needs matching, non-empty thresholds and adjustments")
        if any(b <= a for a, b in zip(self.thresholds, self.thresholds[1:])):
            raise ValueError("beta thresholds must be strictly increasing")
        if any(a > 0 for a in self.adjustments) or self.above > 0:
            raise ValueError("beta adjustments must be non-positive")

    @classmethod
    def from_rows(cls, rows, above=0.0):
        rows = [tuple(r) for r in rows]
        return cls(tuple(r[0] for r in rows), tuple(r[1] for r in rows), float(above))

    def rows(self):
        return [[t, a] for t, a in zip(self.thresholds, self.adjustments)]


DEFAULT_BETA_TABLE = BetaTable()


@dataclass(frozen=True)
class PowerControlConfig:
    """Uplink power-control policy. ``p0_*`` are the composed P0 values in dBm."""

    p0_terrestrial: float = -85.0
    p0_aerial: float = -85.0
    alpha: float = 0.8
    p_cmax: float = 23.0
    delta_tf: float = 0.0
    beta_enabled: bool = False
    beta_table: BetaTable = field(default_factory=BetaTable)
    beta_neighbor_index: int = 3
    beta_input: str = "pathloss_ratio"
    beta_applies_to: str = "aerial"
    closed_loop_mode: str = "off"
    tpc_step_set: tuple[float, ...] = LEGACY_TPC_STEPS
    aerial_target_mode: str = "fixed"
    target_terrestrial: float | None = None   # closed-loop received-power target, dBm/PRB
    target_aerial: float | None = None
    aerial_target_mapping: BetaTable | None = None  # None -> reuse beta_table
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "tpc_step_set", tuple(float(s) for s in self.tpc_step_set))
        if self.alpha not in ALPHA_VALUES:
            raise ValueError(f"alpha must be one of {ALPHA_VALUES}")
        if self.closed_loop_mode not in CLOSED_LOOP_MODES:
            raise ValueError(f"closed_loop_mode must be one of {CLOSED_LOOP_MODES}")
        if self.beta_input not in BETA_INPUTS:
            raise ValueError(f"beta_input must be one of {BETA_INPUTS}")
        if self.beta_applies_to not in BETA_SCOPES:
            raise ValueError(f"beta_applies_to must be one of {BETA_SCOPES}")
        if self.aerial_target_mode not in TARGET_MODES:
            raise ValueError(f"aerial_target_mode must be one of {TARGET_MODES}")
        if not self.tpc_step_set:
            raise ValueError("tpc_step_set must not be empty")
        if self.beta_neighbor_index < 1:
            raise ValueError("beta_neighbor_index is 1-based")
        if not math.isfinite(self.p_cmax):
            raise ValueError("p_cmax must be finite")

    @property
    def terrestrial_target(self) -> float:
        return self.p0_terrestrial if self.target_terrestrial is None else self.target_terrestrial

    @property
    def aerial_target(self) -> float:
        return self.p0_aerial if self.target_aerial is None else self.target_aerial

    @property
    def target_mapping(self) -> BetaTable:
        return self.beta_table if self.aerial_target_mapping is None else self.aerial_target_mapping

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, BetaTable):
                v = {"rows": v.rows(), "above": v.above}
            elif isinstance(v, tuple):
                v = list(v)
            out[f.name] = v
        return out


def _scalar_or_array(x):
    return float(x) if np.ndim(x) == 0 else x


def open_loop_power(m_prb, p0, alpha, pl, delta_tf=0.0, f=0.0, p_cmax=23.0):
    """min(P_CMAX, 10 log10(M) + P0 + alpha PL + delta_TF + f), in dBm."""
    m = np.asarray(m_prb, float)
    if np.any(m < 1):
        raise ValueError("PUSCH allocation must hold at least one PRB")
    p = 10.0 * np.log10(m) + p0 + alpha * np.asarray(pl, float) + delta_tf + f
    return _scalar_or_array(np.minimum(p_cmax, p))


def beta_adjustment(ratio, table: BetaTable = DEFAULT_BETA_TABLE):
    r = np.asarray(ratio, float)
    th = np.asarray(table.thresholds)
    adj = np.asarray(table.adjustments)
    idx = np.clip(np.searchsorted(th, r, side="right") - 1, 0, len(th) - 1)
    out = np.where(r > th[-1], table.above, adj[idx])
    return _scalar_or_array(out)


@dataclass(frozen=True)
class ClosedLoopState:
    f: float = 0.0
    last_command_subframe: int = -1


def closed_loop_update(state: ClosedLoopState, delta: float, mode: str = "accumulate",
                       tpc_step_set=LEGACY_TPC_STEPS) -> ClosedLoopState:
    """Apply one TPC command: accumulate (f + delta) or absolute (f = delta)."""
    if delta not in tpc_step_set:
        raise ValueError(f"TPC step {delta} not in configured set {tuple(tpc_step_set)}")
    nxt = state.last_command_subframe + 1
    if mode == "accumulate":
        return ClosedLoopState(state.f + delta, nxt)
    if mode == "absolute":
        return ClosedLoopState(float(delta), nxt)
    raise ValueError(f"closed-loop mode {mode!r} cannot apply TPC commands")


def tpc_command(received_power, target, tpc_step_set=LEGACY_TPC_STEPS):
    """Step that brings the received power closest to target; ties go to the smaller |step|."""
    steps = np.asarray(sorted(tpc_step_set, key=lambda s: (abs(s), s)), float)
    if steps.size == 0:
        raise ValueError("empty TPC step set")
    err = np.asarray(received_power, float)[..., None] + steps - np.asarray(target, float)[..., None]
    # argmin returns the first minimum, i.e. the smallest |step|
    out = steps[np.argmin(np.abs(err), axis=-1)]
    return _scalar_or_array(out)


def total_cpc_adjustment(alpha, pl):
    """Share of pathloss left to the closed loop: (1 - alpha) PL."""
    pl = np.asarray(pl, float)
    if np.any(pl <= 0):
        raise ValueError("pathloss must be positive")
    return _scalar_or_array((1.0 - alpha) * pl)


def aerial_target_power(serving_rsrp, neighbor_rsrp, base_target, mode="fixed",
                        mapping: BetaTable = DEFAULT_BETA_TABLE):
    """Closed-loop received-power target for a UAV.

    ``rsrp_conditioned`` lowers the base target by the mapping applied to
    serving minus neighbour RSRP.
    """
    if mode == "fixed":
        return _scalar_or_array(np.broadcast_to(float(base_target), np.shape(serving_rsrp)).copy())
    if mode == "rsrp_conditioned":
        diff = np.asarray(serving_rsrp, float) - np.asarray(neighbor_rsrp, float)
        return _scalar_or_array(base_target + np.asarray(beta_adjustment(diff, mapping)))
    raise ValueError(f"unknown target mode {mode!r}")


def converge_closed_loop(open_loop, coupling_gain, target, p_cmax, steps=LEGACY_TPC_STEPS,
                         mode="accumulate", max_rounds=50, tolerance=0.5, f0=None):
    """Iterate TPC commands until received power settles on target.

    Works element-wise on arrays of UEs. ``open_loop`` is the uncapped
    open-loop power (dBm) measured on the same bandwidth as ``target``;
    received power is ``min(p_cmax, open_loop + f) + coupling_gain``.
    Positive commands are not accumulated once the UE sits at ``p_cmax``.
    ``tolerance`` is informational: with a step set containing 0 and +/-1
    the loop stops within half a dB on its own.
    Returns ``(f, rounds_used)``.
    """
    open_loop = np.asarray(open_loop, float)
    cg = np.broadcast_to(np.asarray(coupling_gain, float), open_loop.shape)
    target = np.broadcast_to(np.asarray(target, float), open_loop.shape)
    p_cmax = np.broadcast_to(np.asarray(p_cmax, float), open_loop.shape)
    f = np.zeros(open_loop.shape) if f0 is None else np.array(f0, float)
    if mode == "absolute":
        # an absolute command replaces f outright, so one decision suffices
        rx0 = np.minimum(p_cmax, open_loop) + cg
        return np.asarray(tpc_command(rx0, target, steps), float) + 0.0 * f, 1
    rounds = 0
    for rounds in range(1, max_rounds + 1):
        tx = np.minimum(p_cmax, open_loop + f)
        rx = tx + cg
        delta = np.asarray(tpc_command(rx, target, steps), float)
        delta = np.where((tx >= p_cmax) & (delta > 0), 0.0, delta)
        if not np.any(delta):
            break
        f = f + delta
    return f, rounds
