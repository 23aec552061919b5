"""Named power-control combinations used by the sweep experiments."""

from __future__ import annotations

from dataclasses import replace

from .power_control import PowerControlConfig

# (P0 terrestrial, P0 aerial) in dBm, combinations 1..6; 1 is the baseline
OPEN_LOOP_P0 = ((-85.0, -85.0), (-85.0, -86.0), (-85.0, -87.0),
                (-85.0, -88.0), (-85.0, -89.0), (-85.0, -90.0))
UAV_P0_SWEEP = tuple(p for _, p in OPEN_LOOP_P0)

# received-power target of the closed-loop runs, dBm per PRB
CLOSED_LOOP_TARGET = -94.0


def open_loop_combination(index: int, base: PowerControlConfig = PowerControlConfig()) -> PowerControlConfig:
    if not 1 <= index <= len(OPEN_LOOP_P0):
        raise ValueError(f"open-loop combination must be 1..{len(OPEN_LOOP_P0)}")
    p_terr, p_aer = OPEN_LOOP_P0[index - 1]
    return replace(base, p0_terrestrial=p_terr, p0_aerial=p_aer, closed_loop_mode="off",
                   label=f"ol{index}")


def closed_loop_combination(index: int, base: PowerControlConfig = PowerControlConfig()) -> PowerControlConfig:
    """1: common P0 and target for both classes. 2: UAV target conditioned on RSRP."""
    if index not in (1, 2):
        raise ValueError("closed-loop combination must be 1 or 2")
    mode = "accumulate" if base.closed_loop_mode == "off" else base.closed_loop_mode
    target_t = CLOSED_LOOP_TARGET if base.target_terrestrial is None else base.target_terrestrial
    target_a = CLOSED_LOOP_TARGET if base.target_aerial is None else base.target_aerial
    return replace(base, p0_terrestrial=-85.0, p0_aerial=-85.0, closed_loop_mode=mode,
                   target_terrestrial=target_t, target_aerial=target_a,
                   aerial_target_mode="fixed" if index == 1 else "rsrp_conditioned",
                   label=f"cl{index}")


def resolve_combination(name, base: PowerControlConfig = PowerControlConfig()) -> PowerControlConfig:
    """``"3"``/``"ol3"`` -> open-loop combination 3; ``"cl2"`` -> closed-loop combination 2."""
    key = str(name).strip().lower()
    if key.startswith("cl"):
        return closed_loop_combination(int(key[2:]), base)
    if key.startswith("ol"):
        key = key[2:]
    try:
        return open_loop_combination(int(key), base)
    except ValueError as exc:
        if key.isdigit():
            raise
        raise ValueError(f"unknown combination {name!r}") from exc


def p0_sweep(p0_aerial_values, base: PowerControlConfig = PowerControlConfig()) -> list[PowerControlConfig]:
    """Open-loop policies for a list of UAV P0 values; the first entry is the baseline."""
    values = [float(v) for v in p0_aerial_values]
    if len(values) < 2:
        raise ValueError("a P0 sweep needs at least two combinations")
    return [replace(base, p0_aerial=v, closed_loop_mode="off", label=f"ol{i}")
            for i, v in enumerate(values, start=1)]
