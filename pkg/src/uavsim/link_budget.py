"""Downlink coverage-extension link budget for the cell-acquisition channels."""

from __future__ import annotations

from dataclasses import dataclass, asdict
import math

LINK_BUDGET_CHANNELS = ("SCH", "PBCH", "PDSCH")

ROW_LABELS = (
    ("max_tx_power", "Max Tx power per LTE carrier (dBm)"),
    ("actual_tx_power", "Actual Tx power (dBm)"),
    ("noise_density", "Thermal noise density (dBm/Hz)"),
    ("noise_figure", "Receiver noise figure (dB)"),
    ("bandwidth", "Occupied channel bandwidth (Hz)"),
    ("effective_noise", "Effective noise power (dBm)"),
    ("required_sinr", "Required SINR (dB)"),
    ("sensitivity", "Receiver sensitivity (dBm)"),
    ("mcl", "MCL (dB)"),
)


def effective_noise(noise_density: float, noise_figure: float, bandwidth: float) -> float:
    if bandwidth <= 0:
        raise ValueError("bandwidth must be positive")
    return noise_density + noise_figure + 10.0 * math.log10(bandwidth)


def sensitivity(effective_noise_dbm: float, required_sinr: float) -> float:
    return effective_noise_dbm + required_sinr


def mcl(actual_tx_power: float, sensitivity_dbm: float) -> float:
    """Maximum coupling loss in dB."""
    return actual_tx_power - sensitivity_dbm


@dataclass(frozen=True)
class LinkBudgetRow:
    channel: str
    max_tx_power: float
    actual_tx_power: float
    noise_density: float
    noise_figure: float
    bandwidth: float
    effective_noise: float
    required_sinr: float
    sensitivity: float
    mcl: float

    @classmethod
    def evaluate(cls, channel, max_tx_power, actual_tx_power, noise_density, noise_figure,
                 bandwidth, required_sinr):
        n_eff = effective_noise(noise_density, noise_figure, bandwidth)
        sens = sensitivity(n_eff, required_sinr)
        return cls(channel, max_tx_power, actual_tx_power, noise_density, noise_figure,
                   bandwidth, n_eff, required_sinr, sens, mcl(actual_tx_power, sens))

    def as_dict(self) -> dict:
        return asdict(self)


# actual powers are taken as given: 46 dBm scaled down to the occupied bandwidth
CE_INPUTS = {
    "SCH": dict(actual_tx_power=32.0, bandwidth=360_000.0, required_sinr=-14.3),
    "PBCH": dict(actual_tx_power=36.8, bandwidth=1_080_000.0, required_sinr=-14.2),
    "PDSCH": dict(actual_tx_power=36.8, bandwidth=1_080_000.0, required_sinr=-14.2),
}


def build_ce_table(max_tx_power=46.0, noise_density=-174.0, noise_figure=9.0) -> list[LinkBudgetRow]:
    return [LinkBudgetRow.evaluate(ch, max_tx_power, noise_density=noise_density,
                                   noise_figure=noise_figure, **CE_INPUTS[ch])
            for ch in LINK_BUDGET_CHANNELS]


def _fmt(key, value):
    if key == "bandwidth":
        return f"{value:.0f}"
    if key == "noise_figure":
        return f"{value:g}"
    return f"{value:.1f}"


def format_table(rows: list[LinkBudgetRow]) -> str:
    """Plain-text table, one budget line per row, channels as columns (0.1 dB display)."""
    width = max(len(label) for _, label in ROW_LABELS)
    lines = ["Physical channel".ljust(width) + "".join(f"{r.channel:>12}" for r in rows)]
    for key, label in ROW_LABELS:
        lines.append(label.ljust(width) + "".join(f"{_fmt(key, getattr(r, key)):>12}" for r in rows))
    return "\n".join(lines)


def table_csv_rows(rows: list[LinkBudgetRow]) -> list[list[str]]:
    """Rows as CSV cells at full precision: quantity, then one column per channel."""
    out = [["quantity", *(r.channel for r in rows)]]
    for key, _ in ROW_LABELS:
        out.append([key, *(repr(float(getattr(r, key))) for r in rows)])
    return out
