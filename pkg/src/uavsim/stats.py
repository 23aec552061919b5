"""Empirical CDFs, nearest-rank percentiles, relative-gain reports and result files."""

from __future__ import annotations

import csv
from dataclasses import dataclass
import json
import math
from pathlib import Path

import numpy as np

CSV_HEADER = ("metric", "class", "scenario", "combination", "value")
UNDEFINED = None  # gain against a zero baseline percentile


@dataclass(frozen=True, eq=False)
class EmpiricalCdf:
    values: np.ndarray         # sorted samples
    probabilities: np.ndarray  # k / n for the k-th order statistic
    metric: str = ""
    device_class: str = ""

    @property
    def count(self) -> int:
        return len(self.values)

    def __call__(self, x) -> float:
        """P(X <= x)."""
        return float(np.searchsorted(self.values, x, side="right") / self.count)

    def steps(self):
        """Distinct values with the cumulative probability reached at each."""
        vals, counts = np.unique(self.values, return_counts=True)
        return vals, np.cumsum(counts) / self.count


def cdf(samples, metric: str = "", device_class: str = "") -> EmpiricalCdf:
    values = np.sort(np.asarray(samples, float).ravel(), kind="stable")
    if values.size == 0:
        raise ValueError("cannot build a CDF from no samples")
    n = values.size
    return EmpiricalCdf(values, np.arange(1, n + 1) / n, metric, device_class)


def percentile(dist, p: float) -> float:
    """Nearest-rank percentile: the ceil(p n / 100)-th order statistic, 0 < p < 100."""
    if not 0.0 < p < 100.0:
        raise ValueError("percentile must lie strictly between 0 and 100")
    values = dist.values if isinstance(dist, EmpiricalCdf) else np.sort(np.asarray(dist, float).ravel())
    n = len(values)
    if n == 0:
        raise ValueError("no samples")
    # round before ceil so that p = 100 k / n lands exactly on rank k
    rank = max(1, math.ceil(round(p * n / 100.0, 9)))
    return float(values[rank - 1])


def gain_report(baseline, candidate, percentiles=(5, 20, 50, 95)) -> dict:
    """Relative gain in % of candidate over baseline at each percentile, plus the mean.

    Keys are the percentiles and ``"mean"``; a zero baseline gives ``None``.
    """
    base = np.asarray(baseline, float).ravel()
    cand = np.asarray(candidate, float).ravel()
    if base.size == 0 or cand.size == 0:
        raise ValueError("gain_report needs non-empty inputs")
    b_cdf, c_cdf = cdf(base), cdf(cand)
    pairs = [(p, percentile(b_cdf, p), percentile(c_cdf, p)) for p in percentiles]
    pairs.append(("mean", float(base.mean()), float(cand.mean())))
    return {key: (UNDEFINED if b == 0 else 100.0 * (c - b) / b) for key, b, c in pairs}


def summarize(samples, percentiles=(5, 20, 50, 95)) -> dict:
    s = np.asarray(samples, float)
    out = {f"p{p:g}": percentile(s, p) for p in percentiles}
    out["mean"] = float(s.mean())
    out["count"] = int(s.size)
    return out


def _fmt(value) -> str:
    return repr(float(value))


def write_samples_csv(path, records) -> None:
    """``records``: iterable of (metric, class, scenario, combination, values)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for metric, cls, scenario, combination, values in records:
            for v in np.ravel(values):
                w.writerow((metric, cls, scenario, combination, _fmt(v)))


def read_samples_csv(path) -> dict:
    """{(metric, class, scenario, combination): np.ndarray} in file order."""
    out: dict = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {header}")
        for metric, cls, scenario, combination, value in reader:
            out.setdefault((metric, cls, scenario, combination), []).append(float(value))
    return {k: np.array(v) for k, v in out.items()}


def write_summary(path, summary: dict) -> None:
    """Flat key/value JSON document; nested dicts are flattened with dots."""
    flat = flatten(summary)
    with open(path, "w") as fh:
        json.dump(flat, fh, indent=1, sort_keys=True, allow_nan=True)
        fh.write("\n")


def read_summary(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}.{k}" if prefix else str(k)
        if isinstance(v, dict):
            out.update(flatten(v, key))
        else:
            out[key] = v
    return out


def write_plot_data(path, dist: EmpiricalCdf) -> None:
    """Two-column ``value probability`` file for gnuplot-style tools."""
    with open(path, "w") as fh:
        fh.write(f"# {dist.metric} {dist.device_class} n={dist.count}\n")
        for v, p in zip(dist.values, dist.probabilities):
            fh.write(f"{_fmt(v)} {_fmt(p)}\n")


def read_plot_data(path):
    data = np.loadtxt(path, comments="#", ndmin=2)
    return data[:, 0], data[:, 1]


def write_table_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows(rows)


def read_table_csv(path) -> list[list[str]]:
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def ensure_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p
