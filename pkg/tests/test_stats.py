import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from uavsim.stats import (
    cdf, ensure_dir, flatten, gain_report, percentile, read_plot_data, read_samples_csv,
    read_summary, read_table_csv, summarize, write_plot_data, write_samples_csv, write_summary,
    write_table_csv,
)


def test_cdf_basics():
    d = cdf([3, 1, 2])
    assert d(2) == pytest.approx(2 / 3)
    assert d(0) == 0.0 and d(3) == 1.0
    vals, probs = cdf([4.0] * 5).steps()
    assert list(vals) == [4.0] and list(probs) == [1.0]
    assert np.all(np.diff(d.probabilities) > 0) and d.probabilities[-1] == 1.0
    with pytest.raises(ValueError):
        cdf([])


def test_uniform_median():
    s = np.random.default_rng(0).random(10_000)
    assert percentile(cdf(s), 50) == pytest.approx(0.5, abs=0.02)


def test_percentile_examples():
    s = np.arange(1, 101)
    assert percentile(s, 50) == 50
    assert percentile(s, 95) == 95
    assert percentile([7.0], 13) == 7.0
    for bad in (0, 100, -1, 101):
        with pytest.raises(ValueError):
            percentile(s, bad)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=200), st.data())
def test_percentile_round_trip(samples, data):
    n = len(samples)
    k = data.draw(st.integers(1, n - 1))
    assert percentile(cdf(samples), 100 * k / n) == sorted(samples)[k - 1]


def test_gain_report():
    base = np.random.default_rng(1).uniform(1, 10, 500)
    g = gain_report(base, base)
    assert all(v == 0 for v in g.values())
    g = gain_report(base, 1.3 * base)
    assert set(g) == {5, 20, 50, 95, "mean"}
    assert all(v == pytest.approx(30.0) for v in g.values())
    assert gain_report(np.zeros(10), np.ones(10))[50] is None
    with pytest.raises(ValueError):
        gain_report([], [1.0])


def test_summarize():
    s = summarize(np.arange(1, 101))
    assert s["p50"] == 50 and s["mean"] == 50.5 and s["count"] == 100


def test_samples_csv_round_trip(tmp_path):
    vals = np.random.default_rng(2).normal(size=20) * 1e3
    path = tmp_path / "s.csv"
    write_samples_csv(path, [("iot", "all", "UMa-AV", "ol1", vals),
                             ("sinr", "aerial", "UMa-AV", "ol1", vals[:3])])
    back = read_samples_csv(path)
    assert np.array_equal(back[("iot", "all", "UMa-AV", "ol1")], vals)
    assert np.array_equal(back[("sinr", "aerial", "UMa-AV", "ol1")], vals[:3])
    assert path.read_text().splitlines()[0] == "metric,class,scenario,combination,value"


def test_bad_csv_header(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        read_samples_csv(p)


def test_summary_round_trip(tmp_path):
    p = tmp_path / "summary.json"
    write_summary(p, {"iot": {"all": {"p50": 1.25}}, "n": 3, "gain": None})
    assert read_summary(p) == {"iot.all.p50": 1.25, "n": 3, "gain": None}
    assert flatten({"a": {"b": 1}}) == {"a.b": 1}
    json.loads(p.read_text())


def test_plot_data_round_trip(tmp_path):
    d = cdf(np.random.default_rng(3).normal(size=50), "sinr", "aerial")
    p = tmp_path / "cdf.dat"
    write_plot_data(p, d)
    x, y = read_plot_data(p)
    assert np.array_equal(x, d.values) and np.array_equal(y, d.probabilities)


def test_table_round_trip(tmp_path):
    rows = [["a", "b"], ["1.5", "x,y"]]
    p = tmp_path / "t.csv"
    write_table_csv(p, rows)
    assert read_table_csv(p) == rows
    assert ensure_dir(tmp_path / "x" / "y").is_dir()
