import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from uavsim.deployment import ScenarioConfig
from uavsim.dl_engine import (
    CHANNELS, ChannelThresholds, DlConfig, geometry_sinr, outage, outage_table, run_dl_campaign,
    simulate_dl_drop,
)


def test_single_cell_sinr_equals_snr():
    g = geometry_sinr(np.array([[-100.0], [-120.0]]), None, noise_dbm=-95.0)
    assert np.allclose(g.sinr, g.snr)
    assert g.sinr[0] == pytest.approx(46.0 - 100.0 + 95.0)


def test_two_equal_cells_split_evenly():
    g = geometry_sinr(np.array([[-90.0, -90.0]]), None, noise_dbm=-250.0)
    assert g.sinr[0] == pytest.approx(0.0, abs=1e-9)


def test_four_cell_brute_force_oracle():
    rng = np.random.default_rng(9)
    cg = rng.uniform(-140, -80, size=(30, 4))
    tx = np.array([46.0, 43.0, 46.0, 40.0])
    noise = -104.5
    g = geometry_sinr(cg, None, noise, tx)
    for u in range(len(cg)):
        rx = [10 ** ((tx[c] + cg[u, c]) / 10) for c in range(4)]
        s = max(range(4), key=lambda c: rx[c])
        want = 10 * math.log10(rx[s] / (sum(rx) - rx[s] + 10 ** (noise / 10)))
        assert g.sinr[u] == pytest.approx(want, abs=1e-9)
    assert np.all(g.sinr <= g.snr)


def test_sample_view():
    g = geometry_sinr(np.array([[-90.0, -95.0]]), None, -100.0, is_aerial=np.array([True]))
    s = g[0]
    assert s.ue_id == 0 and s.device_class == "aerial"
    assert len(g.aerial()) == 1


def test_outage_examples():
    th = ChannelThresholds()
    assert outage(np.array([0.0, 5.0]), th) == {ch: 0.0 for ch in CHANNELS}
    assert outage(np.array([-10.8, -3.0]), th, ce_enabled=True) == {ch: 0.0 for ch in CHANNELS}
    assert all(v == 1.0 for v in outage(np.array([-20.0, -15.0]), th).values())
    with pytest.raises(ValueError):
        outage(np.array([]), th)


def test_outage_uses_aerial_samples_only():
    g = geometry_sinr(np.array([[-90.0, -90.0], [-80.0, -120.0]]), None, -250.0,
                      is_aerial=np.array([False, True]))
    assert outage(g)["SCH"] == 0.0


def test_thresholds_require_ce_below_normal():
    with pytest.raises(ValueError):
        ChannelThresholds(required_sinr_ce={"SCH": -5.0, "PBCH": -14.2, "SystemInformation": -14.2})


@settings(max_examples=100, deadline=None)
@given(arrays(float, st.integers(1, 50), elements=st.floats(-30, 30)), st.floats(-20, 0), st.floats(0, 5))
def test_outage_ordering(values, thr, gap):
    th = ChannelThresholds()
    with_ce, without = outage(values, th, True), outage(values, th, False)
    assert all(with_ce[ch] <= without[ch] for ch in CHANNELS)
    lo = ChannelThresholds({ch: thr for ch in CHANNELS}, {ch: thr - gap - 1 for ch in CHANNELS})
    hi = ChannelThresholds({ch: thr + gap for ch in CHANNELS}, {ch: thr - 1 for ch in CHANNELS})
    assert all(outage(values, lo)[ch] <= outage(values, hi)[ch] for ch in CHANNELS)


def test_outage_table_layout():
    t = outage_table({"UMa-AV": np.array([-8.0, 0.0])})
    assert set(t["UMa-AV"]) == {"w/o CE", "w/ CE"}
    assert t["UMa-AV"]["w/o CE"]["SCH"] == 0.5


def test_dl_drop_and_campaign():
    cfg = ScenarioConfig(case="case5", num_tiers=1, seed=2)
    d = simulate_dl_drop(cfg, 7)
    assert len(d) == 21 * 15 and np.all(d.sinr <= d.snr)
    r = run_dl_campaign(cfg, 2)
    assert len(r.samples("aerial")) == 2 * 21 * 5
    assert len(r.samples("all")) == 2 * 21 * 15
    with pytest.raises(ValueError):
        run_dl_campaign(cfg, 0)
    with pytest.raises(ValueError):
        run_dl_campaign(ScenarioConfig(terrestrial_per_cell=0, aerial_per_cell=0, num_tiers=0), 1)


def test_noise_power():
    assert DlConfig().noise_power(50) == pytest.approx(-174 + 9 + 10 * math.log10(50 * 180e3))
