import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from uavsim.deployment import ScenarioConfig, UePopulation, build_network, drop_ues
from uavsim.propagation import (
    FREE_SPACE_INTERCEPT, SCENARIO_PROPAGATION, AntennaPattern, ShadowingStd,
    antenna_gain, build_coupling_matrix, log_distance_pathloss, los_probability, pathloss,
    scenario_params)
from dataclasses import replace

SCENARIOS = list(SCENARIO_PROPAGATION)


@pytest.mark.parametrize("scenario", SCENARIOS)
def test_los_certain_above_height_threshold(scenario):
    thr = scenario_params(scenario).los_height_threshold
    d = np.array([10.0, 500.0, 5000.0])
    assert np.all(los_probability(d, np.full(3, thr + 1.0), scenario) == 1.0)
    assert los_probability(0.0, 1.5, scenario) == 1.0


def test_los_probability_uma_threshold_is_100m():
    assert scenario_params("UMa-AV").los_height_threshold == 100.0
    assert los_probability(2000.0, 100.0, "UMa-AV") == 1.0
    assert los_probability(2000.0, 99.0, "UMa-AV") < 1.0


def test_los_probability_monotone_example():
    assert los_probability(500.0, 1.5) <= los_probability(500.0, 100.0)


def test_los_probability_errors():
    with pytest.raises(ValueError):
        los_probability(10.0, 1.5, "Indoor")
    with pytest.raises(ValueError):
        los_probability(-1.0, 1.5)


@settings(max_examples=300, deadline=None)
@given(d=st.floats(0, 1e4), h1=st.floats(0, 400), h2=st.floats(0, 400),
       scenario=st.sampled_from(SCENARIOS))
def test_los_probability_monotone_in_altitude(d, h1, h2, scenario):
    lo, hi = sorted((h1, h2))
    p_lo, p_hi = los_probability(d, lo, scenario), los_probability(d, hi, scenario)
    assert 0.0 <= p_lo <= p_hi <= 1.0


def test_free_space_reference():
    # independent Friis evaluation: 20 log10(4 pi d f / c)
    friis = 20 * math.log10(4 * math.pi * 1000.0 * 2e9 / 299_792_458.0)
    pl = log_distance_pathloss(1000.0, 2.0, FREE_SPACE_INTERCEPT, 2e9)
    assert pl == pytest.approx(friis, abs=1e-9)
    assert pl == pytest.approx(98.5, abs=0.1)


@pytest.mark.parametrize("n", [2.0, 2.2, 3.5])
def test_doubling_distance_adds_10n_log2(n):
    a = log_distance_pathloss(300.0, n, -150.0, 2e9)
    b = log_distance_pathloss(600.0, n, -150.0, 2e9)
    assert b - a == pytest.approx(10 * n * math.log10(2), abs=1e-9)


def test_doubling_distance_full_model_los():
    p = scenario_params("UMa-AV")
    a = pathloss(400.0, 1.5, True, "UMa-AV")
    b = pathloss(800.0, 1.5, True, "UMa-AV")
    assert b - a == pytest.approx(10 * p.ground.los_exponent * math.log10(2), abs=1e-9)


def test_zero_distance_rejected():
    with pytest.raises(ValueError):
        pathloss(0.0, 1.5, True)


@settings(max_examples=300, deadline=None)
@given(d=st.floats(10, 5e3), dd=st.floats(0.01, 1e3), h=st.floats(1.5, 300),
       los=st.booleans(), scenario=st.sampled_from(SCENARIOS))
def test_pathloss_ordering_and_monotonicity(d, dd, h, los, scenario):
    pl_los = pathloss(d, h, True, scenario)
    pl_nlos = pathloss(d, h, False, scenario)
    assert pl_los <= pl_nlos
    assert pathloss(d + dd, h, los, scenario) > pathloss(d, h, los, scenario)
    assert pathloss(d, h, los, scenario) > 0


def test_antenna_boresight_and_3db_points():
    p = AntennaPattern()
    assert antenna_gain(p, 0.0, 0.0) == p.max_gain
    assert antenna_gain(p, p.horizontal_3db_beamwidth / 2, 0.0) == pytest.approx(p.max_gain - 3, abs=0.01)
    assert antenna_gain(p, 0.0, p.vertical_3db_beamwidth / 2) == pytest.approx(p.max_gain - 3, abs=0.01)
    assert antenna_gain(p, 180.0, 0.0) == pytest.approx(p.max_gain - p.front_to_back_ratio)


def test_antenna_side_lobe_cap_in_elevation():
    p = AntennaPattern()
    assert antenna_gain(p, 0.0, -80.0) == pytest.approx(p.max_gain - p.side_lobe_floor)


@settings(max_examples=300, deadline=None)
@given(az=st.floats(-720, 720), el=st.floats(-180, 180))
def test_antenna_gain_bounds(az, el):
    p = AntennaPattern()
    g = antenna_gain(p, az, el)
    assert p.max_gain - p.front_to_back_ratio - 1e-12 <= g <= p.max_gain


@pytest.fixture(scope="module")
def uma_drop():
    cfg = ScenarioConfig()
    layout = build_network(cfg)
    pop = drop_ues(layout, cfg, 4)
    return cfg, layout, pop


def test_coupling_matrix_size(uma_drop):
    _, layout, pop = uma_drop
    cm = build_coupling_matrix(layout, pop, 4)
    assert cm.shape == (855, 57)
    assert cm.pathloss.size == 48_735


def test_coupling_matrix_finite_and_decomposes(uma_drop):
    _, layout, pop = uma_drop
    cm = build_coupling_matrix(layout, pop, 4)
    for arr in (cm.pathloss, cm.shadowing, cm.antenna_gain, cm.coupling_gain):
        assert np.all(np.isfinite(arr))
    assert np.all(cm.pathloss > 0)
    assert np.array_equal(cm.coupling_gain, cm.antenna_gain - cm.pathloss - cm.shadowing)
    link = cm.link(3, 7)
    assert link.coupling_gain == pytest.approx(link.antenna_gain - link.pathloss - link.shadowing)


def test_zero_shadowing_gives_gain_minus_pathloss(uma_drop):
    _, layout, pop = uma_drop
    params = replace(scenario_params("UMa-AV"), shadowing=ShadowingStd(0, 0, 0, 0))
    cm = build_coupling_matrix(layout, pop, 4, params)
    assert np.array_equal(cm.coupling_gain, cm.antenna_gain - cm.pathloss)


def test_coupling_matrix_deterministic(uma_drop):
    _, layout, pop = uma_drop
    assert build_coupling_matrix(layout, pop, 11) == build_coupling_matrix(layout, pop, 11)
    assert build_coupling_matrix(layout, pop, 11) != build_coupling_matrix(layout, pop, 12)


def test_wraparound_uses_nearest_image():
    cfg = ScenarioConfig()
    layout = build_network(cfg)
    # a UE near the outer edge is closer to some image than to the raw site position
    pop = UePopulation.from_arrays([[2.4 * cfg.inter_site_distance, 0.0, 1.5]])
    cm = build_coupling_matrix(layout, pop, 0)
    raw = np.hypot(*(layout.cell_xy - pop.position[0, :2]).T)
    assert np.all(cm.distance_2d[0] <= raw + 1e-9)
    assert cm.distance_2d[0].max() < 2.7 * cfg.inter_site_distance


def test_uav_sees_more_strong_cells_than_ground_ue():
    """Above the LOS-certainty height a UAV has at least as many cells within 10 dB."""
    cfg = ScenarioConfig()
    layout = build_network(cfg)
    uav_counts, ground_counts = [], []
    for seed in range(20):
        pop = drop_ues(layout, cfg, seed)
        xy = pop.position[:, :2]
        n = len(xy)
        both = UePopulation.from_arrays(
            np.vstack([np.column_stack([xy, np.full(n, 1.5)]),
                       np.column_stack([xy, np.full(n, 150.0)])]),
            is_aerial=np.r_[np.zeros(n, bool), np.ones(n, bool)])
        cg = build_coupling_matrix(layout, both, seed).coupling_gain
        within = (cg >= cg.max(axis=1, keepdims=True) - 10.0).sum(axis=1)
        ground_counts.append(within[:n].mean())
        uav_counts.append(within[n:].mean())
    assert np.mean(uav_counts) >= np.mean(ground_counts)
