import math

import numpy as np
import pytest

from uavsim.deployment import ScenarioConfig, UePopulation, build_network, drop_ues


@pytest.fixture(scope="module")
def uma():
    cfg = ScenarioConfig()
    return cfg, build_network(cfg)


def test_default_layout_has_57_cells_at_46_dbm(uma):
    _, layout = uma
    assert layout.num_sites == 19
    assert layout.num_cells == 57
    assert np.all(layout.tx_power == 46.0)


def test_single_site_has_three_sectors_120_degrees_apart():
    layout = build_network(ScenarioConfig(num_tiers=0))
    assert layout.num_cells == 3
    az = np.sort(layout.cell_azimuth)
    assert np.allclose(np.diff(az), 120.0)


def test_build_is_deterministic():
    cfg = ScenarioConfig(scenario="RMa-AV")
    assert build_network(cfg) == build_network(cfg)


def test_site_grid_geometry(uma):
    cfg, layout = uma
    xy = layout.site_xy
    d = np.hypot(*(xy[:, None, :] - xy[None, :, :]).transpose(2, 0, 1))
    d[np.diag_indices_from(d)] = np.inf
    assert np.allclose(d.min(axis=1), cfg.inter_site_distance)
    assert np.allclose(xy[0], 0.0)
    # six wrap translations of length ISD * sqrt(19)
    shifts = np.hypot(*layout.wrap_offsets[1:].T)
    assert np.allclose(shifts, cfg.inter_site_distance * math.sqrt(19))


@pytest.mark.parametrize("bad", [
    dict(scenario="Dense-AV"),
    dict(inter_site_distance=0.0),
    dict(inter_site_distance=-10.0),
    dict(case="case5", aerial_per_cell=3),
    dict(case="case1", aerial_per_cell=5),
    dict(target_ru=0.0),
    dict(aerial_altitude_range=(100.0, 50.0)),
])
def test_invalid_config_rejected(bad):
    with pytest.raises(ValueError):
        ScenarioConfig(**bad)


def test_case_counts():
    assert (ScenarioConfig(case="case5").terrestrial_per_cell,
            ScenarioConfig(case="case5").aerial_per_cell) == (10, 5)
    assert ScenarioConfig(case="case1").aerial_per_cell == 0
    assert ScenarioConfig(case="custom", terrestrial_per_cell=2, aerial_per_cell=7).ues_per_cell == 9


def test_case5_drop_counts(uma):
    cfg, layout = uma
    pop = drop_ues(layout, cfg, seed=3)
    assert len(pop) == 855
    assert pop.is_aerial.sum() == 285
    counts = np.bincount(pop.drop_cell, minlength=57)
    assert np.all(counts == 15)
    assert np.all(np.bincount(pop.drop_cell[pop.is_aerial], minlength=57) == 5)


def test_case1_drop_counts():
    cfg = ScenarioConfig(case="case1")
    pop = drop_ues(build_network(cfg), cfg, seed=3)
    assert len(pop) == 570
    assert not pop.is_aerial.any()


def test_drop_is_deterministic_per_seed(uma):
    cfg, layout = uma
    assert drop_ues(layout, cfg, 9) == drop_ues(layout, cfg, 9)
    assert drop_ues(layout, cfg, 9) != drop_ues(layout, cfg, 10)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_heights_and_sector_regions(uma, seed):
    cfg, layout = uma
    pop = drop_ues(layout, cfg, seed)
    assert np.all(pop.altitude[~pop.is_aerial] == cfg.ue_height)
    lo, hi = cfg.aerial_altitude_range
    h = pop.altitude[pop.is_aerial]
    assert np.all((h >= lo) & (h <= hi))

    site = layout.site_xy[layout.cell_site[pop.drop_cell]]
    rel = pop.position[:, :2] - site
    dist = np.hypot(rel[:, 0], rel[:, 1])
    assert np.all(dist >= cfg.min_distance)
    assert np.all(dist <= cfg.inter_site_distance / math.sqrt(3) + 1e-9)
    bearing = np.degrees(np.arctan2(rel[:, 1], rel[:, 0]))
    off = (bearing - layout.cell_azimuth[pop.drop_cell] + 180) % 360 - 180
    assert np.all(np.abs(off) <= 60 + 1e-9)


def test_drop_positions_uniform_over_sector():
    # centroid of the rhombic sector lies at R/2 along boresight
    cfg = ScenarioConfig(case="custom", num_tiers=0, terrestrial_per_cell=20000,
                         aerial_per_cell=0, min_distance=0.0)
    layout = build_network(cfg)
    pop = drop_ues(layout, cfg, seed=5)
    radius = cfg.inter_site_distance / math.sqrt(3)
    for c in range(3):
        pts = pop.position[pop.drop_cell == c, :2]
        az = math.radians(layout.cell_azimuth[c])
        expected = radius / 2 * np.array([math.cos(az), math.sin(az)])
        assert np.allclose(pts.mean(axis=0), expected, atol=0.01 * radius)


def test_zero_counts_are_legal():
    cfg = ScenarioConfig(case="custom", terrestrial_per_cell=0, aerial_per_cell=0)
    assert len(drop_ues(build_network(cfg), cfg, 1)) == 0


def test_population_accessors():
    pop = UePopulation.from_arrays([[0, 0, 1.5], [10, 0, 120.0]], is_aerial=[False, True])
    ue = pop[1]
    assert ue.device_class == "aerial" and ue.p_cmax == 23.0 and ue.position[2] == 120.0
