import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from uavsim.association import ServingAssignment, associate, pathloss_ratio, rsrp, rsrp_ratio


def test_rsrp_examples():
    assert rsrp(46.0, -120.0) == -74.0
    assert rsrp(0.0, 0.0) == 0.0
    cg = np.array([-100.0, -90.0, -95.0])
    assert np.array_equal(np.argsort(rsrp(46.0, cg)), np.argsort(cg))


def test_single_cell_serves_everyone():
    assoc = associate(np.array([[-100.0], [-80.0], [-120.0]]))
    assert np.all(assoc.serving == 0)
    assert all(a.ranked_neighbors == [] for a in assoc)


def test_tie_goes_to_lower_cell_index():
    assoc = associate(np.array([[-90.0, -80.0, -80.0, -85.0]]))
    assert assoc[0].serving_cell == 1
    assert [c for c, _, _ in assoc[0].ranked_neighbors] == [2, 3, 0]


def test_random_five_cell_matches_argmax_oracle():
    rng = np.random.default_rng(17)
    cg = np.round(rng.uniform(-130, -70, size=(200, 5)), 1)   # rounding forces ties
    tx = rng.choice([40.0, 43.0, 46.0], size=5)
    assoc = associate(cg, tx)
    for u in range(len(cg)):
        best, best_val = None, -np.inf
        for c in range(5):
            val = tx[c] + cg[u, c]
            if val > best_val:
                best, best_val = c, val
        assert assoc.serving[u] == best
        assert assoc[u].serving_rsrp == best_val


def _assignment(serving_pl, neighbor_pls, tx=46.0):
    return ServingAssignment(0, 0, tx - serving_pl, serving_pl,
                             [(i + 1, tx - p, p) for i, p in enumerate(neighbor_pls)])


def test_pathloss_ratio_examples():
    a = _assignment(90.0, [91.0, 92.0, 93.0])
    assert pathloss_ratio(a, 3) == 3.0
    assert pathloss_ratio(_assignment(90.0, [90.0]), 1) == 0.0
    assert rsrp_ratio(a, 3) == 3.0


def test_pathloss_ratio_out_of_range():
    a = _assignment(90.0, [91.0, 92.0])
    with pytest.raises(IndexError):
        pathloss_ratio(a, 3)
    with pytest.raises(IndexError):
        pathloss_ratio(a, 0)


def test_random_ten_cell_matches_sort_oracle():
    rng = np.random.default_rng(5)
    cg = rng.uniform(-140, -60, size=(100, 10))
    assoc = associate(cg, 46.0)
    for u in range(len(cg)):
        pls = sorted(-cg[u])                       # ascending loss = descending RSRP
        for n in range(1, 10):
            assert pathloss_ratio(assoc[u], n) == pytest.approx(pls[n] - pls[0], abs=1e-12)
            assert assoc.pathloss_ratios(n)[u] == pytest.approx(pls[n] - pls[0], abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(cg=arrays(float, (6, 8), elements=st.floats(-150, -50)), shift=st.floats(-30, 30))
def test_association_shift_invariant_and_ratios_sorted(cg, shift):
    a = associate(cg, 46.0)
    b = associate(cg + shift, 46.0)
    assert np.array_equal(a.serving, b.serving)
    ratios = np.column_stack([a.pathloss_ratios(n) for n in range(1, 8)])
    assert np.all(ratios >= 0)
    assert np.all(np.diff(ratios, axis=1) >= 0)


def test_associate_accepts_layout():
    from uavsim.deployment import ScenarioConfig, build_network
    layout = build_network(ScenarioConfig(num_tiers=0))
    assoc = associate(np.array([[-100.0, -90.0, -95.0]]), layout)
    assert assoc.serving[0] == 1 and assoc.serving_rsrp[0] == -44.0
