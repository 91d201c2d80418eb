import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stormpath.optimize import compare_means, refine_minimum
from stormpath.precip import SimConfig


def test_compare_means_examples():
    c = compare_means([1, 1, 1], [5, 5, 5])
    assert c.lower == "a" and c.significant
    c = compare_means([3, 3], [3, 3])
    assert c.lower == "tie" and not c.significant
    c = compare_means([2, 4], [3, 5])
    assert c.lower == "a" and not c.significant
    assert c.delta == 1.0 and c.pooled_std == 1.0


def test_compare_means_b_lower():
    assert compare_means([9, 10], [1, 2]).lower == "b"


def test_compare_means_undersized():
    with pytest.raises(ValueError):
        compare_means([1], [1, 2])


def test_zero_drops_flat_objective():
    r = refine_minimum(SimConfig(drop_count=0), 0.005, 0.05, levels=2, repeats=2)
    assert r.best_mean_hits == 0.0 and not r.significant


def test_quadratic_objective():
    target = 0.007
    r = refine_minimum(SimConfig(), 0.001, 0.02, levels=6, repeats=3,
                       objective=lambda s, k: (s - target) ** 2)
    final_step = (r.bracket[1] - r.bracket[0]) / 4
    assert abs(r.best_speed - target) <= final_step
    assert r.bracket[0] <= r.best_speed <= r.bracket[1]
    assert r.evaluations == 3 * len({p for level in r.levels for p, _ in level})


@settings(max_examples=50, deadline=None)
@given(st.floats(0.001, 0.5), st.floats(0.01, 0.5), st.floats(0.0, 1.0), st.integers(1, 7))
def test_bracket_containment_and_convex_accuracy(lo, width, where, levels):
    hi = lo + width
    target = lo + where * width
    r = refine_minimum(SimConfig(), lo, hi, levels=levels, repeats=2,
                       objective=lambda s, k: abs(s - target))
    parent = (lo, hi)
    for level in r.levels:
        speeds = [p for p, _ in level]
        assert parent[0] - 1e-15 <= min(speeds) and max(speeds) <= parent[1] + 1e-15
        parent = (min(speeds), max(speeds))
    assert abs(r.best_speed - target) <= (r.bracket[1] - r.bracket[0]) / 4 + 1e-12


def test_deterministic():
    cfg = SimConfig(drop_count=100, wind_speed=0.01)
    a = refine_minimum(cfg, 0.004, 0.03, levels=2, repeats=2, master_seed=3)
    b = refine_minimum(cfg, 0.004, 0.03, levels=2, repeats=2, master_seed=3)
    assert a == b


@pytest.mark.parametrize("lo, hi, levels", [(0.0, 0.1, 1), (0.2, 0.1, 1), (0.1, 0.2, 0)])
def test_invalid_arguments(lo, hi, levels):
    with pytest.raises(ValueError):
        refine_minimum(SimConfig(), lo, hi, levels=levels)
