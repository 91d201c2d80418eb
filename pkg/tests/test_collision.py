import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stormpath.collision import build_grid, detect, detect_bruteforce, detect_grid
from stormpath.precip import SimConfig, spawn_body, spawn_field
from stormpath.rng import SplitMix64

from conftest import make_body, make_field


def _hits_by_definition(body, drops, radius):
    # Oracle for the oracle: per-pair Python loop.
    out = []
    for i, (dx, dy) in enumerate(zip(drops.x.tolist(), drops.y.tolist())):
        for bx, by in zip(body.x.tolist(), body.y.tolist()):
            if (dx - bx) ** 2 + (dy - by) ** 2 <= radius * radius:
                out.append(i)
                break
    return out


def test_bruteforce_direct_hit():
    body = make_body([(0.5, 0.1)])
    assert detect_bruteforce(body, make_field([(0.505, 0.1)]), 0.01).tolist() == [0]


def test_bruteforce_boundary_is_inclusive():
    # 0.5 and 0.25 are exact in binary, so the distance is exactly 0.25.
    body = make_body([(0.5, 0.5)])
    drops = make_field([(0.75, 0.5), (0.5, 0.25), (0.75, 0.75)])
    assert detect_bruteforce(body, drops, 0.25).tolist() == [0, 1]
    assert detect_grid(body, build_grid(drops, 0.25), drops, 0.25).tolist() == [0, 1]


def test_bruteforce_miss():
    body = make_body([(0.5, 0.1), (0.505, 0.1)])
    assert detect_bruteforce(body, make_field([(0.52, 0.1)]), 0.01).tolist() == []


def test_build_grid_single_drop():
    grid = build_grid(make_field([(0.5, 0.5)]), 0.01)
    assert grid.buckets == {(50, 50): [0]}


def test_build_grid_empty():
    assert build_grid(make_field(np.empty((0, 2))), 0.01).buckets == {}


def test_build_grid_partitions_drops():
    drops = spawn_field(SplitMix64(9), SimConfig(drop_count=1000))
    buckets = build_grid(drops, 0.01).buckets
    assert sum(len(v) for v in buckets.values()) == 1000
    assert sorted(i for v in buckets.values() for i in v) == list(range(1000))
    for (cx, cy), members in buckets.items():
        for i in members:
            assert (int(np.floor(drops.x[i] / 0.01)), int(np.floor(drops.y[i] / 0.01))) == (cx, cy)


def test_detect_grid_empty_field():
    body = make_body([(0.5, 0.5)])
    drops = make_field(np.empty((0, 2)))
    assert detect_grid(body, build_grid(drops, 0.01), drops, 0.01).tolist() == []


def test_detect_grid_rejects_stale_grid():
    body = make_body([(0.5, 0.5)])
    grid = build_grid(make_field([(0.5, 0.5)]), 0.01)
    with pytest.raises(ValueError, match="stale"):
        detect_grid(body, grid, make_field([(0.5, 0.5), (0.1, 0.1)]), 0.01)


@pytest.mark.parametrize("cell", [0.01, 0.005, 0.02, 0.0125])
def test_drop_on_cell_boundary_at_radius(cell):
    # Drop sits exactly on a cell edge, exactly one radius from the point.
    radius = 0.015625  # 2**-6
    body = make_body([(0.5 - radius, 0.25)])
    drops = make_field([(0.5, 0.25), (0.25, 0.5 + radius)])
    body2 = make_body([(0.25, 0.5)])
    for b in (body, body2):
        expected = detect_bruteforce(b, drops, radius)
        assert len(expected) == 1
        got = detect_grid(b, build_grid(drops, cell), drops, radius)
        assert got.tolist() == expected.tolist()


def test_oracle_equivalence_thousand_frames():
    rng = np.random.default_rng(20240601)
    discrepancies = 0
    for frame in range(1000):
        n = int(rng.integers(1, 1001))
        radius = float(rng.choice([0.005, 0.01, 0.02]))
        seed = int(rng.integers(0, 2**63))
        g = SplitMix64(seed)
        cfg = SimConfig(drop_count=n)
        body = spawn_body(g, cfg)
        # Park the body anywhere along its path, partly off the field.
        body.x -= float(rng.uniform(0.0, 1.1))
        drops = spawn_field(g, cfg)
        brute = detect_bruteforce(body, drops, radius)
        grid = detect_grid(body, build_grid(drops, radius), drops, radius)
        discrepancies += not np.array_equal(brute, grid)
    assert discrepancies == 0


def test_bruteforce_matches_loop_definition():
    g = SplitMix64(77)
    cfg = SimConfig(drop_count=400, body_points=30)
    body = spawn_body(g, cfg)
    body.x -= 0.5
    drops = spawn_field(g, cfg)
    assert detect_bruteforce(body, drops, 0.02).tolist() == _hits_by_definition(body, drops, 0.02)


def test_drop_counted_once():
    body = make_body([(0.5, 0.5), (0.501, 0.5), (0.5, 0.501)])
    drops = make_field([(0.5005, 0.5005)])
    assert detect(body, drops, 0.01).tolist() == [0]
    assert detect(body, drops, 0.01, "brute").tolist() == [0]


def test_unknown_detector():
    with pytest.raises(ValueError):
        detect(make_body([(0, 0)]), make_field([(0, 0)]), 0.01, "kd")


frames = st.tuples(st.integers(0, 2**63), st.integers(1, 400), st.floats(0.0, 1.05))


def _frame(seed, n, offset):
    g = SplitMix64(seed)
    cfg = SimConfig(drop_count=n)
    body = spawn_body(g, cfg)
    body.x -= offset
    return body, spawn_field(g, cfg)


@settings(max_examples=60, deadline=None)
@given(frames, st.floats(0.001, 0.05), st.floats(0.001, 0.05))
def test_radius_monotonicity(frame, r1, r2):
    body, drops = _frame(*frame)
    lo, hi = sorted((r1, r2))
    small = set(detect(body, drops, lo).tolist())
    large = set(detect(body, drops, hi).tolist())
    assert small <= large


@settings(max_examples=60, deadline=None)
@given(
    st.integers(0, 2**63),
    st.integers(-(2**18), 2**18),
    st.integers(-(2**18), 2**18),
)
def test_translation_invariance(seed, sx, sy):
    # Dyadic coordinates keep every translation exact in floating point.
    rng = np.random.default_rng(seed)
    q = 2.0**-20
    bpts = rng.integers(0, 2**20, size=(50, 2)) * q
    dpts = rng.integers(0, 2**20, size=(500, 2)) * q
    radius = 0.03
    base = detect(make_body(bpts), make_field(dpts), radius)
    shift = np.array([sx * q, sy * q])
    moved = detect(make_body(bpts + shift), make_field(dpts + shift), radius)
    assert base.tolist() == moved.tolist()


@settings(max_examples=60, deadline=None)
@given(frames, st.sampled_from([0.005, 0.01, 0.02, 0.013]), st.floats(0.3, 3.0))
def test_grid_equals_bruteforce_any_cell(frame, radius, cell_scale):
    body, drops = _frame(*frame)
    expected = detect_bruteforce(body, drops, radius)
    got = detect_grid(body, build_grid(drops, radius * cell_scale), drops, radius)
    assert got.tolist() == expected.tolist()
