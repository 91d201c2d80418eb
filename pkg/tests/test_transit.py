import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stormpath.collision import detect_bruteforce
from stormpath.precip import (
    Direction,
    SimConfig,
    advance_drops,
    resolve_exits,
    spawn_body,
)
from stormpath.rng import SplitMix64, derive_seed
from stormpath.transit import (
    BACKENDS,
    TransitFinished,
    TransitState,
    max_frames,
    run_transit,
    step_frame,
)

from conftest import make_body, make_field, needs_compiled


def test_step_frame_empty_field_moves_body():
    cfg = SimConfig(drop_count=0, body_speed=0.004)
    state = TransitState.start(cfg, 1)
    x0 = state.body.x.copy()
    assert step_frame(state) == 0
    assert np.array_equal(state.body.x, x0 - 0.004)


def test_step_frame_single_hit_respawns_on_top():
    cfg = SimConfig(drop_count=1, fall_speed=0.01, wind_speed=0.0, body_speed=0.001)
    state = TransitState(cfg, SplitMix64(3), make_body([(0.5, 0.1)]), make_field([(0.5, 0.115)]))
    # After the fall the drop is at y=0.105, 0.005 above the point.
    assert step_frame(state) == 1
    assert state.drops.y[0] == 1.0
    assert 0.0 <= state.drops.x[0] < 1.0


def test_step_frame_detects_before_body_moves():
    cfg = SimConfig(drop_count=1, fall_speed=0.01, wind_speed=0.0, body_speed=0.1)
    # Only the pre-move body position is close enough.
    state = TransitState(cfg, SplitMix64(3), make_body([(0.5, 0.1)]), make_field([(0.5, 0.11)]))
    assert step_frame(state) == 1


def test_step_frame_matches_bruteforce_replay():
    cfg = SimConfig(drop_count=250, wind_speed=0.005, body_speed=0.01)
    state = TransitState.start(cfg, 42)
    for _ in range(30):
        step_frame(state)
    # Body now inside the field; replay the next frame by hand.
    replay = TransitState(cfg, SplitMix64(0), make_body(state.body.points), state.drops.copy())
    replay.rng.seed, replay.rng.counter = state.rng.seed, state.rng.counter
    advance_drops(replay.drops, cfg)
    resolve_exits(replay.drops, replay.rng, cfg)
    expected = len(detect_bruteforce(replay.body, replay.drops, cfg.collision_radius))
    assert step_frame(state) == expected


def test_step_after_termination_raises():
    cfg = SimConfig(drop_count=0, body_speed=0.5)
    state = TransitState.start(cfg, 1)
    while not state.finished:
        step_frame(state)
    with pytest.raises(TransitFinished):
        step_frame(state)


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("seed", [0, 1, 2, 12345, 2**64 - 1])
def test_frame_count_closed_form(seed, backend):
    cfg = SimConfig(drop_count=0, body_speed=0.01)
    result = run_transit(cfg, seed, backend=backend)
    mean0 = spawn_body(SplitMix64(seed), cfg).mean_x()
    assert result.total_hits == 0
    assert result.frame_count == math.floor(mean0 / 0.01) + 1 == 102


def test_run_is_deterministic():
    cfg = SimConfig(drop_count=250, wind_speed=0.001, body_speed=0.003)
    assert run_transit(cfg, 99) == run_transit(cfg, 99)
    assert run_transit(cfg, 99) != run_transit(cfg, 100)


def test_run_validates_config():
    with pytest.raises(ValueError) as info:
        run_transit(SimConfig(angle_spread_deg=95, fall_speed=3.0), 1)
    assert "angle_spread_deg" in str(info.value) and "fall_speed" in str(info.value)


def test_run_rejects_unknown_detector():
    with pytest.raises(ValueError):
        run_transit(SimConfig(), 1, detector="octree")


def test_result_invariants():
    r = run_transit(SimConfig(drop_count=500, wind_speed=0.005, body_speed=0.004), 5)
    assert r.total_hits == sum(r.hits_per_frame)
    assert r.frame_count == len(r.hits_per_frame) == len(r.mean_body_x)
    assert all(h >= 0 for h in r.hits_per_frame)
    assert all(m >= 0 for m in r.mean_body_x)


def test_frame_dump(tmp_path):
    path = tmp_path / "frames.csv"
    r = run_transit(SimConfig(body_speed=0.05), 8, frame_dump=path)
    lines = path.read_text().splitlines()
    assert lines[0] == "frame,mean_body_x,hits"
    assert len(lines) == r.frame_count + 1
    frame, mx, hits = lines[1].split(",")
    assert (int(frame), float(mx), int(hits)) == (0, r.mean_body_x[0], r.hits_per_frame[0])


def test_faster_is_drier_fig1a_regime():
    cfg = SimConfig(drop_count=250, wind_speed=0.001, direction=Direction.WITH_WIND)
    slow = [run_transit(cfg.replace(body_speed=0.001), derive_seed(0xD1CE, 1, k)).total_hits
            for k in range(1, 11)]
    fast = [run_transit(cfg.replace(body_speed=0.01), derive_seed(0xD1CE, 10, k)).total_hits
            for k in range(1, 11)]
    assert np.mean(fast) < np.mean(slow)


# -- properties -------------------------------------------------------------

run_cfgs = st.builds(
    SimConfig,
    drop_count=st.integers(0, 400),
    angle_spread_deg=st.sampled_from([0.0, 10.0, 45.0, 80.0]),
    fall_speed=st.floats(0.002, 0.05),
    wind_speed=st.floats(0.0, 0.05),
    direction=st.sampled_from(list(Direction)),
    body_speed=st.floats(0.01, 0.2),
    collision_radius=st.sampled_from([0.005, 0.01, 0.02]),
)


@settings(max_examples=30, deadline=None)
@given(run_cfgs, st.integers(0, 2**64 - 1))
def test_frame_bound_and_zero_field(cfg, seed):
    r = run_transit(cfg, seed)
    assert r.frame_count <= math.ceil((1 + cfg.body_width) / cfg.body_speed) + 2
    assert r.frame_count <= max_frames(cfg)
    if cfg.drop_count == 0:
        assert r.total_hits == 0


@settings(max_examples=15, deadline=None)
@given(run_cfgs, st.integers(0, 2**64 - 1))
def test_drop_count_conserved(cfg, seed):
    state = TransitState.start(cfg, seed)
    while not state.finished:
        step_frame(state)
        assert len(state.drops) == cfg.drop_count
        assert len(state.drops.angles_rad) == cfg.drop_count


@settings(max_examples=15, deadline=None)
@given(run_cfgs, st.integers(0, 2**64 - 1))
def test_grid_and_brute_runs_agree(cfg, seed):
    assert run_transit(cfg, seed, "grid", "python") == run_transit(cfg, seed, "brute", "python")


@needs_compiled
@settings(max_examples=40, deadline=None)
@given(run_cfgs, st.integers(0, 2**64 - 1), st.sampled_from(["grid", "brute"]))
def test_compiled_matches_python(cfg, seed, detector):
    assert run_transit(cfg, seed, detector, "compiled") == run_transit(cfg, seed, detector, "python")


@needs_compiled
@pytest.mark.parametrize("drops", [250, 1000])
def test_compiled_matches_python_long_run(drops):
    cfg = SimConfig(drop_count=drops, angle_spread_deg=45.0, wind_speed=0.003,
                    direction=Direction.AGAINST_WIND, body_speed=0.002)
    assert run_transit(cfg, 7, backend="compiled") == run_transit(cfg, 7, backend="python")


def test_speed_monotone_against_wind_statistically():
    cfg = SimConfig(drop_count=250, wind_speed=0.005, direction=Direction.AGAINST_WIND)
    speeds = [0.0025, 0.005, 0.01, 0.02, 0.04]
    stats = []
    for j, s in enumerate(speeds, start=1):
        totals = [run_transit(cfg.replace(body_speed=s), derive_seed(11, j, k)).total_hits
                  for k in range(1, 11)]
        stats.append((np.mean(totals), np.std(totals)))
    for (m0, s0), (m1, s1) in zip(stats, stats[1:]):
        pooled = math.sqrt((s0**2 + s1**2) / 2)
        assert m1 <= m0 + pooled
