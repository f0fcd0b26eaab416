# test_avoid_harness.py
import json
from dataclasses import replace

import numpy as np
import pandas as pd
import pytest

from avoid_errors import ConfigError, UnknownCase, UnknownModel
from avoid_harness import (
    AVOID_LEFT,
    FIVE_STAGE,
    PASSAGE_MARGIN,
    RETURN_RIGHT,
    STRAIGHT,
    VEHICLE_WIDTH,
    Scenario,
    SimulationLog,
    TickRecord,
    builtin_scenario,
    classify_phases,
    compute_metrics,
    load_scenario,
    matches_five_stage,
    phase_column,
    phase_sequence,
    read_log,
    run,
    scenario_from_dict,
    scenario_to_dict,
    sweep,
    time_replan_cycle,
    write_artifacts,
)
from avoid_path import build_path, cartesian_to_frenet
from avoid_perception import Obstacle
from avoid_vehicle import VehicleState

# ── Helpers ──────────────────────────────────────────────────

TICK = 0.02


def _series(*pieces):
    """pieces: (duration s, steering rad) → steering pd.Series on a 50 Hz clock."""
    values = np.concatenate([np.full(int(round(d / TICK)), v) for d, v in pieces])
    return pd.Series(values, index=np.arange(len(values)) * TICK)


def _scenario(obstacles=(), route=((0.0, 0.0), (20.0, 0.0)), **kw):
    base = dict(route=route, obstacles=tuple(obstacles), initial_state=VehicleState(0.0, 0.0, 0.0, 2.0),
                desired_speed=2.0, duration=15.0, depth_model="ideal", name="unit")
    base.update(kw)
    return Scenario(**base)


def _straight_log(scenario, ys=None, n=50):
    ys = np.zeros(n) if ys is None else ys
    log = SimulationLog(scenario=scenario, tick=TICK)
    for i, y in enumerate(ys):
        log.records.append(TickRecord(i * TICK, VehicleState(0.2 * i, float(y), 0.0, 2.0), 0.0, None, ()))
    return log


# ── scenarios ────────────────────────────────────────────────

def test_builtin_cases():
    assert len(builtin_scenario(1).obstacles) == 1
    assert len(builtin_scenario(2).obstacles) == 2
    sc = builtin_scenario(3)
    assert sc.desired_speed == 2.78 and sc.duration == 40.0 and sc.depth_model == "dav2"
    with pytest.raises(UnknownCase):
        builtin_scenario(4)
    with pytest.raises(UnknownCase):
        builtin_scenario("x")


def test_case_two_alternates_sides():
    a, b = builtin_scenario(2).obstacles
    assert b.center[0] - a.center[0] == pytest.approx(15.0)
    assert a.center[1] * b.center[1] < 0


def test_case_three_passage_fits_the_vehicle():
    sc = builtin_scenario(3)
    assert len(sc.obstacles) == 2
    top, bottom = sorted(sc.obstacles, key=lambda o: -o.center[1])
    assert top.center[0] == bottom.center[0]
    gap = (top.center[1] - top.radius) - (bottom.center[1] + bottom.radius)
    assert gap == pytest.approx(2.8)
    assert gap - VEHICLE_WIDTH >= 2 * PASSAGE_MARGIN


def test_case_three_gap_is_centred_on_the_route():
    sc = builtin_scenario(3)
    top, bottom = sc.obstacles
    middle = (top.center[0], (top.center[1] + bottom.center[1]) / 2.0)
    fs = cartesian_to_frenet(build_path(sc.route), middle)
    assert fs.d == pytest.approx(0.0, abs=1e-3)
    ys = [y for _, y in sc.route]
    assert (ys[0], max(ys), ys[-1]) == pytest.approx((0.0, 2.0, 0.0))


def test_overrides():
    sc = builtin_scenario(1).with_overrides("mono2", 7)
    assert (sc.depth_model, sc.seed) == ("mono2", 7)
    assert builtin_scenario(1).with_overrides() == builtin_scenario(1)
    with pytest.raises(UnknownModel):
        builtin_scenario(1).with_overrides("zoedepth")


def test_scenario_dict_round_trip(tmp_path):
    sc = builtin_scenario(3)
    path = tmp_path / "case3.json"
    path.write_text(json.dumps(scenario_to_dict(sc)))
    assert load_scenario(path) == sc


def test_scenario_validation():
    doc = scenario_to_dict(builtin_scenario(1))
    del doc["duration"]
    with pytest.raises(ConfigError, match="duration"):
        scenario_from_dict(doc)
    with pytest.raises(ConfigError):
        load_scenario("does/not/exist.json")
    with pytest.raises(ConfigError):
        _scenario(duration=0.0)


# ── phases ───────────────────────────────────────────────────

def test_zero_steering_is_one_straight_phase():
    segs = classify_phases(_series((5.0, 0.0)))
    assert [s.label for s in segs] == [STRAIGHT]


def test_five_stage_pattern():
    steer = _series((2.0, 0.0), (1.0, 0.2), (2.0, 0.0), (1.0, -0.2), (2.0, 0.0))
    segs = classify_phases(steer)
    assert phase_sequence(segs) == FIVE_STAGE
    assert matches_five_stage(phase_sequence(segs))
    assert segs[1].start == pytest.approx(2.0)


def test_counter_steer_stays_in_the_same_band():
    steer = _series((2.0, 0.0), (1.0, 0.2), (0.6, -0.1), (2.0, 0.0), (1.0, -0.2), (0.6, 0.1), (2.0, 0.0))
    assert phase_sequence(classify_phases(steer)) == FIVE_STAGE


def test_short_pulse_is_absorbed():
    steer = _series((2.0, 0.0), (0.1, 0.3), (2.0, 0.0))
    assert phase_sequence(classify_phases(steer)) == [STRAIGHT]


def test_short_pause_does_not_split_a_maneuver():
    steer = _series((2.0, 0.0), (1.0, 0.2), (0.2, 0.0), (1.0, 0.2), (2.0, 0.0))
    assert phase_sequence(classify_phases(steer)) == [STRAIGHT, AVOID_LEFT, STRAIGHT]


def test_counter_steer_pause_does_not_split_a_maneuver():
    steer = _series((2.0, 0.0), (1.0, 0.2), (0.6, 0.0), (1.0, -0.1), (2.0, 0.0))
    assert phase_sequence(classify_phases(steer)) == [STRAIGHT, AVOID_LEFT, STRAIGHT]


def test_long_pause_before_a_counter_steer_splits():
    steer = _series((2.0, 0.0), (1.0, 0.2), (1.0, 0.0), (1.0, -0.2), (2.0, 0.0))
    assert phase_sequence(classify_phases(steer)) == FIVE_STAGE


def test_segments_partition_the_run():
    steer = _series((1.0, 0.0), (1.5, 0.25), (1.0, 0.0), (1.5, -0.25), (1.0, 0.0))
    segs = classify_phases(steer)
    assert segs[0].start == steer.index[0]
    assert segs[-1].end == steer.index[-1]
    for a, b in zip(segs, segs[1:]):
        assert a.end == b.start
    col = phase_column(steer.index.to_numpy(), segs)
    assert col[0] == STRAIGHT and AVOID_LEFT in col and RETURN_RIGHT in col


def test_classify_empty():
    assert classify_phases(pd.Series([], dtype=float)) == []


def test_middle_straight_is_optional_only_when_asked():
    seq = [STRAIGHT, AVOID_LEFT, RETURN_RIGHT, STRAIGHT]
    assert not matches_five_stage(seq)
    assert matches_five_stage(seq, middle_optional=True)


# ── metrics ──────────────────────────────────────────────────

def test_metrics_on_the_centreline():
    sc = _scenario()
    m = compute_metrics(_straight_log(sc), sc)
    assert m.max_lateral_error == pytest.approx(0.0, abs=1e-9)
    assert m.min_clearance is None
    assert not m.collision


def test_metrics_lateral_error():
    sc = _scenario()
    m = compute_metrics(_straight_log(sc, ys=np.linspace(0.0, 0.15, 50)), sc)
    assert m.max_lateral_error == pytest.approx(0.15, abs=1e-6)


def test_metrics_grazing_clearance():
    sc = _scenario(obstacles=[Obstacle((5.0, 1.3), 1.0)])
    m = compute_metrics(_straight_log(sc), sc)
    assert m.min_clearance == pytest.approx(0.3, abs=1e-9)
    assert not m.collision


def test_metrics_intersection_is_a_collision():
    sc = _scenario(obstacles=[Obstacle((5.0, 0.5), 1.0)])
    m = compute_metrics(_straight_log(sc), sc)
    assert m.collision
    assert m.min_clearance == pytest.approx(-0.5, abs=1e-9)


# ── artifacts ────────────────────────────────────────────────

def test_write_artifacts(tmp_path):
    sc = _scenario()
    log = _straight_log(sc)
    m = compute_metrics(log, sc)
    paths = write_artifacts(log, m, tmp_path / "run")
    df = read_log(paths["log"])
    assert list(df.columns) == ["t", "x", "y", "heading", "speed", "steering", "phase"]
    assert len(df) == 50
    doc = json.loads(paths["metrics"].read_text())
    assert list(doc) == sorted(doc)
    assert doc["collision"] is False
    assert load_scenario(paths["scenario"]) == sc


def test_read_log_rejects_foreign_csv(tmp_path):
    p = tmp_path / "other.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(ConfigError):
        read_log(p)


# ── closed loop ──────────────────────────────────────────────

def test_obstacle_free_run_completes():
    sc = _scenario()
    log = run(sc)
    m = compute_metrics(log, sc)
    assert log.completed and not log.aborted and not log.collision
    assert m.max_lateral_error < 0.05
    assert log.records[-1].state.x >= 19.0 - 0.1


def test_runs_are_deterministic():
    sc = replace(builtin_scenario(1), duration=6.0, seed=3)
    a, b = run(sc).to_frame(), run(sc).to_frame()
    pd.testing.assert_frame_equal(a, b)


def test_log_clock():
    sc = _scenario(duration=1.0)
    log = run(sc)
    np.testing.assert_allclose(np.diff(log.times()), TICK)
    assert log.plans and log.plans[0].time == 0.0


def test_route_blocked_by_a_wall_aborts():
    wall = [Obstacle((8.0, y), 0.9) for y in (-4.0, -2.0, 0.0, 2.0, 4.0)]
    log = run(_scenario(obstacles=wall))
    assert log.aborted and log.abort_reason and log.end_reason == "aborted"
    assert not log.collision and not log.plans
    commanded = [r.target_speed for r in log.records]
    assert commanded[0] == pytest.approx(2.0 - 2.0 * TICK)
    assert commanded == sorted(commanded, reverse=True)
    assert commanded[-1] == 0.0 and log.records[-1].state.speed == 0.0
    assert log.records[-1].state.x < 8.0 - 0.9 - 1.0


def test_case_one_replans_through_the_first_sighting():
    sc = replace(builtin_scenario(1), duration=8.0)
    log = run(sc)
    assert not log.aborted and not log.collision
    assert log.records[-1].state.x > 20.0
    assert any(p.trajectory.terminal_d > 0 for p in log.plans)


def test_speed_settles_after_a_slow_start():
    sc = _scenario(route=((0.0, 0.0), (40.0, 0.0)), initial_state=VehicleState(0.0, 0.0, 0.0, 1.0),
                   desired_speed=2.78, duration=25.0)
    log = run(sc)
    speeds = log.to_frame()["speed"]
    assert log.completed and not log.aborted
    assert speeds.max() < 2.78 + 0.3
    assert speeds.iloc[-1] == pytest.approx(2.78, abs=0.05)


@pytest.mark.slow
def test_case_one_with_ideal_perception():
    sc = builtin_scenario(1).with_overrides("ideal")
    log = run(sc)
    m = compute_metrics(log, sc)
    assert m.completed and not m.collision
    assert m.min_clearance >= 1.0
    assert matches_five_stage(m.phase_sequence, middle_optional=True)
    speeds = log.to_frame()["speed"]
    assert speeds.max() < sc.desired_speed + 0.5
    assert speeds.iloc[-1] == pytest.approx(sc.desired_speed, abs=0.05)


@pytest.mark.slow
def test_sweep_frame():
    df = sweep([1], ["ideal", "dav2"], [0])
    assert list(df[["case", "model", "seed"]].itertuples(index=False, name=None)) == [(1, "ideal", 0), (1, "dav2", 0)]
    assert not df["collision"].any()


def test_sweep_rejects_unknown_model():
    with pytest.raises(UnknownModel):
        sweep([1], ["zoedepth"], [0])


def test_time_replan_cycle_keys():
    out = time_replan_cycle(repeats=2)
    assert set(out) == {"repeats", "obstacles", "mean_ms", "median_ms", "max_ms"}
    assert out["median_ms"] > 0
