# test_avoid_tracker.py
import math

import numpy as np
import pytest

from avoid_errors import CoincidentTarget, ConfigError, EmptyTrajectory
from avoid_path import FrenetState
from avoid_planner import PlannerConfig, generate_candidates
from avoid_tracker import (
    TrackerConfig,
    find_target_point,
    lookahead_distance,
    pure_pursuit_steering,
    track,
)
from avoid_vehicle import VehicleState

CFG = TrackerConfig(base_lookahead=2.0, speed_gain=0.5, wheelbase=2.0, max_steering=0.6)
LINE = np.column_stack([np.arange(0.0, 10.01, 0.25), np.zeros(41)])


def test_lookahead_distance():
    assert lookahead_distance(0.0, CFG) == 2.0
    assert lookahead_distance(2.78, CFG) == pytest.approx(3.39)
    assert lookahead_distance(-1.0, CFG) == 2.0


def test_target_point_on_a_line():
    tp = find_target_point(LINE, VehicleState(0.0, 0.0, 0.0), 5.0)
    assert (tp.x, tp.y, tp.index) == (5.0, 0.0, 20)


def test_target_point_falls_back_to_last_sample():
    tp = find_target_point(LINE, VehicleState(0.0, 0.0, 0.0), 50.0)
    assert tp.index == len(LINE) - 1


def test_target_point_searches_ahead_of_nearest_sample():
    tp = find_target_point(LINE, VehicleState(4.1, 0.3, 0.0), 1.0)
    assert tp.index >= 16
    assert tp.x == pytest.approx(5.0)


def test_empty_trajectory():
    with pytest.raises(EmptyTrajectory):
        find_target_point(np.empty((0, 2)), VehicleState(0.0, 0.0, 0.0), 1.0)


def test_straight_ahead_needs_no_steering():
    assert pure_pursuit_steering(VehicleState(0.0, 0.0, 0.0), (5.0, 0.0), CFG) == 0.0


def test_thirty_degree_target():
    target = (5.0 * math.cos(math.radians(30)), 5.0 * math.sin(math.radians(30)))
    assert pure_pursuit_steering(VehicleState(0.0, 0.0, 0.0), target, CFG) == pytest.approx(math.atan(0.4))


def test_target_abeam_saturates():
    assert pure_pursuit_steering(VehicleState(0.0, 0.0, 0.0), (0.0, 3.0), CFG) == pytest.approx(0.6)
    assert pure_pursuit_steering(VehicleState(0.0, 0.0, 0.0), (0.0, -3.0), CFG) == pytest.approx(-0.6)


def test_steering_is_odd_in_the_target_offset():
    pose = VehicleState(1.0, 2.0, 0.3)
    for dx, dy in [(4.0, 0.5), (3.0, 1.2), (6.0, 0.1)]:
        c, s = math.cos(pose.heading), math.sin(pose.heading)
        left = (pose.x + dx * c - dy * s, pose.y + dx * s + dy * c)
        right = (pose.x + dx * c + dy * s, pose.y + dx * s - dy * c)
        assert pure_pursuit_steering(pose, left, CFG) == pytest.approx(-pure_pursuit_steering(pose, right, CFG))


def test_coincident_target():
    with pytest.raises(CoincidentTarget):
        pure_pursuit_steering(VehicleState(1.0, 1.0, 0.0), (1.0, 1.0), CFG)


def test_steady_state_on_a_circle():
    R = 30.0
    phi = 0.2
    target = (R * math.sin(phi), R - R * math.cos(phi))
    delta = pure_pursuit_steering(VehicleState(0.0, 0.0, 0.0), target, CFG)
    assert delta == pytest.approx(math.atan(CFG.wheelbase / R), rel=0.05)


def test_track_uses_plan_speed_at_target():
    cfg = PlannerConfig(lateral_offsets=(1.0,), target_speeds=(3.0,), horizons=(4.0,))
    (c,) = generate_candidates(FrenetState(s=0.0, s_dot=2.0), cfg)
    cmd = track(c, VehicleState(0.0, 0.0, 0.0, 2.0), CFG)
    tp = find_target_point(c, VehicleState(0.0, 0.0, 0.0), lookahead_distance(2.0, CFG))
    assert cmd.target_speed == pytest.approx(c.speed[tp.index])
    assert cmd.steering > 0.0


def test_config_validation():
    with pytest.raises(ConfigError):
        TrackerConfig(base_lookahead=0.0)
    with pytest.raises(ConfigError):
        TrackerConfig(max_steering=2.0)
