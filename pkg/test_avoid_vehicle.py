# test_avoid_vehicle.py
import math

import numpy as np
import pytest

from avoid_errors import ConfigError
from avoid_tracker import ControlCommand
from avoid_vehicle import VehicleParams, VehicleState, apply_limits, step

PARAMS = VehicleParams(wheelbase=1.7, max_steering=0.6, max_accel=2.0, max_steering_rate=0.5)


def test_steering_rate_limit():
    out = apply_limits(ControlCommand(0.0, 2.0), ControlCommand(0.6, 2.0), 0.1, PARAMS)
    assert out.steering == pytest.approx(0.05)


def test_acceleration_limit():
    out = apply_limits(ControlCommand(0.0, 2.0), ControlCommand(0.0, 10.0), 0.1, PARAMS)
    assert out.target_speed == pytest.approx(2.2)


def test_commands_within_limits_pass_through():
    prev = ControlCommand(0.1, 2.0)
    cmd = ControlCommand(0.12, 2.1)
    assert apply_limits(prev, cmd, 0.1, VehicleParams()) == cmd


def test_steering_is_clamped_to_the_mechanical_limit():
    out = apply_limits(ControlCommand(0.58, 2.0), ControlCommand(1.2, 2.0), 0.1, PARAMS)
    assert out.steering == pytest.approx(0.6)


def test_straight_step():
    s = step(VehicleState(0.0, 0.0, 0.0, 5.0), ControlCommand(0.0, 5.0), 0.1, PARAMS)
    assert (s.x, s.y, s.heading, s.speed) == pytest.approx((0.5, 0.0, 0.0, 5.0))


def test_standstill():
    s0 = VehicleState(3.0, -1.0, 0.4, 0.0)
    assert step(s0, ControlCommand(0.3, 0.0), 0.1, PARAMS) == s0


def test_zero_steering_preserves_heading():
    s = VehicleState(0.0, 0.0, 1.1, 3.0)
    for _ in range(100):
        s = step(s, ControlCommand(0.0, 3.0), 0.02, PARAMS)
    assert s.heading == 1.1


def test_speed_never_negative():
    s = step(VehicleState(0.0, 0.0, 0.0, 0.1), ControlCommand(0.0, -5.0), 0.1, PARAMS)
    assert s.speed == 0.0


def test_constant_steering_traces_the_bicycle_radius():
    delta, v, dt = 0.2, 5.0, 0.001
    radius = PARAMS.wheelbase / math.tan(delta)
    s = VehicleState(0.0, 0.0, 0.0, v)
    xs, ys = [], []
    for _ in range(int(2 * math.pi * radius / (v * dt))):
        s = step(s, ControlCommand(delta, v), dt, PARAMS)
        xs.append(s.x)
        ys.append(s.y)
    dist = np.hypot(np.array(xs), np.array(ys) - radius)
    assert radius == pytest.approx(8.386, abs=1e-3)
    assert np.max(np.abs(dist - radius)) <= 0.01 * radius


def test_halving_dt_converges():
    def drive(dt):
        s = VehicleState(0.0, 0.0, 0.0, 4.0)
        for _ in range(int(round(2.0 / dt))):
            s = step(s, ControlCommand(0.3, 4.0), dt, PARAMS)
        return np.array([s.x, s.y])

    coarse, fine, finer = drive(0.02), drive(0.01), drive(0.005)
    assert np.linalg.norm(finer - fine) < np.linalg.norm(fine - coarse)


def test_validation():
    with pytest.raises(ConfigError):
        VehicleParams(wheelbase=0.0)
    with pytest.raises(ConfigError):
        VehicleState(0.0, 0.0, 0.0, -1.0)
    with pytest.raises(ConfigError):
        step(VehicleState(0.0, 0.0, 0.0), ControlCommand(), 0.0, PARAMS)
