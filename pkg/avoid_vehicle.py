"""
avoid_vehicle.py — kinematic bicycle plant with actuator limits.

    x' = v cos ψ     y' = v sin ψ     ψ' = (v / L) tan δ

Forward Euler; speed follows the command at up to max_accel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

from avoid_errors import ConfigError
from avoid_geometry import normalize_angle
from avoid_tracker import ControlCommand


@dataclass(frozen=True)
class VehicleState:
    x: float
    y: float
    heading: float
    speed: float = 0.0

    def __post_init__(self):
        if self.speed < 0:
            raise ConfigError(f"speed must be >= 0, got {self.speed}")
        object.__setattr__(self, "heading", normalize_angle(self.heading))

    @property
    def position(self) -> Tuple[float, float]:
        return self.x, self.y


@dataclass(frozen=True)
class VehicleParams:
    wheelbase: float = 1.7
    max_steering: float = 0.6
    max_accel: float = 2.0
    max_steering_rate: float = 0.8

    def __post_init__(self):
        for name in ("wheelbase", "max_steering", "max_accel", "max_steering_rate"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be > 0, got {getattr(self, name)}")


def _clamp(v: float, lo: float, hi: float) -> float:
    return max(lo, min(hi, v))


def apply_limits(prev_cmd: ControlCommand, cmd: ControlCommand, dt: float, params: VehicleParams) -> ControlCommand:
    if not dt > 0:
        raise ConfigError(f"dt must be > 0, got {dt}")
    steer = _clamp(cmd.steering, -params.max_steering, params.max_steering)
    max_delta = params.max_steering_rate * dt
    steer = _clamp(steer, prev_cmd.steering - max_delta, prev_cmd.steering + max_delta)
    max_dv = params.max_accel * dt
    speed = _clamp(cmd.target_speed, prev_cmd.target_speed - max_dv, prev_cmd.target_speed + max_dv)
    return ControlCommand(steer, max(speed, 0.0))


def step(state: VehicleState, cmd: ControlCommand, dt: float, params: VehicleParams) -> VehicleState:
    if not dt > 0:
        raise ConfigError(f"dt must be > 0, got {dt}")
    v = state.speed
    delta = _clamp(cmd.steering, -params.max_steering, params.max_steering)
    x = state.x + v * math.cos(state.heading) * dt
    y = state.y + v * math.sin(state.heading) * dt
    heading = state.heading + v / params.wheelbase * math.tan(delta) * dt if v else state.heading
    max_dv = params.max_accel * dt
    speed = max(_clamp(cmd.target_speed, v - max_dv, v + max_dv), 0.0)
    return VehicleState(x, y, heading, speed)
