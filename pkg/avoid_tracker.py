"""
avoid_tracker.py — Pure Pursuit path tracking

Steer along the arc that leaves the vehicle tangent to its heading and passes
through a look-ahead point on the planned trajectory:

    δ = atan(2 L sin α / l_d)

α is the target bearing in the vehicle frame and l_d the actual distance to it.
The look-ahead grows with speed: L_d = L₀ + k_v·v.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from avoid_errors import CoincidentTarget, ConfigError, EmptyTrajectory
from avoid_geometry import normalize_angle


@dataclass(frozen=True)
class TrackerConfig:
    base_lookahead: float = 2.0
    speed_gain: float = 0.5
    wheelbase: float = 1.7
    max_steering: float = 0.6

    def __post_init__(self):
        if not self.base_lookahead > 0:
            raise ConfigError(f"base_lookahead must be > 0, got {self.base_lookahead}")
        if self.speed_gain < 0:
            raise ConfigError(f"speed_gain must be >= 0, got {self.speed_gain}")
        if not self.wheelbase > 0:
            raise ConfigError(f"wheelbase must be > 0, got {self.wheelbase}")
        if not 0 < self.max_steering < math.pi / 2:
            raise ConfigError(f"max_steering must lie in (0, pi/2), got {self.max_steering}")


@dataclass(frozen=True)
class ControlCommand:
    steering: float = 0.0       # rad, positive = left
    target_speed: float = 0.0


class TargetPoint(NamedTuple):
    x: float
    y: float
    index: int


def lookahead_distance(speed: float, cfg: TrackerConfig) -> float:
    return cfg.base_lookahead + cfg.speed_gain * max(speed, 0.0)


def _points(traj) -> np.ndarray:
    if hasattr(traj, "x") and hasattr(traj, "y") and not isinstance(traj, tuple):
        pts = np.column_stack([np.asarray(traj.x, dtype=float), np.asarray(traj.y, dtype=float)])
    else:
        pts = np.asarray(traj, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        raise EmptyTrajectory("trajectory has no samples")
    return pts


def find_target_point(traj, pose, lookahead: float) -> TargetPoint:
    """
    traj: a TrajectoryCandidate or an (N, 2) array of points; pose: anything with x, y.
    Returns the first sample at least `lookahead` of arc length past the sample
    nearest the pose, else the last sample.
    """
    pts = _points(traj)
    nearest = int(np.argmin(np.hypot(pts[:, 0] - pose.x, pts[:, 1] - pose.y)))
    ahead = pts[nearest:]
    arc = np.concatenate([[0.0], np.cumsum(np.hypot(*np.diff(ahead, axis=0).T))])
    hits = np.flatnonzero(arc >= lookahead)
    idx = nearest + int(hits[0]) if hits.size else len(pts) - 1
    return TargetPoint(float(pts[idx, 0]), float(pts[idx, 1]), idx)


def pure_pursuit_steering(pose, target, cfg: TrackerConfig) -> float:
    tx, ty = target[0], target[1]
    dx, dy = tx - pose.x, ty - pose.y
    dist = math.hypot(dx, dy)
    if dist < 1e-9:
        raise CoincidentTarget(f"target ({tx:.3f}, {ty:.3f}) coincides with the vehicle position")
    alpha = normalize_angle(math.atan2(dy, dx) - pose.heading)
    delta = math.atan(2.0 * cfg.wheelbase * math.sin(alpha) / dist)
    return max(-cfg.max_steering, min(cfg.max_steering, delta))


def track(traj, state, cfg: TrackerConfig) -> ControlCommand:
    """One tracker tick: look-ahead, target, steering; target speed is the plan's speed at the target."""
    target = find_target_point(traj, state, lookahead_distance(state.speed, cfg))
    try:
        steering = pure_pursuit_steering(state, target, cfg)
    except CoincidentTarget:
        steering = 0.0
    speeds = getattr(traj, "speed", None)
    target_speed = float(speeds[target.index]) if speeds is not None else state.speed
    return ControlCommand(steering, target_speed)
