#!/usr/bin/env python3
"""
avoid_perception.py — synthetic camera perception

Stands in for the detector + monocular depth network. Obstacles are projected
through the pinhole camera, their depth and lateral offset are perturbed with
noise calibrated to measured mean absolute errors, and the perturbed detection
is localized back through avoid_geometry exactly as a real detection would be.

Error tables (ground truth m → mean absolute error m):
  depth distance   3 / 5 / 8 / 15 m
  offset distance  0 / 1 / 2 / 3 m
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from avoid_errors import ConfigError, UnknownModel
from avoid_geometry import (
    CameraModel,
    RigidTransform,
    VehiclePose,
    camera_to_pixel,
    camera_to_vehicle_transform,
    global_to_vehicle,
    localize_obstacle,
    vehicle_to_camera,
)

log = logging.getLogger("frenet_avoid.perception")

SIGMA_FROM_MAE = math.sqrt(math.pi / 2.0)   # E|N(0, σ)| = σ·sqrt(2/π)
MIN_DEPTH = 0.01


# ----------------------------
# Types
# ----------------------------
@dataclass(frozen=True)
class Obstacle:
    center: Tuple[float, float]
    radius: float
    height: float = 1.5
    class_label: str = "vehicle"

    def __post_init__(self):
        if not self.radius > 0:
            raise ConfigError(f"obstacle radius must be > 0, got {self.radius}")
        if not self.height > 0:
            raise ConfigError(f"obstacle height must be > 0, got {self.height}")
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))


@dataclass(frozen=True)
class DepthErrorProfile:
    model_name: str
    depth_error_table: Tuple[Tuple[float, float], ...]
    offset_error_table: Tuple[Tuple[float, float], ...]
    fps: float

    def __post_init__(self):
        for name in ("depth_error_table", "offset_error_table"):
            table = tuple((float(k), float(e)) for k, e in getattr(self, name))
            if not table:
                raise ConfigError(f"{self.model_name}: {name} is empty")
            knots = [k for k, _ in table]
            if knots != sorted(knots):
                raise ConfigError(f"{self.model_name}: {name} must be sorted by distance")
            if any(e < 0 for _, e in table):
                raise ConfigError(f"{self.model_name}: {name} errors must be >= 0")
            object.__setattr__(self, name, table)
        if not self.fps > 0:
            raise ConfigError(f"{self.model_name}: fps must be > 0")


@dataclass(frozen=True)
class DetectorProfile:
    name: str
    fps: float
    precision: float
    recall: float
    map50: float
    params_m: float


@dataclass(frozen=True)
class ObstacleEstimate:
    center: Tuple[float, float]
    radius: float
    timestamp: float = 0.0

    def __post_init__(self):
        if not self.radius > 0:
            raise ConfigError(f"estimate radius must be > 0, got {self.radius}")
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))


class Projection(NamedTuple):
    bbox: Tuple[int, int, int, int]   # (u0, v0, u1, v1), half-open
    true_depth: float                  # camera z of the reference point
    pixel: Tuple[float, float]         # projection of the reference point
    distance: float                    # vehicle-frame x ("depth distance")
    offset: float                      # vehicle-frame y ("offset distance")


# ----------------------------
# Embedded tables
# ----------------------------
DEPTH_KNOTS = (3.0, 5.0, 8.0, 15.0)
OFFSET_KNOTS = (0.0, 1.0, 2.0, 3.0)

_PROFILE_ROWS = {
    #        depth errors @ 3/5/8/15 m       offset errors @ 0/1/2/3 m     fps
    "dav2":  ((0.148, 0.047, 0.080, 0.366), (0.073, 0.045, 0.047, 0.051), 20),
    "midas": ((0.102, 0.392, 0.156, 5.353), (0.011, 0.202, 0.114, 0.104), 11),
    "mono2": ((0.222, 0.516, 3.919, 3.059), (0.058, 0.282, 0.126, 0.330), 31),
    "ideal": ((0.0, 0.0, 0.0, 0.0),         (0.0, 0.0, 0.0, 0.0),         20),
}

PROFILE_TITLES = {
    "dav2": "Depth Anything V2",
    "midas": "MiDaS",
    "mono2": "Monodepth2",
    "ideal": "noiseless baseline",
}

DETECTORS = {
    "yolov9t": DetectorProfile("yolov9t", 60, 97.7, 99.5, 99.4, 1.9),
    "yolov10n": DetectorProfile("yolov10n", 80, 97.7, 97.5, 99.3, 2.7),
    "yolov11n": DetectorProfile("yolov11n", 84, 97.3, 98.6, 99.3, 2.6),
}
DEFAULT_DETECTOR = "yolov11n"


def builtin_profile(name: str) -> DepthErrorProfile:
    key = str(name).strip().lower()
    if key not in _PROFILE_ROWS:
        raise UnknownModel(f"unknown depth model '{name}'; valid: {', '.join(_PROFILE_ROWS)}")
    depth, offset, fps = _PROFILE_ROWS[key]
    return DepthErrorProfile(key, tuple(zip(DEPTH_KNOTS, depth)), tuple(zip(OFFSET_KNOTS, offset)), fps)


def profile_names() -> List[str]:
    return list(_PROFILE_ROWS)


def builtin_detector(name: str = DEFAULT_DETECTOR) -> DetectorProfile:
    key = str(name).strip().lower()
    if key not in DETECTORS:
        raise UnknownModel(f"unknown detector '{name}'; valid: {', '.join(DETECTORS)}")
    return DETECTORS[key]


def perception_rate(profile: DepthErrorProfile, detector: Optional[DetectorProfile] = None) -> float:
    """Detection and depth run in parallel; the slower one paces the estimates."""
    det = detector or builtin_detector()
    return float(min(profile.fps, det.fps))


def rank_profiles(profiles: Sequence[DepthErrorProfile], table: str = "depth") -> Dict[float, Tuple[str, str]]:
    """Per knot: (lowest-error model, second-lowest model). The ideal baseline is skipped."""
    attr = "depth_error_table" if table == "depth" else "offset_error_table"
    real = [p for p in profiles if p.model_name != "ideal"]
    ranking = {}
    if len(real) < 2:
        return ranking
    for i, (knot, _) in enumerate(getattr(real[0], attr)):
        ordered = sorted(real, key=lambda p: getattr(p, attr)[i][1])
        ranking[knot] = (ordered[0].model_name, ordered[1].model_name)
    return ranking


# ----------------------------
# Noise model
# ----------------------------
def _interp(table: Tuple[Tuple[float, float], ...], x: float) -> float:
    knots = [k for k, _ in table]
    errs = [e for _, e in table]
    # np.interp clamps to the end values outside the knots
    return float(np.interp(x, knots, errs))


def error_at(profile: DepthErrorProfile, distance: float) -> float:
    return _interp(profile.depth_error_table, distance)


def offset_error_at(profile: DepthErrorProfile, offset: float) -> float:
    return _interp(profile.offset_error_table, abs(offset))


def sample_depth(profile: DepthErrorProfile, true_depth: float, rng: np.random.Generator) -> float:
    sigma = error_at(profile, true_depth) * SIGMA_FROM_MAE
    if sigma == 0.0:
        return float(true_depth)
    return max(float(true_depth + rng.normal(0.0, sigma)), MIN_DEPTH)


def sample_offset(profile: DepthErrorProfile, true_offset: float, rng: np.random.Generator) -> float:
    sigma = offset_error_at(profile, true_offset) * SIGMA_FROM_MAE
    if sigma == 0.0:
        return float(true_offset)
    return float(true_offset + rng.normal(0.0, sigma))


# ----------------------------
# Forward model
# ----------------------------
def _reference_point(obs: Obstacle) -> Tuple[float, float, float]:
    return obs.center[0], obs.center[1], obs.height / 2.0


def project_obstacle(obs: Obstacle, pose: VehiclePose, cam: CameraModel,
                     transform: Optional[RigidTransform] = None) -> Optional[Projection]:
    """Pinhole projection of the obstacle's bounding cylinder, or None when not visible."""
    t = transform if transform is not None else camera_to_vehicle_transform(cam.extrinsics)
    intr = cam.intrinsics
    ref_v = global_to_vehicle(_reference_point(obs), pose, cam.antenna_offset)
    if ref_v.x <= 0 or ref_v.x > cam.max_range:
        return None
    if abs(math.atan2(ref_v.y, ref_v.x)) > cam.hfov / 2.0:
        return None
    ref_c = vehicle_to_camera(ref_v, t)
    if ref_c.z <= 0:
        return None
    px = camera_to_pixel(ref_c, intr)
    if not (0 <= px.u < cam.image_width and 0 <= px.v < cam.image_height):
        return None

    # silhouette: cylinder edges perpendicular to the line of sight, ground to top
    los = np.array([ref_v.x, ref_v.y]) / math.hypot(ref_v.x, ref_v.y)
    perp = np.array([-los[1], los[0]])
    us, vs = [], []
    for side in (-1.0, 1.0):
        ex, ey = np.array([ref_v.x, ref_v.y]) + side * obs.radius * perp
        for z in (0.0, obs.height):
            c = vehicle_to_camera((ex, ey, z), t)
            if c.z <= 0:
                return None
            p = camera_to_pixel(c, intr)
            us.append(p.u)
            vs.append(p.v)
    u0 = max(0, int(math.floor(min(us))))
    v0 = max(0, int(math.floor(min(vs))))
    u1 = min(cam.image_width, int(math.ceil(max(us))) + 1)
    v1 = min(cam.image_height, int(math.ceil(max(vs))) + 1)
    if u1 <= u0 or v1 <= v0:
        return None
    return Projection((u0, v0, u1, v1), float(ref_c.z), (float(px.u), float(px.v)),
                      float(ref_v.x), float(ref_v.y))


def sense(world: Sequence[Obstacle], pose: VehiclePose, cam: CameraModel, profile: DepthErrorProfile,
          time: float, rng: np.random.Generator,
          transform: Optional[RigidTransform] = None) -> List[ObstacleEstimate]:
    """One perception frame: project, perturb depth/offset, localize back to the global frame."""
    t = transform if transform is not None else camera_to_vehicle_transform(cam.extrinsics)
    intr = cam.intrinsics
    t_x, t_y = cam.extrinsics.lateral_offset
    estimates = []
    for obs in world:
        proj = project_obstacle(obs, pose, cam, t)
        if proj is None:
            continue
        noisy_distance = sample_depth(profile, proj.distance, rng)
        noisy_offset = sample_offset(profile, proj.offset, rng)

        # along a fixed image row vehicle x scales with camera z; vehicle y = t_y − camera x
        z_noisy = proj.true_depth * max(noisy_distance - t_x, MIN_DEPTH) / (proj.distance - t_x)
        x_noisy = t_y - noisy_offset
        pixel = (intr.fx * x_noisy / z_noisy + intr.cx, proj.pixel[1])

        u0, v0, u1, v1 = proj.bbox
        depth_map = np.zeros((cam.image_height, cam.image_width))
        depth_map[v0:v1, u0:u1] = z_noisy
        g = localize_obstacle(pixel, depth_map, proj.bbox, intr, cam.extrinsics, pose, cam.antenna_offset, t)
        estimates.append(ObstacleEstimate((g.x, g.y), obs.radius, time))
    return estimates


# ----------------------------
# Obstacle memory
# ----------------------------
@dataclass
class _Track:
    sum_x: float
    sum_y: float
    count: int
    radius: float
    last_seen: float

    @property
    def center(self) -> Tuple[float, float]:
        return self.sum_x / self.count, self.sum_y / self.count


@dataclass
class ObstacleMap:
    """Fused global obstacle list. Tracks persist once seen (the world is static)."""
    gate: float = 1.5
    tracks: List[_Track] = field(default_factory=list)

    def update(self, estimates: Sequence[ObstacleEstimate]) -> None:
        """One frame of estimates; each track absorbs at most one estimate per frame."""
        matched = set()
        for est in estimates:
            best, best_dist = None, self.gate
            for tr in self.tracks:
                if id(tr) in matched:
                    continue
                cx, cy = tr.center
                dist = math.hypot(est.center[0] - cx, est.center[1] - cy)
                if dist <= best_dist:
                    best, best_dist = tr, dist
            if best is None:
                self.tracks.append(_Track(est.center[0], est.center[1], 1, est.radius, est.timestamp))
                matched.add(id(self.tracks[-1]))
                log.info("new obstacle track at (%.2f, %.2f) t=%.2f", est.center[0], est.center[1], est.timestamp)
            else:
                best.sum_x += est.center[0]
                best.sum_y += est.center[1]
                best.count += 1
                best.radius = max(best.radius, est.radius)
                best.last_seen = est.timestamp
                matched.add(id(best))

    def snapshot(self, time: Optional[float] = None) -> List[ObstacleEstimate]:
        """Tracks as estimates, stamped with `time` when given, else with their last sighting."""
        return [ObstacleEstimate(tr.center, tr.radius, tr.last_seen if time is None else time)
                for tr in self.tracks]

    def __len__(self) -> int:
        return len(self.tracks)
