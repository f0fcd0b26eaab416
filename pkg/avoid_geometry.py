"""
avoid_geometry.py — camera-only obstacle localization chain

Pixel + depth  →  camera frame  →  vehicle frame  →  global (UTM-like) frame.

Frames:
  camera   x-right, y-down, z-forward (depth d is the z coordinate, not ray length)
  vehicle  x-forward, y-left, z-up, origin on the ground plane
  global   planar metric frame, heading ψ counter-clockwise from +x

Everything here is a pure function over immutable values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np

from avoid_errors import BoundingBoxError, ConfigError, EmptyRegion, NonPositiveDepth

ORTHO_TOL = 1e-9

# camera z → vehicle x, camera −x → vehicle y, camera −y → vehicle z
AXIS_PERMUTATION = np.array([[0.0, 0.0, 1.0],
                             [-1.0, 0.0, 0.0],
                             [0.0, -1.0, 0.0]])


# ----------------------------
# Points, tagged by frame
# ----------------------------
class PixelPoint(NamedTuple):
    u: float
    v: float
    depth: float


class CameraPoint(NamedTuple):
    x: float
    y: float
    z: float


class VehiclePoint(NamedTuple):
    x: float
    y: float
    z: float


class GlobalPoint(NamedTuple):
    x: float
    y: float
    z: float


def _finite(*vals) -> bool:
    return all(math.isfinite(v) for v in vals)


def normalize_angle(a: float) -> float:
    """Wrap to (−π, π]."""
    a = math.fmod(a, 2.0 * math.pi)
    if a <= -math.pi:
        a += 2.0 * math.pi
    elif a > math.pi:
        a -= 2.0 * math.pi
    return a


def heading_from_compass(compass_deg: float) -> float:
    """Compass heading (deg, clockwise from north) → ψ (rad, CCW from +x/east)."""
    return normalize_angle(math.pi / 2.0 - math.radians(compass_deg))


# ----------------------------
# Camera / vehicle parameters
# ----------------------------
@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise ConfigError(f"focal lengths must be positive (fx={self.fx}, fy={self.fy})")
        if not _finite(self.cx, self.cy):
            raise ConfigError("principal point must be finite")

    def matrix(self) -> np.ndarray:
        return np.array([[self.fx, 0.0, self.cx],
                         [0.0, self.fy, self.cy],
                         [0.0, 0.0, 1.0]])


@dataclass(frozen=True)
class CameraExtrinsics:
    tilt: float = 0.0                       # downward tilt about camera x (rad)
    height: float = 0.0                     # above vehicle origin plane (m)
    lateral_offset: Tuple[float, float] = (0.0, 0.0)   # (t_x, t_y)

    def __post_init__(self):
        if not (-math.pi / 2 < self.tilt < math.pi / 2):
            raise ConfigError(f"tilt must lie in (-pi/2, pi/2), got {self.tilt}")
        if self.height < 0:
            raise ConfigError(f"camera height must be >= 0, got {self.height}")
        object.__setattr__(self, "lateral_offset", tuple(float(v) for v in self.lateral_offset))


@dataclass(frozen=True)
class VehiclePose:
    """GPS fix (x_g, y_g) plus heading ψ. Altitude is carried but unused."""
    x: float
    y: float
    heading: float
    altitude: float = 0.0

    def __post_init__(self):
        if not _finite(self.x, self.y, self.heading):
            raise ConfigError("vehicle pose must be finite")
        object.__setattr__(self, "heading", normalize_angle(self.heading))


@dataclass(frozen=True)
class CameraModel:
    intrinsics: CameraIntrinsics
    extrinsics: CameraExtrinsics
    image_width: int = 640
    image_height: int = 480
    hfov: float = math.radians(60.0)
    max_range: float = 15.0
    antenna_offset: Tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.image_width <= 0 or self.image_height <= 0:
            raise ConfigError("image size must be positive")
        if not (0 < self.hfov < math.pi):
            raise ConfigError(f"hfov must lie in (0, pi), got {self.hfov}")
        if self.max_range <= 0:
            raise ConfigError("max_range must be positive")
        object.__setattr__(self, "antenna_offset", tuple(float(v) for v in self.antenna_offset))


# ----------------------------
# Rigid transforms
# ----------------------------
@dataclass(frozen=True)
class RigidTransform:
    rotation: np.ndarray
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        r = np.array(self.rotation, dtype=float).reshape(3, 3)
        t = np.array(self.translation, dtype=float).reshape(3)
        if not np.allclose(r @ r.T, np.eye(3), atol=ORTHO_TOL * 10) or abs(np.linalg.det(r) - 1.0) > ORTHO_TOL * 10:
            raise ConfigError("rotation must be orthonormal with det 1")
        r.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(np.eye(3), np.zeros(3))

    def matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    def apply(self, p: Sequence[float]) -> np.ndarray:
        return self.rotation @ np.asarray(p, dtype=float) + self.translation

    def inverse(self) -> "RigidTransform":
        rt = self.rotation.T
        return RigidTransform(rt, -rt @ self.translation)


def tilt_rotation(theta: float) -> np.ndarray:
    """Tilted-camera vectors → level-camera vectors (rotation about camera x)."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[1.0, 0.0, 0.0],
                     [0.0, c, s],
                     [0.0, -s, c]])


# ----------------------------
# The chain
# ----------------------------
def median_depth(depth_map: np.ndarray, bbox: Tuple[int, int, int, int]) -> float:
    """Median of the valid cells (finite, > 0) of depth_map[v0:v1, u0:u1]."""
    depth_map = np.asarray(depth_map, dtype=float)
    u0, v0, u1, v1 = (int(b) for b in bbox)
    rows, cols = depth_map.shape[:2]
    if not (0 <= u0 < u1 <= cols and 0 <= v0 < v1 <= rows):
        raise BoundingBoxError(f"bbox {bbox} outside depth map {cols}x{rows}")
    region = depth_map[v0:v1, u0:u1].ravel()
    valid = region[np.isfinite(region) & (region > 0)]
    if valid.size == 0:
        raise EmptyRegion(f"no valid depth inside bbox {bbox}")
    # np.median averages the two middle values on even counts
    return float(np.median(valid))


def pixel_to_camera(pixel: Tuple[float, float], depth: float, intr: CameraIntrinsics) -> CameraPoint:
    if not depth > 0:
        raise NonPositiveDepth(f"depth must be > 0, got {depth}")
    u, v = pixel
    ray = np.linalg.solve(intr.matrix(), np.array([u, v, 1.0]))
    return CameraPoint(*(depth * ray))


def camera_to_pixel(p: Sequence[float], intr: CameraIntrinsics) -> PixelPoint:
    """Forward pinhole projection; inverse of pixel_to_camera."""
    x, y, z = p
    if not z > 0:
        raise NonPositiveDepth(f"point is not in front of the camera (z={z})")
    return PixelPoint(intr.fx * x / z + intr.cx, intr.fy * y / z + intr.cy, z)


def camera_to_vehicle_transform(extr: CameraExtrinsics) -> RigidTransform:
    t_x, t_y = extr.lateral_offset
    return RigidTransform(AXIS_PERMUTATION @ tilt_rotation(extr.tilt), np.array([t_x, t_y, extr.height]))


def camera_to_vehicle(p: Sequence[float], t: RigidTransform) -> VehiclePoint:
    return VehiclePoint(*t.apply(p))


def vehicle_to_camera(p: Sequence[float], t: RigidTransform) -> CameraPoint:
    return CameraPoint(*t.inverse().apply(p))


def _planar_rotation(psi: float) -> np.ndarray:
    c, s = math.cos(psi), math.sin(psi)
    return np.array([[c, -s], [s, c]])


def vehicle_to_global(p: Sequence[float], pose: VehiclePose,
                      antenna_offset: Tuple[float, float] = (0.0, 0.0)) -> GlobalPoint:
    """Rotate by ψ about the antenna, then translate to the GPS fix; z passes through."""
    x, y, z = p
    local = np.array([x - antenna_offset[0], y - antenna_offset[1]])
    gx, gy = _planar_rotation(pose.heading) @ local + np.array([pose.x, pose.y])
    return GlobalPoint(float(gx), float(gy), float(z))


def global_to_vehicle(p: Sequence[float], pose: VehiclePose,
                      antenna_offset: Tuple[float, float] = (0.0, 0.0)) -> VehiclePoint:
    x, y, z = p
    lx, ly = _planar_rotation(pose.heading).T @ np.array([x - pose.x, y - pose.y])
    return VehiclePoint(float(lx + antenna_offset[0]), float(ly + antenna_offset[1]), float(z))


def localize_obstacle(pixel: Tuple[float, float], depth_map: np.ndarray, bbox: Tuple[int, int, int, int],
                      intr: CameraIntrinsics, extr: CameraExtrinsics, pose: VehiclePose,
                      antenna_offset: Tuple[float, float] = (0.0, 0.0),
                      transform: Optional[RigidTransform] = None) -> GlobalPoint:
    d = median_depth(depth_map, bbox)
    p_cam = pixel_to_camera(pixel, d, intr)
    t = transform if transform is not None else camera_to_vehicle_transform(extr)
    return vehicle_to_global(camera_to_vehicle(p_cam, t), pose, antenna_offset)
