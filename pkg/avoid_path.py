"""
avoid_path.py — reference path and Frenet conversions

The route is a natural cubic spline through the waypoints, parameterized by
cumulative chord length u and re-mapped to arc length s on a dense 1 cm grid.
Heading and curvature come from the spline derivatives, so the tangent is unit
length everywhere and curvature (plus its s-derivative) is analytic.

Frenet frame: s along the path, d positive to the left of the tangent.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import CubicSpline

from avoid_errors import DegenerateWaypoints, FoldOver, OutOfRange, ProjectionAmbiguous
from avoid_geometry import normalize_angle

log = logging.getLogger("frenet_avoid.path")

GRID_STEP = 0.01           # arc-length resampling (m)
COARSE_STEP = 0.5          # projection search grid (m)
AMBIGUITY_RATIO = 0.01     # second minimum within 1% of the best ...
AMBIGUITY_SEPARATION = 5.0  # ... and farther than this along the path (m)
END_TOL = 1e-6
MIN_S_DOT = 1e-6


class PathSample(NamedTuple):
    position: Tuple[float, float]
    heading: float
    curvature: float


class PathArrays(NamedTuple):
    x: np.ndarray
    y: np.ndarray
    heading: np.ndarray
    curvature: np.ndarray
    dcurvature: np.ndarray


@dataclass(frozen=True)
class FrenetState:
    s: float
    s_dot: float = 0.0
    s_ddot: float = 0.0
    d: float = 0.0
    d_dot: float = 0.0
    d_ddot: float = 0.0


@dataclass(frozen=True)
class CartesianState:
    x: float
    y: float
    heading: float
    speed: float
    accel: float
    curvature: float

    @property
    def position(self) -> Tuple[float, float]:
        return self.x, self.y


class ReferencePath:
    """Immutable after construction. Build with build_path()."""

    def __init__(self, waypoints: np.ndarray, spline_x: CubicSpline, spline_y: CubicSpline,
                 u_grid: np.ndarray, s_grid: np.ndarray):
        self.waypoints = waypoints
        self.spline = (spline_x, spline_y)
        self._u_grid = u_grid
        self._s_grid = s_grid
        self.total_length = float(s_grid[-1])
        for arr in (self.waypoints, self._u_grid, self._s_grid):
            arr.setflags(write=False)

    def __repr__(self) -> str:
        return f"ReferencePath(waypoints={len(self.waypoints)}, length={self.total_length:.3f})"

    def sample_array(self, s: np.ndarray) -> PathArrays:
        """Vectorized lookup. Beyond either end the path continues along its end tangent."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        L = self.total_length
        sc = np.clip(s, 0.0, L)
        u = np.interp(sc, self._s_grid, self._u_grid)
        sx, sy = self.spline
        x, y = sx(u), sy(u)
        x1, y1 = sx(u, 1), sy(u, 1)
        x2, y2 = sx(u, 2), sy(u, 2)
        x3, y3 = sx(u, 3), sy(u, 3)
        q = x1 * x1 + y1 * y1
        speed_u = np.sqrt(q)
        cross = x1 * y2 - y1 * x2
        kappa = cross / q ** 1.5
        dkappa_du = (x1 * y3 - y1 * x3) / q ** 1.5 - 3.0 * cross * (x1 * x2 + y1 * y2) / q ** 2.5
        dkappa = dkappa_du / speed_u
        heading = np.arctan2(y1, x1)

        over = s - sc
        outside = over != 0.0
        if np.any(outside):
            x = np.where(outside, x + over * np.cos(heading), x)
            y = np.where(outside, y + over * np.sin(heading), y)
            kappa = np.where(outside, 0.0, kappa)
            dkappa = np.where(outside, 0.0, dkappa)
        return PathArrays(x, y, heading, kappa, dkappa)

    def _point(self, s: float) -> Tuple[float, float, float, float, float]:
        a = self.sample_array(np.array([s]))
        return float(a.x[0]), float(a.y[0]), float(a.heading[0]), float(a.curvature[0]), float(a.dcurvature[0])


def build_path(waypoints: Sequence[Sequence[float]]) -> ReferencePath:
    try:
        pts = np.asarray(waypoints, dtype=float).reshape(-1, 2)
    except ValueError as e:
        raise DegenerateWaypoints(f"waypoints must be [[x, y], ...]: {e}") from e
    if not np.all(np.isfinite(pts)):
        raise DegenerateWaypoints("waypoints must be finite")
    if len(pts):
        keep = np.concatenate([[True], np.hypot(*np.diff(pts, axis=0).T) > 1e-9])
        pts = pts[keep]
    if len(pts) < 2:
        raise DegenerateWaypoints(f"need at least 2 distinct waypoints, got {len(pts)}")

    knots = pts
    if len(knots) == 2:
        knots = np.vstack([pts[0], pts.mean(axis=0), pts[1]])
    u = np.concatenate([[0.0], np.cumsum(np.hypot(*np.diff(knots, axis=0).T))])
    spline_x = CubicSpline(u, knots[:, 0], bc_type="natural")
    spline_y = CubicSpline(u, knots[:, 1], bc_type="natural")

    n = max(int(math.ceil(u[-1] / GRID_STEP)), 1) + 1
    u_grid = np.linspace(0.0, u[-1], n)
    seg = np.hypot(np.diff(spline_x(u_grid)), np.diff(spline_y(u_grid)))
    s_grid = np.concatenate([[0.0], np.cumsum(seg)])
    if not np.all(np.isfinite(spline_x(u_grid, 2))) or s_grid[-1] <= 0:
        raise DegenerateWaypoints("spline through waypoints is degenerate")
    path = ReferencePath(pts, spline_x, spline_y, u_grid, s_grid)
    log.debug("built %r", path)
    return path


def sample(path: ReferencePath, s: float) -> PathSample:
    if not (-END_TOL <= s <= path.total_length + END_TOL):
        raise OutOfRange(f"s={s:.4f} outside [0, {path.total_length:.4f}]")
    x, y, heading, kappa, _ = path._point(min(max(s, 0.0), path.total_length))
    return PathSample((x, y), heading, kappa)


# ----------------------------
# Projection
# ----------------------------
def _newton_project(path: ReferencePath, p: np.ndarray, s: float) -> float:
    for _ in range(60):
        x, y, heading, kappa, _ = path._point(s)
        dx, dy = p[0] - x, p[1] - y
        t_comp = dx * math.cos(heading) + dy * math.sin(heading)
        n_comp = -dx * math.sin(heading) + dy * math.cos(heading)
        denom = 1.0 - kappa * n_comp
        if denom < 1e-3:
            denom = 1.0
        step = max(-COARSE_STEP, min(COARSE_STEP, t_comp / denom))
        s += step
        if abs(step) < 1e-12:
            break
    return s


def _local_minima(dist: np.ndarray) -> np.ndarray:
    left = np.concatenate([[np.inf], dist[:-1]])
    right = np.concatenate([dist[1:], [np.inf]])
    return np.flatnonzero((dist <= left) & (dist <= right))


def project(path: ReferencePath, position: Sequence[float], s_hint: Optional[float] = None,
            window: Optional[float] = None) -> float:
    """Arc length of the nearest point on the path to `position`."""
    p = np.asarray(position, dtype=float)[:2]
    L = path.total_length
    lo, hi = 0.0, L
    if s_hint is not None and window is not None:
        lo, hi = max(0.0, s_hint - window), min(L, s_hint + window)
    coarse = np.append(np.arange(lo, hi, COARSE_STEP), hi)
    arr = path.sample_array(coarse)
    dist = np.hypot(arr.x - p[0], arr.y - p[1])

    refined = []
    for i in _local_minima(dist):
        s = _newton_project(path, p, float(coarse[i]))
        sc = min(max(s, 0.0), L)
        x, y, *_ = path._point(sc)
        refined.append((math.hypot(p[0] - x, p[1] - y), s))
    best_dist, best_s = min(refined)
    if best_s < -END_TOL or best_s > L + END_TOL:
        raise OutOfRange(f"projection of ({p[0]:.3f}, {p[1]:.3f}) falls beyond the path end (s={best_s:.3f})")
    best_s = min(max(best_s, 0.0), L)
    for other_dist, other_s in refined:
        other_s = min(max(other_s, 0.0), L)
        if abs(other_s - best_s) > AMBIGUITY_SEPARATION and other_dist <= best_dist * (1.0 + AMBIGUITY_RATIO):
            raise ProjectionAmbiguous(
                f"({p[0]:.3f}, {p[1]:.3f}) is equidistant from s={best_s:.2f} and s={other_s:.2f}")
    return best_s


# ----------------------------
# Frenet <-> Cartesian
# ----------------------------
def cartesian_to_frenet(path: ReferencePath, position: Sequence[float], speed: float = 0.0, heading: float = 0.0,
                        accel: float = 0.0, curvature: Optional[float] = None,
                        s_hint: Optional[float] = None, window: Optional[float] = None) -> FrenetState:
    """
    Project onto the path and resolve velocity/acceleration along tangent and normal.
    `curvature` is the curvature of the vehicle's own trajectory; when omitted the
    lateral profile is taken as locally straight (d'' = 0).
    """
    s = project(path, position, s_hint, window)
    rx, ry, r_heading, kr, dkr = path._point(s)
    px, py = float(position[0]), float(position[1])
    d = -(px - rx) * math.sin(r_heading) + (py - ry) * math.cos(r_heading)

    one_kd = 1.0 - kr * d
    if one_kd <= 0:
        raise FoldOver(f"d={d:.3f} beyond the centre of curvature at s={s:.3f}")
    dtheta = normalize_angle(heading - r_heading)
    cos_dt, tan_dt = math.cos(dtheta), math.tan(dtheta)
    d_prime = one_kd * tan_dt
    kd_term = dkr * d + kr * d_prime

    if curvature is None:
        d_pprime = 0.0
        kx = ((d_pprime + kd_term * tan_dt) * cos_dt ** 2 / one_kd + kr) * cos_dt / one_kd
    else:
        kx = curvature
        d_pprime = -kd_term * tan_dt + one_kd / cos_dt ** 2 * (kx * one_kd / cos_dt - kr)

    s_dot = speed * cos_dt / one_kd
    s_ddot = (accel * cos_dt - s_dot ** 2 * (d_prime * (kx * one_kd / cos_dt - kr) - kd_term)) / one_kd
    d_dot = d_prime * s_dot
    d_ddot = d_pprime * s_dot ** 2 + d_prime * s_ddot
    return FrenetState(s, s_dot, s_ddot, d, d_dot, d_ddot)


def frenet_to_cartesian(path: ReferencePath, fs: FrenetState) -> CartesianState:
    if not (-END_TOL <= fs.s <= path.total_length + END_TOL):
        raise OutOfRange(f"s={fs.s:.4f} outside [0, {path.total_length:.4f}]")
    rx, ry, r_heading, kr, dkr = path._point(min(max(fs.s, 0.0), path.total_length))
    one_kd = 1.0 - kr * fs.d
    if one_kd <= 0:
        raise FoldOver(f"|d*k| = {abs(fs.d * kr):.3f} >= 1 at s={fs.s:.3f}")

    if abs(fs.s_dot) < MIN_S_DOT:
        d_prime, d_pprime = 0.0, 0.0
    else:
        d_prime = fs.d_dot / fs.s_dot
        d_pprime = (fs.d_ddot - d_prime * fs.s_ddot) / fs.s_dot ** 2

    x = rx - fs.d * math.sin(r_heading)
    y = ry + fs.d * math.cos(r_heading)
    dtheta = math.atan2(d_prime, one_kd)
    cos_dt, tan_dt = math.cos(dtheta), math.tan(dtheta)
    kd_term = dkr * fs.d + kr * d_prime

    heading = normalize_angle(dtheta + r_heading)
    speed = math.hypot(fs.s_dot * one_kd, fs.s_dot * d_prime)
    kx = ((d_pprime + kd_term * tan_dt) * cos_dt ** 2 / one_kd + kr) * cos_dt / one_kd
    accel = fs.s_ddot * one_kd / cos_dt + fs.s_dot ** 2 / cos_dt * (d_prime * (kx * one_kd / cos_dt - kr) - kd_term)
    return CartesianState(x, y, heading, speed, accel, kx)
