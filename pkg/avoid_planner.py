"""
avoid_planner.py — Frenet optimal trajectory planner

Candidates pair a quintic lateral profile d(t) (terminal offset, zero terminal
velocity/acceleration) with a quartic longitudinal profile s(t) (terminal speed,
free terminal position). Each is sampled at dt, mapped to Cartesian along the
reference path, costed, checked against limits and obstacles, and the cheapest
survivor wins.

Cost = k_jerk·∫(d‴² + s‴²) + k_time·T + k_lane·d_T² + k_speed·(ṡ_T − v_des)²

With hold_distance set, each candidate also carries its terminal offset as a
lane line from the current station to hold_distance past the horizon end, and
the collision check covers that line too. A candidate can then only return to
an offset once every obstacle blocking it lies behind the vehicle.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from avoid_errors import ConfigError, NonPositiveHorizon, NoFeasiblePath
from avoid_path import FrenetState, PathArrays, ReferencePath

log = logging.getLogger("frenet_avoid.planner")

MIN_S_DOT = 1e-6
HOLD_STEP = 0.25     # lane-line spacing along s (m)
LIMIT_TOL = 1e-9     # relative slack on the kinematic limits


# ----------------------------
# Polynomials
# ----------------------------
@dataclass(frozen=True)
class _Polynomial:
    coefficients: Tuple[float, ...]   # a0 + a1 t + a2 t² + ...

    def evaluate(self, t, order: int = 0):
        """order-th time derivative at t (scalar or array)."""
        c = np.polynomial.polynomial.polyder(np.asarray(self.coefficients, dtype=float), order) if order else \
            np.asarray(self.coefficients, dtype=float)
        return np.polynomial.polynomial.polyval(t, c)

    def __call__(self, t):
        return self.evaluate(t, 0)


class QuinticPolynomial(_Polynomial):
    pass


class QuarticPolynomial(_Polynomial):
    pass


def solve_quintic(d0: float, d0_dot: float, d0_ddot: float, dT: float, dT_dot: float, dT_ddot: float,
                  T: float) -> QuinticPolynomial:
    if not T > 0:
        raise NonPositiveHorizon(f"horizon must be > 0, got {T}")
    a0, a1, a2 = d0, d0_dot, d0_ddot / 2.0
    A = np.array([[T ** 3, T ** 4, T ** 5],
                  [3 * T ** 2, 4 * T ** 3, 5 * T ** 4],
                  [6 * T, 12 * T ** 2, 20 * T ** 3]])
    b = np.array([dT - (a0 + a1 * T + a2 * T ** 2),
                  dT_dot - (a1 + 2 * a2 * T),
                  dT_ddot - 2 * a2])
    a3, a4, a5 = np.linalg.solve(A, b)
    return QuinticPolynomial(tuple(float(v) for v in (a0, a1, a2, a3, a4, a5)))


def solve_quartic(s0: float, s0_dot: float, s0_ddot: float, sT_dot: float, sT_ddot: float,
                  T: float) -> QuarticPolynomial:
    if not T > 0:
        raise NonPositiveHorizon(f"horizon must be > 0, got {T}")
    a0, a1, a2 = s0, s0_dot, s0_ddot / 2.0
    A = np.array([[3 * T ** 2, 4 * T ** 3],
                  [6 * T, 12 * T ** 2]])
    b = np.array([sT_dot - (a1 + 2 * a2 * T),
                  sT_ddot - 2 * a2])
    a3, a4 = np.linalg.solve(A, b)
    return QuarticPolynomial(tuple(float(v) for v in (a0, a1, a2, a3, a4)))


# ----------------------------
# Config / candidate types
# ----------------------------
@dataclass(frozen=True)
class PlannerConfig:
    lateral_offsets: Tuple[float, ...] = (0.0, 1.0, 2.0, 3.0, -1.0, -2.0, -3.0)
    target_speeds: Optional[Tuple[float, ...]] = None    # None → desired speed only
    horizons: Tuple[float, ...] = (3.0, 4.0, 5.0)
    dt: float = 0.1
    weights: Tuple[float, float, float, float] = (0.1, 1.0, 1.0, 1.0)   # jerk, time, lane, speed
    safety_radius: float = 1.0
    limits: Tuple[float, float, float] = (5.0, 2.0, 0.5)  # max speed, max |accel|, max |curvature|
    road_bounds: Optional[Tuple[float, float]] = None
    tracking_margin: float = 0.2
    hold_distance: Optional[float] = 10.0   # None → check the sampled positions only

    def __post_init__(self):
        object.__setattr__(self, "lateral_offsets", tuple(float(v) for v in self.lateral_offsets))
        object.__setattr__(self, "horizons", tuple(float(v) for v in self.horizons))
        if self.target_speeds is not None:
            object.__setattr__(self, "target_speeds", tuple(float(v) for v in self.target_speeds))
            if not self.target_speeds:
                raise ConfigError("target_speeds must be nonempty (or null for the desired speed)")
        if not self.lateral_offsets:
            raise ConfigError("lateral_offsets must be nonempty")
        if not self.horizons or any(h <= 0 for h in self.horizons):
            raise ConfigError("horizons must be nonempty and > 0")
        if not self.dt > 0:
            raise ConfigError(f"dt must be > 0, got {self.dt}")
        if len(self.weights) != 4 or any(w < 0 for w in self.weights):
            raise ConfigError("weights must be four values >= 0 (jerk, time, lane, speed)")
        if len(self.limits) != 3 or any(v <= 0 for v in self.limits):
            raise ConfigError("limits must be three positive values (speed, accel, curvature)")
        if self.safety_radius < 0 or self.tracking_margin < 0:
            raise ConfigError("safety_radius and tracking_margin must be >= 0")
        if self.road_bounds is not None:
            lo, hi = (float(v) for v in self.road_bounds)
            if not lo < hi:
                raise ConfigError(f"road_bounds must be (min, max) with min < max, got {self.road_bounds}")
            object.__setattr__(self, "road_bounds", (lo, hi))
        if self.hold_distance is not None:
            if not self.hold_distance >= 0:
                raise ConfigError(f"hold_distance must be >= 0 (or null), got {self.hold_distance}")
            object.__setattr__(self, "hold_distance", float(self.hold_distance))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        object.__setattr__(self, "limits", tuple(float(v) for v in self.limits))

    def speeds_for(self, desired_speed: float) -> Tuple[float, ...]:
        return self.target_speeds if self.target_speeds is not None else (float(desired_speed),)


class CostBreakdown(NamedTuple):
    jerk: float
    time: float
    lane: float
    speed: float
    total: float


class TrajectorySample(NamedTuple):
    time: float
    frenet: FrenetState
    position: Tuple[float, float]
    speed: float
    curvature: float


@dataclass(frozen=True)
class Feasibility:
    ok: bool
    reason: Optional[str] = None

    def __bool__(self) -> bool:
        return self.ok


@dataclass
class TrajectoryCandidate:
    lateral: QuinticPolynomial
    longitudinal: QuarticPolynomial
    horizon: float
    index: int
    t: np.ndarray
    s: np.ndarray
    s_d: np.ndarray
    s_dd: np.ndarray
    s_ddd: np.ndarray
    d: np.ndarray
    d_d: np.ndarray
    d_dd: np.ndarray
    d_ddd: np.ndarray
    x: np.ndarray = field(default=None)
    y: np.ndarray = field(default=None)
    heading: np.ndarray = field(default=None)
    speed: np.ndarray = field(default=None)
    accel: np.ndarray = field(default=None)
    curvature: np.ndarray = field(default=None)
    folded: bool = False
    cost_breakdown: Optional[CostBreakdown] = None
    hold_x: Optional[np.ndarray] = None     # terminal-offset lane line
    hold_y: Optional[np.ndarray] = None

    @property
    def terminal_d(self) -> float:
        return float(self.d[-1])

    @property
    def terminal_speed(self) -> float:
        return float(self.s_d[-1])

    @property
    def samples(self) -> List[TrajectorySample]:
        return [TrajectorySample(float(self.t[i]),
                                 FrenetState(float(self.s[i]), float(self.s_d[i]), float(self.s_dd[i]),
                                             float(self.d[i]), float(self.d_d[i]), float(self.d_dd[i])),
                                 (float(self.x[i]), float(self.y[i])),
                                 float(self.speed[i]), float(self.curvature[i]))
                for i in range(len(self.t))]

    def to_dict(self) -> dict:
        c = self.cost_breakdown
        return {
            "index": self.index,
            "horizon": self.horizon,
            "terminal_d": round(self.terminal_d, 6),
            "terminal_speed": round(self.terminal_speed, 6),
            "cost": None if c is None else {k: round(v, 6) for k, v in c._asdict().items()},
            "lateral": [round(v, 9) for v in self.lateral.coefficients],
            "longitudinal": [round(v, 9) for v in self.longitudinal.coefficients],
            "points": [[round(float(a), 4), round(float(b), 4)] for a, b in zip(self.x, self.y)],
        }


# ----------------------------
# Generation
# ----------------------------
def _time_grid(T: float, dt: float) -> np.ndarray:
    n = max(int(round(T / dt)), 1)
    return np.linspace(0.0, T, n + 1)


def _to_cartesian(c: TrajectoryCandidate, ref: PathArrays) -> None:
    """Vectorized Frenet → Cartesian over all samples of one candidate."""
    rx, ry, rh, kr, dkr = ref

    one_kd = 1.0 - kr * c.d
    c.folded = bool(np.any(one_kd <= 0))
    one_kd = np.where(one_kd <= 0, 1e-9, one_kd)
    moving = np.abs(c.s_d) >= MIN_S_DOT
    safe_sd = np.where(moving, c.s_d, 1.0)
    d_p = np.where(moving, c.d_d / safe_sd, 0.0)
    d_pp = np.where(moving, (c.d_dd - d_p * c.s_dd) / safe_sd ** 2, 0.0)

    dtheta = np.arctan2(d_p, one_kd)
    cos_dt, tan_dt = np.cos(dtheta), np.tan(dtheta)
    kd_term = dkr * c.d + kr * d_p
    kx = ((d_pp + kd_term * tan_dt) * cos_dt ** 2 / one_kd + kr) * cos_dt / one_kd

    c.x = rx - c.d * np.sin(rh)
    c.y = ry + c.d * np.cos(rh)
    c.heading = rh + dtheta
    c.speed = np.abs(c.s_d) * np.hypot(one_kd, d_p)
    c.curvature = kx
    c.accel = c.s_dd * one_kd / cos_dt + c.s_d ** 2 / cos_dt * (d_p * (kx * one_kd / cos_dt - kr) - kd_term)


def generate_candidates(fs: FrenetState, cfg: PlannerConfig, path: Optional[ReferencePath] = None,
                        desired_speed: Optional[float] = None) -> List[TrajectoryCandidate]:
    speeds = cfg.speeds_for(fs.s_dot if desired_speed is None else desired_speed)
    out = []
    for d_T in cfg.lateral_offsets:
        for v_T in speeds:
            for T in cfg.horizons:
                lat = solve_quintic(fs.d, fs.d_dot, fs.d_ddot, d_T, 0.0, 0.0, T)
                lon = solve_quartic(fs.s, fs.s_dot, fs.s_ddot, v_T, 0.0, T)
                t = _time_grid(T, cfg.dt)
                c = TrajectoryCandidate(
                    lateral=lat, longitudinal=lon, horizon=T, index=len(out), t=t,
                    s=lon.evaluate(t), s_d=lon.evaluate(t, 1), s_dd=lon.evaluate(t, 2), s_ddd=lon.evaluate(t, 3),
                    d=lat.evaluate(t), d_d=lat.evaluate(t, 1), d_dd=lat.evaluate(t, 2), d_ddd=lat.evaluate(t, 3),
                )
                out.append(c)

    holds = [_hold_stations(c, cfg.hold_distance) for c in out]

    # one path lookup for every sample and lane-line point of every candidate
    all_s = np.concatenate([c.s for c in out] + holds)
    if path is None:
        zeros = np.zeros_like(all_s)
        ref = PathArrays(all_s, zeros, zeros, zeros, zeros)
    else:
        ref = path.sample_array(all_s)
    start = 0
    for c in out:
        stop = start + len(c.t)
        _to_cartesian(c, PathArrays(*(a[start:stop] for a in ref)))
        start = stop
    if cfg.hold_distance is not None:
        for c, hs in zip(out, holds):
            stop = start + len(hs)
            rx, ry, rh = ref.x[start:stop], ref.y[start:stop], ref.heading[start:stop]
            c.hold_x = rx - c.terminal_d * np.sin(rh)
            c.hold_y = ry + c.terminal_d * np.cos(rh)
            start = stop
    return out


def _hold_stations(c: TrajectoryCandidate, hold_distance: Optional[float]) -> np.ndarray:
    if hold_distance is None:
        return np.empty(0)
    lo = float(min(c.s[0], c.s[-1]))
    hi = float(max(c.s[0], c.s[-1])) + hold_distance
    n = max(int(np.ceil((hi - lo) / HOLD_STEP)), 1)
    return np.linspace(lo, hi, n + 1)


# ----------------------------
# Evaluation
# ----------------------------
def cost(c: TrajectoryCandidate, cfg: PlannerConfig, desired_speed: float) -> CostBreakdown:
    step = float(c.t[1] - c.t[0]) if len(c.t) > 1 else cfg.dt
    # left rectangle rule over [0, T)
    jerk = float(np.sum(c.d_ddd[:-1] ** 2) * step + np.sum(c.s_ddd[:-1] ** 2) * step)
    time = float(c.horizon)
    lane = float(c.d[-1] ** 2)
    speed = float((c.s_d[-1] - desired_speed) ** 2)
    k_j, k_t, k_l, k_s = cfg.weights
    total = k_j * jerk + k_t * time + k_l * lane + k_s * speed
    return CostBreakdown(jerk, time, lane, speed, total)


def check_feasible(c: TrajectoryCandidate, cfg: PlannerConfig) -> Feasibility:
    """
    Speed, accel and curvature limits apply from the second sample on: the first
    sample is the start state, which the planner inherits rather than chooses.
    Foldover and road bounds cover every sample.
    """
    max_speed, max_accel, max_curv = (v * (1.0 + LIMIT_TOL) for v in cfg.limits)
    if c.folded:
        return Feasibility(False, "foldover")
    if np.any(c.speed[1:] > max_speed):
        return Feasibility(False, "speed")
    if np.any(np.abs(c.accel[1:]) > max_accel):
        return Feasibility(False, "accel")
    if np.any(np.abs(c.curvature[1:]) > max_curv):
        return Feasibility(False, "curvature")
    if cfg.road_bounds is not None:
        lo, hi = cfg.road_bounds
        if np.any(c.d < lo) or np.any(c.d > hi):
            return Feasibility(False, "road")
    return Feasibility(True)


def check_collision(c: TrajectoryCandidate, obstacles: Sequence, safety_radius: float) -> bool:
    """
    True iff some sample (or lane-line point, when the candidate carries them) is
    strictly closer than radius + safety_radius to an obstacle centre.
    """
    if not obstacles:
        return False
    centers = np.array([o.center for o in obstacles], dtype=float)
    reach = np.array([o.radius for o in obstacles], dtype=float) + safety_radius
    xs, ys = c.x, c.y
    if c.hold_x is not None:
        xs, ys = np.concatenate([xs, c.hold_x]), np.concatenate([ys, c.hold_y])
    dist = np.hypot(xs[:, None] - centers[None, :, 0], ys[:, None] - centers[None, :, 1])
    return bool(np.any(dist < reach[None, :]))


def selection_key(c: TrajectoryCandidate) -> Tuple[float, float, float, int]:
    return c.cost_breakdown.total, abs(c.terminal_d), c.horizon, c.index


def plan(fs: FrenetState, path: Optional[ReferencePath], obstacles: Sequence, cfg: PlannerConfig,
         desired_speed: float) -> TrajectoryCandidate:
    candidates = generate_candidates(fs, cfg, path, desired_speed)
    rejected = Counter()
    survivors = []
    clearance = cfg.safety_radius + cfg.tracking_margin
    for c in candidates:
        c.cost_breakdown = cost(c, cfg, desired_speed)
        ok = check_feasible(c, cfg)
        if not ok:
            rejected[ok.reason] += 1
            continue
        if check_collision(c, obstacles, clearance):
            rejected["collision"] += 1
            continue
        survivors.append(c)
    if not survivors:
        detail = ", ".join(f"{k}={v}" for k, v in sorted(rejected.items()))
        raise NoFeasiblePath(f"all {len(candidates)} candidates rejected ({detail})")
    best = min(survivors, key=selection_key)
    log.debug("plan s=%.2f d=%.2f → d_T=%.1f T=%.1f total=%.3f (%d/%d survived)",
              fs.s, fs.d, best.terminal_d, best.horizon, best.cost_breakdown.total,
              len(survivors), len(candidates))
    return best
