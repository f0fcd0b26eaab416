"""
avoid_harness.py — closed-loop scenario runner

One virtual clock at tick_hz (50 Hz). Within a tick, in order and only when due:
  perception (depth/detector rate) → replan (16 Hz) → track (every tick) → plant step.
Nothing reads the wall clock, so a (scenario, configs, seed) triple always
produces the same log.

Also: builtin scenarios, scenario JSON, steering-phase classification, metrics,
CSV/JSON artifacts, seed/model sweeps and the replan-cycle benchmark.
"""

from __future__ import annotations

import json
import logging
import math
import time as wallclock
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from itertools import product
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from avoid_config import (
    SIM_DEFAULTS,
    camera_model,
    planner_config,
    tracker_config,
    vehicle_params,
)
from avoid_errors import ConfigError, NoFeasiblePath, OutOfRange, UnknownCase
from avoid_geometry import CameraModel, VehiclePose, camera_to_vehicle_transform, vehicle_to_global
from avoid_path import FrenetState, ReferencePath, build_path, cartesian_to_frenet, project
from avoid_perception import (
    Obstacle,
    ObstacleEstimate,
    ObstacleMap,
    builtin_detector,
    builtin_profile,
    perception_rate,
    sense,
)
from avoid_planner import PlannerConfig, TrajectoryCandidate, plan
from avoid_tracker import ControlCommand, TrackerConfig, track
from avoid_vehicle import VehicleParams, VehicleState, apply_limits, step

log = logging.getLogger("frenet_avoid.harness")

STRAIGHT, AVOID_LEFT, RETURN_RIGHT = "Straight", "AvoidLeft", "ReturnRight"
PHASE_LABELS = (STRAIGHT, AVOID_LEFT, RETURN_RIGHT)
FIVE_STAGE = [STRAIGHT, AVOID_LEFT, STRAIGHT, RETURN_RIGHT, STRAIGHT]

VEHICLE_WIDTH = 1.2          # golf-cart class
PASSAGE_MARGIN = 0.5         # per side, case 3
PROJECTION_WINDOW = 10.0
COUNTER_STEER_PAUSE = 2.0   # × min_duration


# ----------------------------
# Scenarios
# ----------------------------
@dataclass(frozen=True)
class Scenario:
    route: Tuple[Tuple[float, float], ...]
    obstacles: Tuple[Obstacle, ...]
    initial_state: VehicleState
    desired_speed: float
    depth_model: str = "dav2"
    duration: float = 40.0
    seed: int = 0
    name: str = "custom"
    road_bounds: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        if not self.duration > 0:
            raise ConfigError(f"duration must be > 0, got {self.duration}")
        if not self.desired_speed > 0:
            raise ConfigError(f"desired_speed must be > 0, got {self.desired_speed}")
        object.__setattr__(self, "route", tuple((float(x), float(y)) for x, y in self.route))
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        builtin_profile(self.depth_model)
        build_path(self.route)

    def with_overrides(self, depth_model: Optional[str] = None, seed: Optional[int] = None) -> "Scenario":
        changes = {}
        if depth_model is not None:
            changes["depth_model"] = depth_model
        if seed is not None:
            changes["seed"] = int(seed)
        return replace(self, **changes) if changes else self


def _straight_route(length: float = 70.0) -> Tuple[Tuple[float, float], ...]:
    return (0.0, 0.0), (length, 0.0)


def _smoothstep(u: np.ndarray) -> np.ndarray:
    u = np.clip(u, 0.0, 1.0)
    return u ** 3 * (10.0 - 15.0 * u + 6.0 * u ** 2)


def _shifted_route(shift: float, start: float, ramp: float, hold: float,
                   length: float) -> Tuple[Tuple[float, float], ...]:
    """Straight route that steps `shift` to the left over `ramp` metres, holds, and steps back."""
    xs = np.arange(0.0, length + 0.5, 1.0)
    ys = shift * (_smoothstep((xs - start) / ramp) - _smoothstep((xs - start - ramp - hold) / ramp))
    return tuple(zip(xs.tolist(), ys.tolist()))


def builtin_scenario(case: int) -> Scenario:
    """
    Constructed layouts (right-hand lane, room to the left):
      1  one obstacle on the centerline of a straight 70 m route
      2  two obstacles on alternating sides of the centerline, 15 m apart
      3  a pair leaving a 2.8 m gap centred on the route; the route steps 2 m left
         into the passage and back, so the gap is reached through a lateral move
    """
    try:
        case = int(case)
    except (TypeError, ValueError):
        raise UnknownCase(f"unknown case {case!r}; valid: 1, 2, 3") from None
    route = _straight_route()
    if case == 1:
        obstacles = (Obstacle((25.0, 0.0), 0.5),)
    elif case == 2:
        obstacles = (Obstacle((20.0, -0.3), 0.4), Obstacle((35.0, 0.2), 0.3))
    elif case == 3:
        shift, half_gap, r = 2.0, 1.4, 0.5
        route = _shifted_route(shift, start=30.0, ramp=10.0, hold=24.0, length=90.0)
        obstacles = (Obstacle((56.0, shift + half_gap + r), r), Obstacle((56.0, shift - half_gap - r), r))
    else:
        raise UnknownCase(f"unknown case {case}; valid: 1, 2, 3")
    speed = 2.78
    return Scenario(route=route, obstacles=obstacles,
                    initial_state=VehicleState(0.0, 0.0, 0.0, speed), desired_speed=speed,
                    depth_model="dav2", duration=40.0, seed=0, name=f"case{case}",
                    road_bounds=(-1.5, 3.5))


def scenario_from_dict(doc: dict, name: str = "custom") -> Scenario:
    try:
        init = doc.get("initial", {})
        obstacles = tuple(Obstacle((float(o["x"]), float(o["y"])), float(o["radius"]),
                                   float(o.get("height", 1.5)), str(o.get("class", "vehicle")))
                          for o in doc.get("obstacles", []))
        bounds = doc.get("road_bounds")
        return Scenario(
            route=tuple(tuple(p) for p in doc["route"]),
            obstacles=obstacles,
            initial_state=VehicleState(float(init.get("x", 0.0)), float(init.get("y", 0.0)),
                                       math.radians(float(init.get("heading_deg", 0.0))),
                                       float(init.get("speed", 0.0))),
            desired_speed=float(doc["desired_speed"]),
            depth_model=str(doc.get("depth_model", "dav2")),
            duration=float(doc["duration"]),
            seed=int(doc.get("seed", 0)),
            name=str(doc.get("name", name)),
            road_bounds=tuple(bounds) if bounds is not None else None,
        )
    except KeyError as e:
        raise ConfigError(f"scenario missing field {e}") from e
    except (TypeError, ValueError) as e:
        raise ConfigError(f"invalid scenario: {e}") from e


def scenario_to_dict(sc: Scenario) -> dict:
    st = sc.initial_state
    return {
        "name": sc.name,
        "route": [list(p) for p in sc.route],
        "obstacles": [{"x": o.center[0], "y": o.center[1], "radius": o.radius,
                       "height": o.height, "class": o.class_label} for o in sc.obstacles],
        "initial": {"x": st.x, "y": st.y, "heading_deg": math.degrees(st.heading), "speed": st.speed},
        "desired_speed": sc.desired_speed,
        "depth_model": sc.depth_model,
        "duration": sc.duration,
        "seed": sc.seed,
        "road_bounds": list(sc.road_bounds) if sc.road_bounds is not None else None,
    }


def load_scenario(path: Union[str, Path]) -> Scenario:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"scenario file not found: {path}")
    with open(path) as f:
        doc = json.load(f)
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: scenario must be a JSON object")
    return scenario_from_dict(doc, name=path.stem)


# ----------------------------
# Log types
# ----------------------------
@dataclass(frozen=True)
class TickRecord:
    time: float
    state: VehicleState
    steering: float
    plan_id: Optional[int]
    estimates: Tuple[ObstacleEstimate, ...]
    target_speed: Optional[float] = None   # commanded, after rate limits


@dataclass(frozen=True)
class PlanRecord:
    plan_id: int
    time: float
    trajectory: TrajectoryCandidate
    obstacles: Tuple[ObstacleEstimate, ...]


@dataclass
class SimulationLog:
    scenario: Scenario
    tick: float
    records: List[TickRecord] = field(default_factory=list)
    plans: List[PlanRecord] = field(default_factory=list)
    completed: bool = False
    collision: bool = False
    aborted: bool = False
    abort_reason: Optional[str] = None
    end_reason: str = "duration"

    def times(self) -> np.ndarray:
        return np.array([r.time for r in self.records])

    def steering_series(self) -> pd.Series:
        return pd.Series([r.steering for r in self.records], index=self.times(), name="steering")

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "t": [r.time for r in self.records],
            "x": [r.state.x for r in self.records],
            "y": [r.state.y for r in self.records],
            "heading": [r.state.heading for r in self.records],
            "speed": [r.state.speed for r in self.records],
            "steering": [r.steering for r in self.records],
        })


@dataclass(frozen=True)
class PhaseSegment:
    label: str
    start: float
    end: float


@dataclass(frozen=True)
class Metrics:
    max_lateral_error: float
    min_clearance: Optional[float]      # None when the scene has no obstacles
    collision: bool
    phase_sequence: Tuple[str, ...]
    completed: bool
    aborted: bool = False
    abort_reason: Optional[str] = None
    end_time: float = 0.0
    plans: int = 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["phase_sequence"] = list(self.phase_sequence)
        for k in ("max_lateral_error", "min_clearance", "end_time"):
            if d[k] is not None:
                d[k] = round(float(d[k]), 6)
        return d


# ----------------------------
# Closed loop
# ----------------------------
def _due(k: int, rate: float, tick_hz: float) -> bool:
    return k == 0 or math.floor(k * rate / tick_hz) != math.floor((k - 1) * rate / tick_hz)


def _gps_fix(state: VehicleState, cam: CameraModel) -> VehiclePose:
    """Pose as reported by the antenna, which sits at cam.antenna_offset in the vehicle frame."""
    origin = VehiclePose(state.x, state.y, state.heading)
    ax, ay = cam.antenna_offset
    fix = vehicle_to_global((ax, ay, 0.0), origin)
    return VehiclePose(fix.x, fix.y, state.heading)


def _true_clearance(state: VehicleState, obstacles: Sequence[Obstacle]) -> float:
    if not obstacles:
        return math.inf
    return min(math.hypot(state.x - o.center[0], state.y - o.center[1]) - o.radius for o in obstacles)


def run(scenario: Scenario, planner_cfg: Optional[PlannerConfig] = None,
        tracker_cfg: Optional[TrackerConfig] = None, params: Optional[VehicleParams] = None,
        camera: Optional[CameraModel] = None, sim: Optional[dict] = None) -> SimulationLog:
    planner_cfg = planner_cfg or planner_config()
    tracker_cfg = tracker_cfg or tracker_config()
    params = params or vehicle_params()
    camera = camera or camera_model()
    sim = {**SIM_DEFAULTS, **(sim or {})}
    if planner_cfg.road_bounds is None and scenario.road_bounds is not None:
        planner_cfg = replace(planner_cfg, road_bounds=scenario.road_bounds)

    tick_hz = float(sim["tick_hz"])
    replan_hz = float(sim["replan_hz"])
    dt = 1.0 / tick_hz
    path = build_path(scenario.route)
    profile = builtin_profile(scenario.depth_model)
    sense_hz = perception_rate(profile, builtin_detector(sim["detector"]))
    transform = camera_to_vehicle_transform(camera.extrinsics)
    rng = np.random.default_rng(scenario.seed)
    obstacle_map = ObstacleMap(gate=float(sim["obstacle_gate"]))
    finish_s = path.total_length - float(sim["completion_margin"])

    out = SimulationLog(scenario=scenario, tick=dt)
    state = scenario.initial_state
    prev_cmd = ControlCommand(0.0, state.speed)
    current: Optional[PlanRecord] = None
    known: Tuple[ObstacleEstimate, ...] = ()
    s_hint: Optional[float] = None
    n_ticks = int(round(scenario.duration * tick_hz))
    log.info("run %s: model=%s seed=%d perception=%.0f Hz replan=%.0f Hz",
             scenario.name, profile.model_name, scenario.seed, sense_hz, replan_hz)

    for k in range(n_ticks + 1):
        t = k / tick_hz
        try:
            s_now = project(path, state.position, s_hint, PROJECTION_WINDOW if s_hint is not None else None)
        except OutOfRange:
            s_now = path.total_length
        s_hint = s_now

        if not out.aborted:
            if s_now >= finish_s:
                out.records.append(TickRecord(t, state, prev_cmd.steering, current and current.plan_id, known,
                                              prev_cmd.target_speed))
                out.completed, out.end_reason = True, "completed"
                break

            if _due(k, sense_hz, tick_hz):
                obstacle_map.update(sense(scenario.obstacles, _gps_fix(state, camera), camera, profile, t, rng,
                                          transform))
                known = tuple(obstacle_map.snapshot(t))

            if _due(k, replan_hz, tick_hz):
                fs = _start_state(path, state, current, t, s_now)
                try:
                    traj = plan(fs, path, known, planner_cfg, scenario.desired_speed)
                except NoFeasiblePath as e:
                    log.warning("planner abort at t=%.2f s: %s; commanding zero speed", t, e)
                    out.aborted, out.abort_reason, out.end_reason = True, str(e), "aborted"
                else:
                    current = PlanRecord(len(out.plans), t, traj, known)
                    out.plans.append(current)

        if out.aborted:
            cmd = apply_limits(prev_cmd, ControlCommand(prev_cmd.steering, 0.0), dt, params)
            out.records.append(TickRecord(t, state, cmd.steering, None, known, cmd.target_speed))
        else:
            cmd = apply_limits(prev_cmd, track(current.trajectory, state, tracker_cfg), dt, params)
            out.records.append(TickRecord(t, state, cmd.steering, current.plan_id, known, cmd.target_speed))

        if _true_clearance(state, scenario.obstacles) < 0:
            out.collision, out.end_reason = True, "collision"
            log.warning("collision at t=%.2f s (%.2f, %.2f)", t, state.x, state.y)
            break
        if out.aborted and state.speed == 0.0:
            log.info("stopped at t=%.2f s (%.2f, %.2f)", t, state.x, state.y)
            break

        state = step(state, cmd, dt, params)
        prev_cmd = cmd

    log.info("run %s ended: %s after %.2f s, %d plans", scenario.name, out.end_reason,
             out.records[-1].time if out.records else 0.0, len(out.plans))
    return out


def _start_state(path: ReferencePath, state: VehicleState, current: Optional[PlanRecord], t: float,
                 s_now: float) -> FrenetState:
    """Measured position and velocity; accelerations carried over from the plan being tracked."""
    fs = cartesian_to_frenet(path, state.position, state.speed, state.heading, s_hint=s_now,
                             window=PROJECTION_WINDOW)
    if current is None:
        return replace(fs, s_ddot=0.0, d_ddot=0.0)
    traj = current.trajectory
    tau = min(max(t - current.time, 0.0), traj.horizon)
    return replace(fs, s_ddot=float(traj.longitudinal.evaluate(tau, 2)),
                   d_ddot=float(traj.lateral.evaluate(tau, 2)))


# ----------------------------
# Phases
# ----------------------------
def _runs(labels: List[str]) -> List[List]:
    runs = []
    for i, lab in enumerate(labels):
        if runs and runs[-1][0] == lab:
            runs[-1][2] = i + 1
        else:
            runs.append([lab, i, i + 1])
    return runs


def classify_phases(steering: pd.Series, straight_threshold: float = 0.03,
                    min_duration: float = 0.4) -> List[PhaseSegment]:
    """
    Steering (rad, indexed by time) → Straight / AvoidLeft / ReturnRight bands.

    Inside a maneuver (straight pauses shorter than min_duration do not end it, nor
    do pauses up to twice that long across which the steering changes sign) a
    sample is AvoidLeft while the steering integrated since the maneuver began is
    positive and ReturnRight while it is negative. Runs shorter than min_duration
    are then folded into the previous run (the next one for the first run).
    """
    if len(steering) == 0:
        return []
    times = np.asarray(steering.index, dtype=float)
    delta = np.asarray(steering.values, dtype=float)
    n = len(delta)
    ends = np.append(times[1:], times[-1])
    span = lambda i, j: ends[j - 1] - times[i]  # noqa: E731

    active = np.abs(delta) > straight_threshold
    # bridge straight pauses between two maneuver samples: short ones, and the
    # somewhat longer pause where the steering flips into its counter-steer
    for lab, i, j in _runs(["m" if a else "s" for a in active]):
        if lab != "s" or i == 0 or j == n:
            continue
        pause = span(i, j)
        if pause < min_duration or (delta[i - 1] * delta[j] < 0 and pause < COUNTER_STEER_PAUSE * min_duration):
            active[i:j] = True

    labels: List[str] = []
    acc, prev = 0.0, STRAIGHT
    for i in range(n):
        if not active[i]:
            acc, prev = 0.0, STRAIGHT
            labels.append(STRAIGHT)
            continue
        step_dt = ends[i] - times[i]
        acc += delta[i] * (step_dt if step_dt > 0 else 1.0)
        if acc > 0:
            prev = AVOID_LEFT
        elif acc < 0:
            prev = RETURN_RIGHT
        elif prev == STRAIGHT:
            prev = AVOID_LEFT if delta[i] >= 0 else RETURN_RIGHT
        labels.append(prev)

    runs = _runs(labels)
    changed = True
    while changed and len(runs) > 1:
        changed = False
        for r, (lab, i, j) in enumerate(runs):
            if span(i, j) < min_duration:
                if r == 0:
                    runs[1][1] = i
                else:
                    runs[r - 1][2] = j
                del runs[r]
                merged = []
                for run_ in runs:
                    if merged and merged[-1][0] == run_[0]:
                        merged[-1][2] = run_[2]
                    else:
                        merged.append(run_)
                runs = merged
                changed = True
                break

    segments = []
    for r, (lab, i, j) in enumerate(runs):
        end = times[runs[r + 1][1]] if r + 1 < len(runs) else times[-1]
        segments.append(PhaseSegment(lab, float(times[i]), float(end)))
    return segments


def phase_sequence(segments: Sequence[PhaseSegment]) -> List[str]:
    seq: List[str] = []
    for seg in segments:
        if not seq or seq[-1] != seg.label:
            seq.append(seg.label)
    return seq


def phase_column(times: np.ndarray, segments: Sequence[PhaseSegment]) -> List[str]:
    out, k = [], 0
    for t in times:
        while k + 1 < len(segments) and t >= segments[k + 1].start:
            k += 1
        out.append(segments[k].label if segments else STRAIGHT)
    return out


def matches_five_stage(sequence: Sequence[str], middle_optional: bool = False) -> bool:
    seq = list(sequence)
    if seq == FIVE_STAGE:
        return True
    return middle_optional and seq == [STRAIGHT, AVOID_LEFT, RETURN_RIGHT, STRAIGHT]


# ----------------------------
# Metrics
# ----------------------------
def compute_metrics(sim_log: SimulationLog, scenario: Scenario, path: Optional[ReferencePath] = None,
                    safety_radius: float = 1.0, straight_threshold: float = SIM_DEFAULTS["straight_threshold"],
                    min_duration: float = SIM_DEFAULTS["min_duration"]) -> Metrics:
    path = path or build_path(scenario.route)
    max_lat, s_hint = 0.0, None
    clearance = math.inf
    for rec in sim_log.records:
        c = _true_clearance(rec.state, scenario.obstacles)
        clearance = min(clearance, c)
        try:
            fs = cartesian_to_frenet(path, rec.state.position, rec.state.speed, rec.state.heading,
                                     s_hint=s_hint, window=PROJECTION_WINDOW if s_hint is not None else None)
        except OutOfRange:
            continue
        s_hint = fs.s
        if c > 2.0 * safety_radius:
            max_lat = max(max_lat, abs(fs.d))

    segments = classify_phases(sim_log.steering_series(), straight_threshold, min_duration)
    return Metrics(
        max_lateral_error=max_lat,
        min_clearance=None if math.isinf(clearance) else clearance,
        collision=bool(clearance < 0),
        phase_sequence=tuple(phase_sequence(segments)),
        completed=sim_log.completed,
        aborted=sim_log.aborted,
        abort_reason=sim_log.abort_reason,
        end_time=sim_log.records[-1].time if sim_log.records else 0.0,
        plans=len(sim_log.plans),
    )


# ----------------------------
# Artifacts
# ----------------------------
def write_artifacts(sim_log: SimulationLog, metrics: Metrics, out_dir: Union[str, Path],
                    straight_threshold: float = SIM_DEFAULTS["straight_threshold"],
                    min_duration: float = SIM_DEFAULTS["min_duration"]) -> Dict[str, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    segments = classify_phases(sim_log.steering_series(), straight_threshold, min_duration)

    df = sim_log.to_frame()
    df["phase"] = phase_column(df["t"].to_numpy(), segments)
    paths = {"log": out_dir / "log.csv", "metrics": out_dir / "metrics.json", "scenario": out_dir / "scenario.json"}
    df.to_csv(paths["log"], index=False, float_format="%.6f")
    with open(paths["metrics"], "w") as f:
        json.dump(metrics.to_dict(), f, indent=2, sort_keys=True)
        f.write("\n")
    with open(paths["scenario"], "w") as f:
        json.dump(scenario_to_dict(sim_log.scenario), f, indent=2, sort_keys=True)
        f.write("\n")
    return paths


def read_log(path: Union[str, Path]) -> pd.DataFrame:
    df = pd.read_csv(path)
    missing = {"t", "x", "y", "heading", "speed", "steering", "phase"} - set(df.columns)
    if missing:
        raise ConfigError(f"{path}: log missing columns {sorted(missing)}")
    return df


# ----------------------------
# Batches
# ----------------------------
@dataclass(frozen=True)
class RunSettings:
    planner: PlannerConfig = field(default_factory=planner_config)
    tracker: TrackerConfig = field(default_factory=tracker_config)
    vehicle: VehicleParams = field(default_factory=vehicle_params)
    camera: CameraModel = field(default_factory=camera_model)
    sim: dict = field(default_factory=lambda: dict(SIM_DEFAULTS))


def simulate(scenario: Scenario, settings: RunSettings) -> Tuple[SimulationLog, Metrics]:
    sim_log = run(scenario, settings.planner, settings.tracker, settings.vehicle, settings.camera, settings.sim)
    metrics = compute_metrics(sim_log, scenario, safety_radius=settings.planner.safety_radius,
                              straight_threshold=settings.sim["straight_threshold"],
                              min_duration=settings.sim["min_duration"])
    return sim_log, metrics


def _sweep_job(job) -> dict:
    case, model, seed, settings = job
    sc = builtin_scenario(case).with_overrides(model, seed)
    _, m = simulate(sc, settings)
    return {
        "case": case, "model": model, "seed": seed,
        "collision": m.collision, "min_clearance": m.min_clearance,
        "max_lateral_error": m.max_lateral_error, "completed": m.completed,
        "aborted": m.aborted, "phases": "-".join(m.phase_sequence),
        "five_stage": matches_five_stage(m.phase_sequence, middle_optional=(case == 1)),
    }


def sweep(cases: Sequence[int], models: Sequence[str], seeds: Sequence[int],
          settings: Optional[RunSettings] = None, workers: int = 1) -> pd.DataFrame:
    """Every (case, model, seed) combination; rows always in that nested order."""
    settings = settings or RunSettings()
    for m in models:
        builtin_profile(m)
    jobs = [(c, m, s, settings) for c, m, s in product(cases, models, seeds)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_job, jobs))
    else:
        rows = [_sweep_job(j) for j in jobs]
    return pd.DataFrame(rows, columns=["case", "model", "seed", "collision", "min_clearance",
                                       "max_lateral_error", "completed", "aborted", "phases", "five_stage"])


def _simulate_job(job):
    scenario, settings = job
    return simulate(scenario, settings)


def run_seeds(scenario: Scenario, seeds: Sequence[int], settings: Optional[RunSettings] = None,
              workers: int = 1) -> List[Tuple[SimulationLog, Metrics]]:
    settings = settings or RunSettings()
    jobs = [(scenario.with_overrides(seed=s), settings) for s in seeds]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_simulate_job, jobs))
    return [_simulate_job(j) for j in jobs]


def time_replan_cycle(settings: Optional[RunSettings] = None, n_obstacles: int = 3,
                      repeats: int = 20, seed: int = 0) -> Dict[str, float]:
    """Wall-clock of one sense + fuse + plan cycle on the default grid."""
    settings = settings or RunSettings()
    path = build_path(_straight_route())
    rng = np.random.default_rng(seed)
    world = [Obstacle((8.0 + 3.0 * i, (-1) ** i * 0.5 * i), 0.4) for i in range(n_obstacles)]
    profile = builtin_profile("dav2")
    pose = VehiclePose(0.0, 0.0, 0.0)
    transform = camera_to_vehicle_transform(settings.camera.extrinsics)
    fs = cartesian_to_frenet(path, (0.0, 0.0), 2.78, 0.0)
    cfg = replace(settings.planner, road_bounds=None)
    samples = []
    for _ in range(repeats):
        t0 = wallclock.perf_counter()
        omap = ObstacleMap()
        omap.update(sense(world, pose, settings.camera, profile, 0.0, rng, transform))
        try:
            plan(fs, path, omap.snapshot(), cfg, 2.78)
        except NoFeasiblePath:
            pass
        samples.append(wallclock.perf_counter() - t0)
    ms = np.array(samples) * 1000.0
    return {"repeats": repeats, "obstacles": n_obstacles,
            "mean_ms": float(ms.mean()), "median_ms": float(np.median(ms)), "max_ms": float(ms.max())}
