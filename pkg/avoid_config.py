"""
avoid_config.py — run configuration, camera calibration, logging

Config is one JSON document with optional sections; each section is merged over
its defaults ({**DEFAULTS, **section}) and then turned into a validated dataclass.

  {
    "planner": {...}, "tracker": {...}, "vehicle": {...},
    "camera":  {...calibration keys...}, "sim": {...},
    "scenario": "path/to/scenario.json" | "case": 1, "out": "runs/", "plot": true
  }

Path resolution for load_config(): explicit path → $FRENET_AVOID_CONFIG → defaults.
"""

from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import dataclass, field
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Optional, Union

from dotenv import load_dotenv

from avoid_errors import ConfigError
from avoid_geometry import CameraExtrinsics, CameraIntrinsics, CameraModel
from avoid_planner import PlannerConfig
from avoid_tracker import TrackerConfig
from avoid_vehicle import VehicleParams

load_dotenv()

CONFIG_ENV = "FRENET_AVOID_CONFIG"
LOG_FILE = "frenet_avoid_run.log"

PLANNER_DEFAULTS = {
    "lateral_offsets": [0.0, 1.0, 2.0, 3.0, -1.0, -2.0, -3.0],
    "target_speeds": None,
    "horizons": [3.0, 4.0, 5.0],
    "dt": 0.1,
    "weights": [0.1, 1.0, 1.0, 1.0],
    "safety_radius": 1.0,
    "limits": [5.0, 2.0, 0.5],
    "road_bounds": None,
    "tracking_margin": 0.2,
    "hold_distance": 10.0,
}

TRACKER_DEFAULTS = {
    "base_lookahead": 2.0,
    "speed_gain": 0.5,
    "wheelbase": 1.7,
    "max_steering": 0.6,
}

VEHICLE_DEFAULTS = {
    "wheelbase": 1.7,
    "max_steering": 0.6,
    "max_accel": 2.0,
    "max_steering_rate": 0.8,
}

CAMERA_DEFAULTS = {
    "fx": 500.0, "fy": 500.0, "cx": 320.0, "cy": 240.0,
    "tilt_deg": 10.0,
    "height_m": 1.5,
    "t_x_m": 0.0, "t_y_m": 0.0,
    "antenna_offset_m": [0.0, 0.0],
    "image_width": 640, "image_height": 480,
    "hfov_deg": 60.0,
    "max_range_m": 15.0,
}

SIM_DEFAULTS = {
    "tick_hz": 50.0,
    "replan_hz": 16.0,
    "detector": "yolov11n",
    "straight_threshold": 0.03,
    "min_duration": 0.4,
    "completion_margin": 1.0,
    "obstacle_gate": 1.5,
}

SECTIONS = {
    "planner": PLANNER_DEFAULTS,
    "tracker": TRACKER_DEFAULTS,
    "vehicle": VEHICLE_DEFAULTS,
    "camera": CAMERA_DEFAULTS,
    "sim": SIM_DEFAULTS,
}
TOP_LEVEL_KEYS = set(SECTIONS) | {"scenario", "case", "out", "plot"}


def setup_logger(out_dir: Path, name: str = "frenet_avoid") -> logging.Logger:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    logger = logging.getLogger(name)
    if logger.handlers:
        return logger
    logger.setLevel(logging.INFO)
    fmt = logging.Formatter("%(asctime)s %(levelname)s %(message)s", datefmt="%Y-%m-%d %H:%M:%S")
    sh = logging.StreamHandler()
    sh.setFormatter(fmt)
    fh = RotatingFileHandler(out_dir / LOG_FILE, maxBytes=2_000_000, backupCount=5)
    fh.setFormatter(fmt)
    logger.addHandler(sh)
    logger.addHandler(fh)
    return logger


def output_dir() -> Path:
    return Path(os.getenv("OUTPUT_DIR", "Output"))


def _merge(section: str, values: Optional[dict]) -> dict:
    defaults = SECTIONS[section]
    values = values or {}
    if not isinstance(values, dict):
        raise ConfigError(f"'{section}' section must be an object")
    unknown = sorted(set(values) - set(defaults))
    if unknown:
        raise ConfigError(f"unknown key(s) in '{section}': {', '.join(unknown)}")
    return {**defaults, **values}


def _tuple(v):
    return None if v is None else tuple(v)


# ----------------------------
# Section builders
# ----------------------------
def planner_config(section: Optional[dict] = None) -> PlannerConfig:
    c = _merge("planner", section)
    try:
        return PlannerConfig(
            lateral_offsets=tuple(c["lateral_offsets"]),
            target_speeds=_tuple(c["target_speeds"]),
            horizons=tuple(c["horizons"]),
            dt=float(c["dt"]),
            weights=tuple(c["weights"]),
            safety_radius=float(c["safety_radius"]),
            limits=tuple(c["limits"]),
            road_bounds=_tuple(c["road_bounds"]),
            tracking_margin=float(c["tracking_margin"]),
            hold_distance=None if c["hold_distance"] is None else float(c["hold_distance"]),
        )
    except (TypeError, ValueError) as e:
        raise ConfigError(f"planner: {e}") from e


def tracker_config(section: Optional[dict] = None) -> TrackerConfig:
    c = _merge("tracker", section)
    try:
        return TrackerConfig(**{k: float(v) for k, v in c.items()})
    except (TypeError, ValueError) as e:
        raise ConfigError(f"tracker: {e}") from e


def vehicle_params(section: Optional[dict] = None) -> VehicleParams:
    c = _merge("vehicle", section)
    try:
        return VehicleParams(**{k: float(v) for k, v in c.items()})
    except (TypeError, ValueError) as e:
        raise ConfigError(f"vehicle: {e}") from e


def camera_model(section: Optional[dict] = None) -> CameraModel:
    c = _merge("camera", section)
    try:
        intr = CameraIntrinsics(float(c["fx"]), float(c["fy"]), float(c["cx"]), float(c["cy"]))
        extr = CameraExtrinsics(math.radians(float(c["tilt_deg"])), float(c["height_m"]),
                                (float(c["t_x_m"]), float(c["t_y_m"])))
        ant = c["antenna_offset_m"]
        if len(ant) != 2:
            raise ConfigError("antenna_offset_m must be [x, y]")
        return CameraModel(intr, extr,
                           image_width=int(c["image_width"]), image_height=int(c["image_height"]),
                           hfov=math.radians(float(c["hfov_deg"])), max_range=float(c["max_range_m"]),
                           antenna_offset=(float(ant[0]), float(ant[1])))
    except (TypeError, ValueError, KeyError) as e:
        raise ConfigError(f"camera: {e}") from e


def sim_settings(section: Optional[dict] = None) -> dict:
    c = _merge("sim", section)
    for key in ("tick_hz", "replan_hz", "min_duration", "completion_margin", "obstacle_gate"):
        if not float(c[key]) > 0:
            raise ConfigError(f"sim.{key} must be > 0, got {c[key]}")
    if float(c["straight_threshold"]) < 0:
        raise ConfigError("sim.straight_threshold must be >= 0")
    return c


def _read_json(path: Path) -> dict:
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    with open(path) as f:
        doc = json.load(f)
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return doc


def load_calibration(path: Union[str, Path]) -> CameraModel:
    """Calibration JSON: {fx, fy, cx, cy, tilt_deg, height_m, t_x_m, t_y_m, antenna_offset_m: [x, y]}."""
    doc = _read_json(Path(path))
    missing = [k for k in ("fx", "fy", "cx", "cy") if k not in doc]
    if missing:
        raise ConfigError(f"{path}: calibration missing {', '.join(missing)}")
    return camera_model(doc)


# ----------------------------
# Whole run
# ----------------------------
@dataclass(frozen=True)
class RunConfig:
    planner: PlannerConfig = field(default_factory=planner_config)
    tracker: TrackerConfig = field(default_factory=tracker_config)
    vehicle: VehicleParams = field(default_factory=vehicle_params)
    camera: CameraModel = field(default_factory=camera_model)
    sim: dict = field(default_factory=sim_settings)
    scenario: Optional[str] = None
    case: Optional[int] = None
    out_dir: Path = field(default_factory=output_dir)
    plot: bool = True
    source: Optional[Path] = None


def resolve_config_path(path: Optional[Union[str, Path]] = None) -> Optional[Path]:
    if path:
        return Path(path)
    env = os.getenv(CONFIG_ENV)
    return Path(env) if env else None


def load_config(path: Optional[Union[str, Path]] = None) -> RunConfig:
    src = resolve_config_path(path)
    doc = _read_json(src) if src is not None else {}
    unknown = sorted(set(doc) - TOP_LEVEL_KEYS)
    if unknown:
        raise ConfigError(f"unknown config section(s): {', '.join(unknown)}")
    scenario = doc.get("scenario")
    if scenario is not None and src is not None and not Path(scenario).is_absolute():
        scenario = str(src.parent / scenario)
    return RunConfig(
        planner=planner_config(doc.get("planner")),
        tracker=tracker_config(doc.get("tracker")),
        vehicle=vehicle_params(doc.get("vehicle")),
        camera=camera_model(doc.get("camera")),
        sim=sim_settings(doc.get("sim")),
        scenario=scenario,
        case=doc.get("case"),
        out_dir=Path(doc["out"]) if doc.get("out") else output_dir(),
        plot=bool(doc.get("plot", True)),
        source=src,
    )


def defaults_document() -> dict:
    return {name: dict(defaults) for name, defaults in SECTIONS.items()}
