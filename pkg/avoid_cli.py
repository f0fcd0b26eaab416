#!/usr/bin/env python3
"""
avoid_cli.py — frenet-avoid command line

  simulate   closed-loop run → log.csv, metrics.json, steering.svg
  transform  pixel + depth + GPS pose → global point (or --project the other way)
  profiles   depth-model error tables and rates
  plan       one-shot planner dump (JSON)
  sweep      cases × models × seeds → sweep.csv
  bench      wall-clock of one sense + plan cycle

Headings on the command line are degrees counter-clockwise from +x (east).
A compass reading (clockwise from north) can be given with --compass-deg instead.

Exit status: 0 ok, 1 run collided / aborted / did not finish, 2 bad input.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, replace
from pathlib import Path
from typing import List, Optional

import numpy as np

from avoid_config import defaults_document, load_calibration, load_config, setup_logger
from avoid_errors import AvoidError, ConfigError, NonPositiveDepth
from avoid_geometry import (
    VehiclePose,
    camera_to_pixel,
    camera_to_vehicle_transform,
    global_to_vehicle,
    heading_from_compass,
    localize_obstacle,
    vehicle_to_camera,
)
from avoid_harness import (
    RunSettings,
    builtin_scenario,
    classify_phases,
    load_scenario,
    run_seeds,
    sweep,
    time_replan_cycle,
    write_artifacts,
)
from avoid_path import build_path, cartesian_to_frenet
from avoid_perception import (
    PROFILE_TITLES,
    ObstacleEstimate,
    builtin_profile,
    error_at,
    offset_error_at,
    profile_names,
    rank_profiles,
)
from avoid_planner import plan

REPLAN_BUDGET_MS = 1000.0 / 16.0


def log(msg: str, err: bool = False):
    print(msg, file=sys.stderr if err else sys.stdout, flush=True)


# ----------------------------
# helpers
# ----------------------------
def _run_config(args):
    cfg = load_config(args.config)
    settings = RunSettings(cfg.planner, cfg.tracker, cfg.vehicle, cfg.camera, cfg.sim)
    return cfg, settings


def _scenario(args, cfg):
    if getattr(args, "scenario", None):
        sc = load_scenario(args.scenario)
    elif getattr(args, "case", None) is not None:
        sc = builtin_scenario(args.case)
    elif cfg.scenario:
        sc = load_scenario(cfg.scenario)
    else:
        sc = builtin_scenario(cfg.case if cfg.case is not None else 1)
    if getattr(args, "depth_model", None):
        builtin_profile(args.depth_model)
    return sc.with_overrides(getattr(args, "depth_model", None), getattr(args, "seed", None))


def _pose(args) -> VehiclePose:
    x, y, heading_deg = args.pose
    heading = heading_from_compass(args.compass_deg) if args.compass_deg is not None else math.radians(heading_deg)
    return VehiclePose(x, y, heading)


# ----------------------------
# subcommands
# ----------------------------
def cmd_simulate(args) -> int:
    cfg, settings = _run_config(args)
    scenario = _scenario(args, cfg)
    out_dir = Path(args.out) if args.out else cfg.out_dir
    plot = cfg.plot if args.plot is None else args.plot
    setup_logger(out_dir)

    seeds = [scenario.seed + i for i in range(max(args.repeat, 1))]
    log(f"🚀 {scenario.name}: model={scenario.depth_model} seeds={seeds} → {out_dir}")
    results = run_seeds(scenario, seeds, settings, workers=args.workers)

    status = 0
    for seed, (sim_log, metrics) in zip(seeds, results):
        run_dir = out_dir if len(seeds) == 1 else out_dir / f"seed_{seed}"
        write_artifacts(sim_log, metrics, run_dir, settings.sim["straight_threshold"], settings.sim["min_duration"])
        if plot:
            from avoid_plot import plot_steering
            segments = classify_phases(sim_log.steering_series(), settings.sim["straight_threshold"],
                                       settings.sim["min_duration"])
            plot_steering(sim_log.times(), [r.steering for r in sim_log.records], segments,
                          run_dir / "steering.svg", title=f"{scenario.name} · {scenario.depth_model} · seed {seed}")
        clearance = "n/a" if metrics.min_clearance is None else f"{metrics.min_clearance:.3f} m"
        phases = " → ".join(metrics.phase_sequence)
        if metrics.collision or metrics.aborted or not metrics.completed:
            status = 1
            why = "collision" if metrics.collision else ("abort: " + str(metrics.abort_reason)
                                                         if metrics.aborted else "route not finished")
            log(f"❌ seed {seed}: {why} (clearance {clearance})")
        else:
            log(f"✅ seed {seed}: completed, min clearance {clearance}, max lateral error "
                f"{metrics.max_lateral_error:.3f} m")
        log(f"📈 phases: {phases}")
    log(f"📊 artifacts in {out_dir}")
    return status


def cmd_transform(args) -> int:
    cam = load_calibration(args.calibration) if args.calibration else load_config(args.config).camera
    pose = _pose(args)
    t = camera_to_vehicle_transform(cam.extrinsics)

    if args.project is not None:
        p_veh = global_to_vehicle(args.project, pose, cam.antenna_offset)
        p_cam = vehicle_to_camera(p_veh, t)
        px = camera_to_pixel(p_cam, cam.intrinsics)
        result = {"u": px.u, "v": px.v, "depth": px.depth,
                  "vehicle": list(p_veh), "camera": list(p_cam)}
        log(f"📷 pixel ({px.u:.4f}, {px.v:.4f}) depth {px.depth:.4f} m")
    else:
        if args.pixel is None or args.depth is None:
            raise ConfigError("transform needs --pixel U V and --depth D (or --project X Y Z)")
        if not args.depth > 0:
            raise NonPositiveDepth(f"--depth must be > 0, got {args.depth}")
        depth_map = np.array([[float(args.depth)]])
        g = localize_obstacle(tuple(args.pixel), depth_map, (0, 0, 1, 1), cam.intrinsics, cam.extrinsics,
                              pose, cam.antenna_offset, t)
        result = {"x": g.x, "y": g.y, "z": g.z}
        log(f"📍 global ({g.x:.4f}, {g.y:.4f}, {g.z:.4f})")
    print(json.dumps(result), flush=True)
    return 0


def cmd_profiles(args) -> int:
    names = [args.depth_model] if args.depth_model else profile_names()
    profiles = [builtin_profile(n) for n in names]
    depth_rank = rank_profiles(profiles, "depth")
    offset_rank = rank_profiles(profiles, "offset")

    def mark(rank, knot, name):
        best = rank.get(knot)
        if not best:
            return " "
        return "*" if best[0] == name else ("+" if best[1] == name else " ")

    log("📊 mean absolute error (m); * best, + second best")
    depth_knots = [k for k, _ in profiles[0].depth_error_table]
    offset_knots = [k for k, _ in profiles[0].offset_error_table]
    header = "model   fps | " + " ".join(f"D{k:>5g}m " for k in depth_knots) + "| " + \
        " ".join(f"O{k:>4g}m " for k in offset_knots)
    log(header)
    for p in profiles:
        depth = " ".join(f"{error_at(p, k):7.3f}{mark(depth_rank, k, p.model_name)}" for k in depth_knots)
        offset = " ".join(f"{offset_error_at(p, k):6.3f}{mark(offset_rank, k, p.model_name)}" for k in offset_knots)
        log(f"{p.model_name:<6} {p.fps:>4g} | {depth} | {offset}   ({PROFILE_TITLES.get(p.model_name, '')})")
    return 0


def cmd_plan(args) -> int:
    cfg, settings = _run_config(args)
    scenario = _scenario(args, cfg)
    path = build_path(scenario.route)
    st = scenario.initial_state
    fs = cartesian_to_frenet(path, st.position, st.speed, st.heading)
    planner = settings.planner
    if planner.road_bounds is None and scenario.road_bounds is not None:
        planner = replace(planner, road_bounds=scenario.road_bounds)
    obstacles = [ObstacleEstimate(o.center, o.radius) for o in scenario.obstacles]
    best = plan(fs, path, obstacles, planner, scenario.desired_speed)
    doc = {"scenario": scenario.name, "state": asdict(fs), "winner": best.to_dict()}
    text = json.dumps(doc, indent=2, sort_keys=True)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "plan.json").write_text(text + "\n")
        log(f"✅ plan written to {out / 'plan.json'}")
    else:
        print(text, flush=True)
    return 0


def cmd_sweep(args) -> int:
    cfg, settings = _run_config(args)
    out_dir = Path(args.out) if args.out else cfg.out_dir
    setup_logger(out_dir)
    seeds = list(range(args.seeds))
    log(f"🚀 sweep cases={args.cases} models={args.models} seeds={len(seeds)}")
    df = sweep(args.cases, args.models, seeds, settings, workers=args.workers)
    out_dir.mkdir(parents=True, exist_ok=True)
    df.to_csv(out_dir / "sweep.csv", index=False, float_format="%.6f")
    summary = df.groupby(["case", "model"]).agg(
        runs=("seed", "count"), collisions=("collision", "sum"),
        min_clearance=("min_clearance", "min"), five_stage=("five_stage", "mean"))
    log("📊 sweep summary")
    log(summary.to_string())
    log(f"✅ {out_dir / 'sweep.csv'}")
    return 1 if df["collision"].any() or df["aborted"].any() else 0


def cmd_bench(args) -> int:
    _, settings = _run_config(args)
    res = time_replan_cycle(settings, n_obstacles=args.obstacles, repeats=args.repeats)
    ok = res["median_ms"] <= REPLAN_BUDGET_MS
    log(f"{'✅' if ok else '⚠️'} replan cycle: median {res['median_ms']:.1f} ms, max {res['max_ms']:.1f} ms "
        f"(budget {REPLAN_BUDGET_MS:.1f} ms, {res['obstacles']} obstacles, {res['repeats']} repeats)")
    return 0


# ----------------------------
# parser
# ----------------------------
def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="frenet-avoid", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--config", help="run config JSON (falls back to $FRENET_AVOID_CONFIG)")
    ap.add_argument("--print-defaults", action="store_true", help="print every default and exit")
    sub = ap.add_subparsers(dest="command")

    def scenario_flags(p):
        g = p.add_mutually_exclusive_group()
        g.add_argument("--case", type=int, choices=[1, 2, 3])
        g.add_argument("--scenario", help="scenario JSON")
        p.add_argument("--depth-model", dest="depth_model", help="dav2 | midas | mono2 | ideal")
        p.add_argument("--seed", type=int)

    sp = sub.add_parser("simulate", help="closed-loop run")
    scenario_flags(sp)
    sp.add_argument("--out", help="artifact directory (default $OUTPUT_DIR or Output/)")
    sp.add_argument("--repeat", type=int, default=1, help="run N consecutive seeds")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--plot", dest="plot", action="store_true", default=None)
    sp.add_argument("--no-plot", dest="plot", action="store_false")
    sp.set_defaults(func=cmd_simulate)

    tp = sub.add_parser("transform", help="pixel + depth → global point")
    tp.add_argument("--calibration", help="calibration JSON")
    tp.add_argument("--pixel", type=float, nargs=2, metavar=("U", "V"))
    tp.add_argument("--depth", type=float)
    tp.add_argument("--pose", type=float, nargs=3, metavar=("X", "Y", "HEADING_DEG"), default=[0.0, 0.0, 0.0])
    tp.add_argument("--compass-deg", dest="compass_deg", type=float,
                    help="compass heading (deg clockwise from north); overrides the pose heading")
    tp.add_argument("--project", type=float, nargs=3, metavar=("X", "Y", "Z"),
                    help="forward direction: global point → pixel + depth")
    tp.set_defaults(func=cmd_transform)

    pp = sub.add_parser("profiles", help="print depth error tables")
    pp.add_argument("--depth-model", dest="depth_model")
    pp.set_defaults(func=cmd_profiles)

    lp = sub.add_parser("plan", help="one-shot planner dump")
    scenario_flags(lp)
    lp.add_argument("--out")
    lp.set_defaults(func=cmd_plan)

    wp = sub.add_parser("sweep", help="cases × models × seeds")
    wp.add_argument("--cases", type=int, nargs="+", default=[1, 2, 3])
    wp.add_argument("--models", nargs="+", default=["dav2"])
    wp.add_argument("--seeds", type=int, default=5, help="number of seeds, starting at 0")
    wp.add_argument("--out")
    wp.add_argument("--workers", type=int, default=1)
    wp.set_defaults(func=cmd_sweep)

    bp = sub.add_parser("bench", help="replan-cycle timing")
    bp.add_argument("--obstacles", type=int, default=3)
    bp.add_argument("--repeats", type=int, default=20)
    bp.set_defaults(func=cmd_bench)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.print_defaults:
        print(json.dumps(defaults_document(), indent=2, sort_keys=True), flush=True)
        return 0
    if not getattr(args, "func", None):
        ap.print_help()
        return 2
    try:
        return args.func(args)
    except (AvoidError, OSError, json.JSONDecodeError) as e:
        log(f"❌ {e}", err=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
