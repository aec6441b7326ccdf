"""Command-line front end: simulate, plan, render, segment.

Exit codes are a contract: 0 clean success, 1 parse/IO/usage failure,
2 safety failure (collision or hazard contact; NoPath for `plan`),
3 mission failure (goal unreachable or timeout).
"""

import argparse
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .errors import NoPath, PlanningError, SemnavError
from .global_map import Pose2D
from .global_planner import PlannerConfig, plan as plan_global
from .image_io import read_ppm, write_pgm
from .occupancy_grid import InflationParams, inflate, load_pgm, pixel_to_world
from .perception import (
    GEOMETRIC,
    SEMANTIC,
    CameraIntrinsics,
    ColorFrame,
    ColorThresholdSegmenter,
    DEFAULT_COLOR_THRESHOLD,
    PointCloud,
    apply_mask,
    back_project,
    load_depth_pgm,
)
from .render import render_overlay, render_world, save_overlay
from .scenario_io import load_scenario, write_outputs
from .simulator.episode import run_episode

logger = logging.getLogger("semnav")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_SAFETY = 2
EXIT_MISSION = 3


def _parse_xy(text: str):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected X,Y, got '{text}'")
    return float(parts[0]), float(parts[1])


def _parse_rgb(text: str):
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected R,G,B, got '{text}'")
    rgb = tuple(int(p) for p in parts)
    if any(not 0 <= c <= 255 for c in rgb):
        raise argparse.ArgumentTypeError("color channels must be in 0..255")
    return rgb


def _outcome_code(outcome: str, hazard_ticks: int, collisions: int) -> int:
    if collisions > 0 or hazard_ticks > 0:
        return EXIT_SAFETY
    if outcome == "success":
        return EXIT_OK
    return EXIT_MISSION


def _simulate_one(args_tuple):
    scenario_path, outdir, seed, overrides, debug_frames = args_tuple
    scenario = load_scenario(scenario_path, overrides=overrides, seed=seed)
    out = Path(outdir)
    frame_writer = None
    if debug_frames:
        frames_dir = out / "frames"
        frames_dir.mkdir(parents=True, exist_ok=True)

        def frame_writer(tick, depth, mask):
            mm = np.rint(depth.data * 1000.0).astype(np.uint16)
            write_pgm(frames_dir / f"depth_{tick:06d}.pgm", mm)
            write_pgm(frames_dir / f"mask_{tick:06d}.pgm", mask.data * 255)

    logger.info("running scenario %s (seed %d)", scenario.name, scenario.seed)
    log = run_episode(scenario, frame_writer)
    write_outputs(log, out)
    logger.info(
        "scenario %s: outcome=%s distance=%.2fm sim=%.1fs",
        scenario.name,
        log.outcome,
        log.distance_m[-1] if log.distance_m else 0.0,
        log.sim_time_s,
    )
    return {
        "scenario": scenario.name,
        "outcome": log.outcome,
        "collisions": log.collisions,
        "hazard_violations": log.hazard_ticks,
        "goals_reached": log.goals_reached,
        "distance_m": log.distance_m[-1] if log.distance_m else 0.0,
        "sim_time_s": log.sim_time_s,
        "exit_code": _outcome_code(log.outcome, log.hazard_ticks, log.collisions),
    }


def _cmd_simulate(args) -> int:
    jobs = []
    multi = len(args.scenario) > 1
    for path in args.scenario:
        sub = Path(args.out) / Path(path).stem if multi else Path(args.out)
        jobs.append((path, str(sub), args.seed, tuple(args.override), args.debug_frames))

    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_simulate_one, jobs))
    else:
        results = [_simulate_one(j) for j in jobs]

    if multi:
        distances = [r["distance_m"] for r in results]
        times = [r["sim_time_s"] for r in results]
        batch = {
            "runs": results,
            "distance_m": {
                "mean": sum(distances) / len(distances),
                "min": min(distances),
                "max": max(distances),
            },
            "sim_time_s": {
                "mean": sum(times) / len(times),
                "min": min(times),
                "max": max(times),
            },
        }
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / "batch_summary.json").write_text(
            json.dumps(batch, indent=2) + "\n"
        )
    for r in results:
        print(f"{r['scenario']}: {r['outcome']}")
    return max(r["exit_code"] for r in results)


def _cmd_plan(args) -> int:
    raw = load_pgm(args.map, args.resolution)
    inflated = inflate(raw, InflationParams(args.vehicle_width, args.safety_margin))
    cfg = PlannerConfig(
        theta_th=math.radians(args.theta_th_deg),
        heuristic_weight=args.heuristic_weight,
        waypoint_spacing=args.waypoint_spacing,
    )
    try:
        result = plan_global(
            inflated,
            Pose2D(args.start[0], args.start[1], 0.0),
            args.goal,
            cfg,
        )
    except NoPath as e:
        print(f"planning failed: {e}", file=sys.stderr)
        return EXIT_SAFETY
    except PlanningError as e:
        print(f"planning failed: {e}", file=sys.stderr)
        return EXIT_SAFETY

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "path.csv", "w", newline="") as fh:
        fh.write("u,v,x,y\n")
        for u, v in result.path.cells:
            x, y = pixel_to_world(u, v, raw.config)
            fh.write(f"{u},{v},{x:.6f},{y:.6f}\n")
    (out / "plan.json").write_text(
        json.dumps(
            {
                "cost_m": result.path.total_cost * raw.config.resolution,
                "cost_cells": result.path.total_cost,
                "cells": len(result.path.cells),
                "waypoints": [list(p) for p in result.waypoints.points],
            },
            indent=2,
        )
        + "\n"
    )
    img = render_overlay(
        raw,
        inflated=inflated,
        plan=result,
        start_xy=args.start,
        goals_xy=[args.goal],
    )
    save_overlay(out / "overlay.ppm", img)
    print(f"cost_cells={result.path.total_cost!r} cells={len(result.path.cells)}")
    return EXIT_OK


def _cmd_render(args) -> int:
    scenario = load_scenario(args.scenario, overrides=tuple(args.override))
    trajectory = None
    if args.run:
        t_path = Path(args.run) / "trajectory.csv"
        rows = np.loadtxt(t_path, delimiter=",", skiprows=1, ndmin=2)
        if rows.size:
            trajectory = rows[:, 1:3]
    img = render_world(
        scenario.world,
        scenario.grid,
        trajectory_xy=trajectory,
        start_xy=(scenario.start.x, scenario.start.y),
        goals_xy=scenario.goals,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_overlay(out / "world.ppm", img)
    return EXIT_OK


def _cmd_segment(args) -> int:
    rgb_data = read_ppm(args.rgb)
    h, w = rgb_data.shape[:2]
    intr = CameraIntrinsics.from_fov(
        w, h, math.radians(args.h_fov_deg), math.radians(args.v_fov_deg)
    )
    depth = load_depth_pgm(args.depth, intr)
    rgb = ColorFrame(rgb_data)
    seg = ColorThresholdSegmenter(tuple(args.color), args.threshold)
    mask = seg.segment(rgb, depth)

    geometric = back_project(depth, GEOMETRIC)
    semantic = back_project(apply_mask(depth, mask), SEMANTIC)
    composite = PointCloud.concatenate([geometric, semantic])

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_pgm(out / "mask.pgm", mask.data * 255)
    with open(out / "cloud.csv", "w", newline="") as fh:
        fh.write("x,y,z,provenance\n")
        for (x, y, z), p in zip(composite.points, composite.provenance):
            fh.write(f"{x:.6f},{y:.6f},{z:.6f},{int(p)}\n")
    print(
        f"mask_pixels={int(mask.data.sum())} geometric={len(geometric)} "
        f"semantic={len(semantic)} composite={len(composite)}"
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semnav",
        description="Semantic-aware navigation pipeline: simulate, plan, render, segment.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run scenario episodes end to end")
    sim.add_argument("--scenario", action="append", required=True, metavar="FILE")
    sim.add_argument("--out", required=True, metavar="DIR")
    sim.add_argument("--seed", type=int, default=None)
    sim.add_argument(
        "--override", action="append", default=[], metavar="KEY=VALUE",
        help="dotted-path scenario override, repeatable",
    )
    sim.add_argument("--debug-frames", action="store_true")
    sim.add_argument("--jobs", type=int, default=1)
    sim.set_defaults(func=_cmd_simulate)

    pl = sub.add_parser("plan", help="one-shot plan on a static PGM map")
    pl.add_argument("--map", required=True, metavar="GRID.PGM")
    pl.add_argument("--resolution", type=float, default=0.05)
    pl.add_argument("--start", type=_parse_xy, required=True, metavar="X,Y")
    pl.add_argument("--goal", type=_parse_xy, required=True, metavar="X,Y")
    pl.add_argument("--out", required=True, metavar="DIR")
    pl.add_argument("--vehicle-width", type=float, default=0.7)
    pl.add_argument("--safety-margin", type=float, default=0.1)
    pl.add_argument("--theta-th-deg", type=float, default=10.0)
    pl.add_argument("--heuristic-weight", type=float, default=1.0)
    pl.add_argument("--waypoint-spacing", type=float, default=2.0)
    pl.set_defaults(func=_cmd_plan)

    rd = sub.add_parser("render", help="draw the ground-truth world map")
    rd.add_argument("--scenario", required=True, metavar="FILE")
    rd.add_argument("--out", required=True, metavar="DIR")
    rd.add_argument("--run", default=None, metavar="DIR",
                    help="episode output dir whose trajectory to overlay")
    rd.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    rd.set_defaults(func=_cmd_render)

    sg = sub.add_parser("segment", help="reference segmentation + back-projection")
    sg.add_argument("--rgb", required=True, metavar="RGB.PPM")
    sg.add_argument("--depth", required=True, metavar="DEPTH.PGM",
                    help="16-bit PGM, millimeters")
    sg.add_argument("--color", type=_parse_rgb, action="append", required=True,
                    metavar="R,G,B", help="beware color, repeatable")
    sg.add_argument("--threshold", type=float, default=DEFAULT_COLOR_THRESHOLD)
    sg.add_argument("--h-fov-deg", type=float, default=87.0)
    sg.add_argument("--v-fov-deg", type=float, default=58.0)
    sg.add_argument("--out", required=True, metavar="DIR")
    sg.set_defaults(func=_cmd_segment)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("SEMNAV_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SemnavError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as e:
        print(f"io error: {e}", file=sys.stderr)
        return EXIT_ERROR


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
