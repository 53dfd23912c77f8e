"""Command-line entry point.

Subcommands cover the full pipeline: align, plan, trajectory, formation,
simulate, validate, serve. Every toolkit error class maps to exactly one
exit code (see errors.py and the README table).
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import formats
from .alignment import AlignmentConfig, align
from .errors import AerialDocError, SafetyViolationError, SchemaError
from .formation import enforce_separation, find_violations, follower_reference
from .occupancy import build_occupancy_grid, segment_is_free
from .planner import plan_mission
from .ply import read_ply
from .report import (
    plan_overview_figure,
    trajectory_csv,
    write_flight_report,
)
from .simulator import RobotModel, metrics, simulate
from .techniques import validate_mission
from .trajectory import DynamicConstraints, sample_reference, smooth_track

DT = 0.2


def _load_mission(path):
    return formats.mission_request_from_doc(formats.read_json(path))


def _load_planset(path):
    return formats.plan_set_from_doc(formats.read_json(path))


def _leader_trajectory(plan, planset, constraints, dt):
    reference = sample_reference(plan, planset.cruise_speed, dt)
    return smooth_track(reference, constraints, dt=dt)


def _flight_robots(planset, followers, constraints, dt):
    """Per flight: [leader trajectory, follower trajectories...]."""
    flights = []
    for plan in planset.plans:
        leader = _leader_trajectory(plan, planset, constraints, dt)
        robots = [leader]
        if followers:
            targets = np.array(
                [
                    s.target if s.target is not None else s.pose.position
                    for s in leader
                ]
            )
            for spec in followers:
                robots.append(follower_reference(leader, targets, spec).trajectory)
        flights.append(robots)
    return flights


def cmd_align(args):
    map_cloud = read_ply(args.map, "map")
    scan_cloud = read_ply(args.scan, "scan")
    config = AlignmentConfig()
    if args.config:
        config = AlignmentConfig.from_dict(formats.read_json(args.config))
    result = align(map_cloud, scan_cloud, config)
    formats.write_json(args.out, formats.alignment_result_to_doc(result))
    print(f"alignment {'converged' if result.converged else 'DID NOT CONVERGE'}: "
          f"cost {result.cost:.6f} m^2, best yaw {np.rad2deg(result.best_yaw):.1f} deg")
    return 0


def cmd_plan(args):
    request = _load_mission(args.mission)
    report = validate_mission(request)
    if not report.ok:
        for issue in report.issues:
            print(f"viewpoint {issue.index}: {issue.message}", file=sys.stderr)
        from .errors import MissionValidationError

        raise MissionValidationError(
            f"{len(report.issues)} constraint violation(s)", report
        )
    map_cloud = read_ply(args.map, "map")
    grid = build_occupancy_grid(map_cloud, args.resolution, args.inflation)
    planset = plan_mission(request, grid, dist_mode=args.dist)
    formats.write_json(args.out, formats.plan_set_to_doc(planset))
    if args.figure:
        fig = plan_overview_figure(planset, map_cloud)
        fig.savefig(args.figure, dpi=110, metadata={"Software": "aerialdoc"})
    print(
        f"{len(planset.plans)} flight(s), durations "
        + ", ".join(f"{d:.0f} s" for d in planset.durations)
    )
    return 0


def cmd_trajectory(args):
    planset, _, _ = _load_planset(args.planset)
    constraints = DynamicConstraints(args.v_max, args.a_max, args.yaw_rate_max)
    os.makedirs(args.out, exist_ok=True)
    for i, plan in enumerate(planset.plans):
        samples = sample_reference(plan, planset.cruise_speed, args.dt)
        if not args.raw:
            samples = smooth_track(samples, constraints, dt=args.dt)
        path = os.path.join(args.out, f"trajectory_{i:02d}.csv")
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(trajectory_csv(samples))
        print(f"wrote {path} ({len(samples)} samples)")
    return 0


def cmd_formation(args):
    planset, followers, separation = _load_planset(args.planset)
    if not followers:
        raise SchemaError("plan set has no follower lighting specs")
    constraints = DynamicConstraints(args.v_max, args.a_max, args.yaw_rate_max)
    os.makedirs(args.out, exist_ok=True)
    light_log = []
    for i, plan in enumerate(planset.plans):
        leader = _leader_trajectory(plan, planset, constraints, args.dt)
        targets = np.array(
            [s.target if s.target is not None else s.pose.position for s in leader]
        )
        robots = [leader]
        for spec in followers:
            result = follower_reference(leader, targets, spec)
            robots.append(result.trajectory)
            light_log.extend(
                {
                    "flight": i,
                    "direction": [float(v) for v in d],
                }
                for d in result.light_directions
            )
        found, adjusted = enforce_separation(robots, separation)
        if found:
            print(f"flight {i}: {len(found)} separation conflict(s) resolved by delay")
        names = ["leader"] + [f"follower_{k:02d}" for k in range(len(followers))]
        for name, traj in zip(names, adjusted):
            path = os.path.join(args.out, f"flight_{i:02d}_{name}.csv")
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(trajectory_csv(traj))
        residual = find_violations(adjusted, separation)
        if residual:
            raise SafetyViolationError(
                f"flight {i}: {len(residual)} unresolved separation violations"
            )
    formats.write_json(
        os.path.join(args.out, "light_directions.json"),
        {"format_version": formats.FORMAT_VERSION, "acquisitions": light_log},
    )
    print(f"wrote formation trajectories for {len(planset.plans)} flight(s)")
    return 0


def cmd_simulate(args):
    planset, followers, separation = _load_planset(args.planset)
    map_cloud = read_ply(args.map, "map")
    constraints = DynamicConstraints(args.v_max, args.a_max, args.yaw_rate_max)
    os.makedirs(args.out, exist_ok=True)
    flights = _flight_robots(planset, followers, constraints, args.dt)

    all_logs = []
    image_count = 0
    separation_violations = 0
    for i, robots in enumerate(flights):
        if len(robots) > 1:
            found, robots = enforce_separation(robots, separation)
            separation_violations += len(found)
        logs = simulate(
            robots,
            map_cloud,
            [RobotModel(tracking_noise_sigma=args.noise)] * len(robots),
            seed=args.seed + i,
        )
        image_count += len(logs[0].acquisitions)  # leader carries the camera
        for log in logs:
            log.robot = len(all_logs)
            all_logs.append(log)

    m = metrics(all_logs)
    m.images = image_count
    collisions = sum(len(log.collisions) for log in all_logs)
    failed = any(log.failed for log in all_logs)
    doc = formats.metrics_to_doc(m, failed, collisions, separation_violations)
    formats.write_json(os.path.join(args.out, "metrics.json"), doc)
    write_flight_report(all_logs, args.out, figures=not args.no_figures)
    print(
        f"{m.flights} flight log(s): {m.flight_time:.0f} s, {m.flight_distance:.0f} m, "
        f"min obstacle distance {m.min_obstacle_distance:.2f} m, {image_count} image(s)"
    )
    if failed:
        raise SafetyViolationError(f"{collisions} collision event(s) during simulation")
    return 0


def cmd_validate(args):
    request = _load_mission(args.mission)
    report = validate_mission(request)
    doc = formats.validation_report_to_doc(report)
    formats.validate_document("validation_report", doc)
    if not report.ok:
        for issue in report.issues:
            print(f"viewpoint {issue.index}: {issue.message}", file=sys.stderr)
        from .errors import MissionValidationError

        raise MissionValidationError(
            f"{len(report.issues)} constraint violation(s)", report
        )
    print(f"mission ok: {report.checked} viewpoint(s)")
    if not args.planset:
        return 0
    if not args.map:
        raise SchemaError("--map is required for the plan clearance audit")
    planset, followers, _ = _load_planset(args.planset)
    map_cloud = read_ply(args.map, "map")
    grid = build_occupancy_grid(map_cloud, args.resolution, args.inflation)
    constraints = DynamicConstraints(args.v_max, args.a_max, args.yaw_rate_max)
    bad = []
    for i, plan in enumerate(planset.plans):
        for k, (a, b) in enumerate(zip(plan[:-1], plan[1:])):
            if not segment_is_free(grid, a.pose.position, b.pose.position):
                bad.append((i, k, a.pose.position, b.pose.position))
        trajectory = _leader_trajectory(plan, planset, constraints, args.dt)
        for s in trajectory:
            if grid.is_occupied(s.pose.position):
                bad.append((i, -1, s.pose.position, s.pose.position))
                break
    if bad:
        for i, k, a, b in bad:
            where = f"segment {k}" if k >= 0 else "smoothed trajectory"
            print(
                f"flight {i} {where}: clearance violation near "
                f"({a[0]:.2f}, {a[1]:.2f}, {a[2]:.2f})",
                file=sys.stderr,
            )
        raise SafetyViolationError(f"{len(bad)} clearance violation(s)")
    print(f"plan ok: {len(planset.plans)} flight(s) collision-free")
    return 0


def cmd_serve(args):
    import socket

    import uvicorn

    from .service import create_app

    app = create_app(args.project)
    # bind before starting so --port 0 resolves to a printable ephemeral port
    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    sock.bind((args.host, args.port))
    host, port = sock.getsockname()
    print(f"serving project {args.project} on http://{host}:{port}", flush=True)
    config = uvicorn.Config(app, log_level="warning")
    uvicorn.Server(config).run(sockets=[sock])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aerialdoc",
        description="Mission planning and simulation for aerial interior documentation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("align", help="register a first scan to the global map")
    p.add_argument("--map", required=True)
    p.add_argument("--scan", required=True)
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_align)

    def planning_flags(p):
        p.add_argument("--resolution", type=float, default=0.25)
        p.add_argument("--inflation", type=float, default=0.75)

    def dynamics_flags(p):
        p.add_argument("--dt", type=float, default=DT)
        p.add_argument("--v-max", type=float, default=1.0)
        p.add_argument("--a-max", type=float, default=1.0)
        p.add_argument("--yaw-rate-max", type=float, default=1.0)

    p = sub.add_parser("plan", help="sequence viewpoints and split into flights")
    p.add_argument("--map", required=True)
    p.add_argument("--mission", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dist", choices=["euclidean", "path_length"], default="euclidean")
    p.add_argument("--figure", help="also render a top-down plan overview PNG")
    planning_flags(p)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("trajectory", help="export flight trajectories as CSV")
    p.add_argument("--planset", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--raw", action="store_true", help="skip smoothing")
    dynamics_flags(p)
    p.set_defaults(func=cmd_trajectory)

    p = sub.add_parser("formation", help="generate follower lighting trajectories")
    p.add_argument("--planset", required=True)
    p.add_argument("--out", required=True)
    dynamics_flags(p)
    p.set_defaults(func=cmd_formation)

    p = sub.add_parser("simulate", help="simulate the mission and write reports")
    p.add_argument("--planset", required=True)
    p.add_argument("--map", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--noise", type=float, default=0.02)
    p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    dynamics_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate", help="check mission constraints and plan clearance")
    p.add_argument("--mission", required=True)
    p.add_argument("--map")
    p.add_argument("--planset")
    planning_flags(p)
    dynamics_flags(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("serve", help="serve the project to the browser UI")
    p.add_argument("--project", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8008)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except AerialDocError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
