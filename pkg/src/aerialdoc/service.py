"""Local HTTP service backing the viewpoint-selection UI.

Single-project, single-writer: mutating endpoints are serialized through one
lock, and a second plan request while one runs is rejected with 409. Every
response carries format_version; validation failures return 422 with the
full validation report so the UI can attach issues to viewpoints.
"""

from __future__ import annotations

import json
import threading

from fastapi import FastAPI, Query, Request, Response
from fastapi.responses import JSONResponse

from . import formats
from .errors import AerialDocError, SchemaError
from .geometry import voxel_downsample
from .occupancy import build_occupancy_grid
from .planner import plan_mission
from .project import ProjectBundle
from .report import trajectory_csv
from .simulator import RobotModel, metrics, simulate
from .techniques import validate_mission
from .trajectory import DynamicConstraints, sample_reference, smooth_track

DT = 0.2


def _error_response(status: int, message: str, **extra):
    return JSONResponse(
        status_code=status,
        content={"format_version": formats.FORMAT_VERSION, "error": message, **extra},
    )


def create_app(project_root: str) -> FastAPI:
    app = FastAPI(title="aerialdoc", version=formats.FORMAT_VERSION)
    project = ProjectBundle(project_root)
    project.ensure_dirs()
    write_lock = threading.Lock()
    plan_lock = threading.Lock()
    app.state.project = project
    app.state.plan_lock = plan_lock

    @app.exception_handler(AerialDocError)
    async def _toolkit_error(_req, exc: AerialDocError):
        status = 400 if isinstance(exc, SchemaError) else 422
        return _error_response(status, str(exc))

    @app.get("/map")
    def get_map(leaf: float = Query(1.0, gt=0), max_points: int = Query(0, ge=0)):
        cloud = voxel_downsample(project.load_map(), leaf)
        effective = leaf
        while max_points and len(cloud) > max_points:
            effective *= 2.0
            cloud = voxel_downsample(project.load_map(), effective)
        doc = {
            "format_version": formats.FORMAT_VERSION,
            "frame_label": cloud.frame_label,
            "leaf": effective,
            "count": len(cloud),
            "points": [[float(v) for v in p] for p in cloud.points],
        }
        formats.validate_document("map_points", doc)
        return JSONResponse(doc)

    @app.get("/viewpoints")
    def get_viewpoints():
        raw = project.read_viewpoints_bytes()
        if raw is None:
            return _error_response(404, "no viewpoints saved yet")
        return Response(
            content=raw,
            media_type="application/json",
            headers={"X-Format-Version": formats.FORMAT_VERSION},
        )

    @app.put("/viewpoints")
    async def put_viewpoints(request: Request):
        raw = await request.body()
        try:
            doc = json.loads(raw)
        except json.JSONDecodeError as exc:
            return _error_response(400, f"invalid JSON: {exc}")
        try:
            mission = formats.mission_request_from_doc(doc)
        except SchemaError as exc:
            return _error_response(400, str(exc))
        except AerialDocError as exc:
            return _error_response(400, str(exc))
        report = validate_mission(mission)
        if not report.ok:
            return JSONResponse(
                status_code=422, content=formats.validation_report_to_doc(report)
            )
        with write_lock:
            project.write_viewpoints_bytes(raw)
        return JSONResponse(
            {"format_version": formats.FORMAT_VERSION, "saved": len(mission.viewpoints)}
        )

    @app.post("/plan")
    def post_plan(
        resolution: float = Query(0.25, gt=0),
        inflation: float = Query(0.75, ge=0),
        dist: str = Query("euclidean"),
    ):
        raw = project.read_viewpoints_bytes()
        if raw is None:
            return _error_response(400, "no viewpoints saved; PUT /viewpoints first")
        if not plan_lock.acquire(blocking=False):
            return _error_response(409, "a planning job is already running")
        try:
            mission = formats.mission_request_from_doc(json.loads(raw))
            report = validate_mission(mission)
            if not report.ok:
                return JSONResponse(
                    status_code=422, content=formats.validation_report_to_doc(report)
                )
            grid = build_occupancy_grid(project.load_map(), resolution, inflation)
            planset = plan_mission(mission, grid, dist_mode=dist)
            doc = formats.plan_set_to_doc(planset)
            formats.validate_document("plan_set", doc)  # emitted docs self-validate
            with write_lock:
                project.write_planset_doc(doc)
            return JSONResponse(doc)
        finally:
            plan_lock.release()

    @app.get("/plan")
    def get_plan():
        doc = project.read_planset_doc()
        if doc is None:
            return _error_response(404, "no plan yet; POST /plan first")
        return JSONResponse(doc)

    @app.post("/simulate")
    def post_simulate(seed: int = Query(0), noise: float = Query(0.02, ge=0)):
        doc = project.read_planset_doc()
        if doc is None:
            return _error_response(400, "no plan yet; POST /plan first")
        planset, _, _ = formats.plan_set_from_doc(doc)
        constraints = DynamicConstraints()
        map_cloud = project.load_map()
        logs = []
        for i, plan in enumerate(planset.plans):
            reference = sample_reference(plan, planset.cruise_speed, DT)
            trajectory = smooth_track(reference, constraints, dt=DT)
            flight_logs = simulate(
                [trajectory],
                map_cloud,
                [RobotModel(tracking_noise_sigma=noise)],
                seed=seed + i,
            )
            flight_logs[0].robot = i
            logs.extend(flight_logs)
        m = metrics(logs)
        collisions = sum(len(log.collisions) for log in logs)
        failed = any(log.failed for log in logs)
        body = formats.metrics_to_doc(m, failed, collisions, 0)
        formats.validate_document("flight_metrics", body)
        body["flights_summary"] = [
            {
                "flight": log.robot,
                "acquisitions": len(log.acquisitions),
                "collisions": len(log.collisions),
                "min_obstacle_distance_m": float(log.obstacle_distance.min()),
            }
            for log in logs
        ]
        with write_lock:
            formats.write_json(project.path("metrics.json"), body)
        return JSONResponse(body)

    @app.get("/trajectories")
    def get_trajectories():
        doc = project.read_planset_doc()
        if doc is None:
            return _error_response(404, "no plan yet; POST /plan first")
        planset, _, _ = formats.plan_set_from_doc(doc)
        constraints = DynamicConstraints()
        out = []
        for i, plan in enumerate(planset.plans):
            reference = sample_reference(plan, planset.cruise_speed, DT)
            trajectory = smooth_track(reference, constraints, dt=DT)
            out.append({"name": f"trajectory_{i:02d}", "csv": trajectory_csv(trajectory)})
        return JSONResponse(
            {"format_version": formats.FORMAT_VERSION, "trajectories": out}
        )

    return app
