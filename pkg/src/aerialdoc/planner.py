"""Pre-deployment mission planning.

Sequences the requested viewpoints into an open tour, connects consecutive
poses with collision-free paths, and splits the sequence into per-flight
plans that each fit the flight-time budget with a return leg to takeoff.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InfeasiblePlanError, ParameterError
from .occupancy import OccupancyGrid, path_length, plan_path
from .techniques import MissionRequest, Pose, TechniqueId, dwell_time
from .tsp import solve_tsp

# Fraction of t_max actually budgeted per flight; the rest is safety reserve.
TIME_BUDGET_FACTOR = 0.8


@dataclass(frozen=True)
class PlanTriplet:
    """One plan step: carrier pose, target point, acquisition flag.

    Transit steps carry the upcoming target with acquire=False and zero
    dwell; acquisition steps dwell for the technique's exposure plus margin.
    """

    pose: Pose
    ooi: np.ndarray
    acquire: bool
    technique: Optional[TechniqueId] = None
    dwell_s: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "ooi", np.asarray(self.ooi, dtype=float).reshape(3))
        if self.acquire and self.technique is None:
            raise ParameterError("acquisition step needs a technique")

    def to_dict(self) -> dict:
        return {
            "pose": self.pose.to_dict(),
            "ooi": [float(v) for v in self.ooi],
            "acquire": bool(self.acquire),
            "technique": self.technique.value if self.technique else None,
            "dwell_s": float(self.dwell_s),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PlanTriplet":
        return cls(
            pose=Pose.from_dict(d["pose"]),
            ooi=d["ooi"],
            acquire=bool(d["acquire"]),
            technique=TechniqueId(d["technique"]) if d.get("technique") else None,
            dwell_s=float(d.get("dwell_s", 0.0)),
        )


@dataclass
class MissionPlanSet:
    """Per-flight plans plus the full visit order they reconstruct."""

    plans: list  # list of list[PlanTriplet], each starting/ending at takeoff
    visit_order: list  # viewpoint indices of the full optimal sequence
    durations: list  # estimated t(P_i), seconds
    t_max: float
    cruise_speed: float
    takeoff: Pose

    def acquisition_flights(self) -> list:
        """Acquisition triplets per flight, in flight order."""
        return [[step for step in plan if step.acquire] for plan in self.plans]

    def to_dict(self) -> dict:
        return {
            "plans": [[s.to_dict() for s in plan] for plan in self.plans],
            "visit_order": [int(i) for i in self.visit_order],
            "durations_s": [float(d) for d in self.durations],
            "t_max": float(self.t_max),
            "cruise_speed": float(self.cruise_speed),
            "takeoff": self.takeoff.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MissionPlanSet":
        return cls(
            plans=[[PlanTriplet.from_dict(s) for s in plan] for plan in d["plans"]],
            visit_order=[int(i) for i in d["visit_order"]],
            durations=[float(x) for x in d["durations_s"]],
            t_max=float(d["t_max"]),
            cruise_speed=float(d["cruise_speed"]),
            takeoff=Pose.from_dict(d["takeoff"]),
        )


def _wrap_angle(a: float) -> float:
    return (a + np.pi) % (2 * np.pi) - np.pi


def _interp_heading(h0: float, h1: float, frac: float) -> float:
    return _wrap_angle(h0 + _wrap_angle(h1 - h0) * frac)


def _leg_triplets(grid, start_pose, end_pose, target, cruise_ignored=None):
    """Transit triplets along the collision-free path between two poses,
    excluding both endpoints. Heading interpolates the shorter angular arc
    by arc length."""
    path = plan_path(grid, start_pose.position, end_pose.position)
    if len(path) <= 2:
        return [], path_length(path)
    seg = np.asarray(path)
    cum = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(seg, axis=0), axis=1))])
    total = cum[-1]
    steps = []
    for k in range(1, len(path) - 1):
        frac = cum[k] / total if total > 0 else 0.0
        steps.append(
            PlanTriplet(
                pose=Pose(
                    path[k],
                    _interp_heading(start_pose.heading, end_pose.heading, frac),
                    _interp_heading(
                        start_pose.gimbal_pitch, end_pose.gimbal_pitch, frac
                    ),
                ),
                ooi=target,
                acquire=False,
            )
        )
    return steps, total


def split_plan(
    request: MissionRequest,
    grid: OccupancyGrid,
    visit_order: Optional[list] = None,
    budget_factor: float = TIME_BUDGET_FACTOR,
) -> MissionPlanSet:
    """Split the visit order into flights that each fit the time budget.

    Greedy: extend the current flight while its estimate (transit time at
    cruise speed + dwells + return leg) stays below budget_factor * t_max.
    Every flight starts and ends at the takeoff pose; concatenating the
    flights' acquisition steps reproduces the visit order exactly.
    """
    if not 0 < budget_factor <= 1:
        raise ParameterError("budget_factor must be in (0, 1]")
    viewpoints = request.viewpoints
    if not viewpoints:
        raise ParameterError("mission has no viewpoints")
    if visit_order is None:
        visit_order = list(range(len(viewpoints)))
    takeoff = request.takeoff
    cruise = request.cruise_speed
    budget = budget_factor * request.t_max

    def leg(a_pose, b_pose, target):
        steps, length = _leg_triplets(grid, a_pose, b_pose, target)
        return steps, length / cruise

    plans = []
    durations = []
    current = []  # viewpoint indices in this flight
    current_time = 0.0  # transit+dwell time excluding the return leg
    last_pose = takeoff

    def close_flight(indices):
        """Materialize one flight: takeoff -> viewpoints -> takeoff."""
        steps = [PlanTriplet(takeoff, viewpoints[indices[0]].ooi_point, False)]
        pose = takeoff
        total = 0.0
        for idx in indices:
            vp = viewpoints[idx]
            transit, t = leg(pose, vp.camera_pose, vp.ooi_point)
            steps.extend(transit)
            dwell = dwell_time(vp.technique) if vp.acquire else 0.0
            steps.append(
                PlanTriplet(vp.camera_pose, vp.ooi_point, vp.acquire, vp.technique, dwell)
            )
            total += t + dwell
            pose = vp.camera_pose
        back, t_back = leg(pose, takeoff, viewpoints[indices[-1]].ooi_point)
        steps.extend(back)
        steps.append(PlanTriplet(takeoff, viewpoints[indices[-1]].ooi_point, False))
        total += t_back
        return steps, total

    for idx in visit_order:
        vp = viewpoints[idx]
        _, t_to = leg(last_pose, vp.camera_pose, vp.ooi_point)
        dwell = dwell_time(vp.technique) if vp.acquire else 0.0
        _, t_back = leg(vp.camera_pose, takeoff, vp.ooi_point)
        candidate_time = current_time + t_to + dwell + t_back
        if current and candidate_time >= budget:
            plans.append(current)
            current = []
            current_time = 0.0
            last_pose = takeoff
            _, t_to = leg(last_pose, vp.camera_pose, vp.ooi_point)
            candidate_time = t_to + dwell + t_back
        if not current and candidate_time >= budget:
            raise InfeasiblePlanError(
                f"viewpoint {idx} alone needs {candidate_time:.1f} s, over the "
                f"{budget:.1f} s budget ({budget_factor:g} * t_max)"
            )
        current.append(idx)
        current_time += t_to + dwell
        last_pose = vp.camera_pose
    if current:
        plans.append(current)

    flights = []
    durations = []
    for indices in plans:
        steps, total = close_flight(indices)
        if total >= request.t_max:
            raise InfeasiblePlanError(
                f"flight over {total:.1f} s exceeds t_max {request.t_max:.1f} s"
            )
        flights.append(steps)
        durations.append(total)
    return MissionPlanSet(
        plans=flights,
        visit_order=list(visit_order),
        durations=durations,
        t_max=request.t_max,
        cruise_speed=cruise,
        takeoff=takeoff,
    )


def plan_mission(
    request: MissionRequest,
    grid: OccupancyGrid,
    dist_mode: str = "euclidean",
    budget_factor: float = TIME_BUDGET_FACTOR,
) -> MissionPlanSet:
    """Sequence viewpoints (TSP from takeoff) and split into flights."""
    positions = np.vstack(
        [request.takeoff.position]
        + [vp.camera_pose.position for vp in request.viewpoints]
    )
    order = solve_tsp(positions, dist_mode=dist_mode, grid=grid, start=0)
    # strip the synthetic takeoff node; remaining entries are viewpoint indices
    visit_order = [i - 1 for i in order if i != 0]
    return split_plan(request, grid, visit_order, budget_factor)
