"""Deterministic kinematic simulation of mission execution.

Each robot's true pose relaxes toward its reference with a first-order time
constant plus seeded Gaussian tracking noise. The harness logs the channels
the field reports use (obstacle clearance, position error, height) and
audits safety: obstacle collisions, mutual separation, and acquisitions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from .errors import ParameterError
from .geometry import PointCloud
from .trajectory import DynamicConstraints

TRACKING_TAU_S = 0.5  # first-order tracking time constant
ACQUISITION_TOLERANCE_M = 0.1  # max position error for a valid acquisition


@dataclass(frozen=True)
class RobotModel:
    bounding_radius: float = 0.55  # sphere around the guarded frame
    constraints: DynamicConstraints = field(default_factory=DynamicConstraints)
    tracking_noise_sigma: float = 0.02  # m, per-axis, per-step

    def __post_init__(self):
        if self.bounding_radius <= 0:
            raise ParameterError("bounding_radius must be positive")
        if self.tracking_noise_sigma < 0:
            raise ParameterError("tracking_noise_sigma must be non-negative")


@dataclass
class AcquisitionEvent:
    t: float
    index: int
    position_error: float


@dataclass
class CollisionEvent:
    t: float
    index: int
    center_distance: float


@dataclass
class FlightLog:
    robot: int
    t: np.ndarray
    true_positions: np.ndarray
    reference_positions: np.ndarray
    position_error: np.ndarray
    obstacle_distance: np.ndarray  # frame (not center) clearance
    height: np.ndarray
    acquire_window: np.ndarray
    acquisitions: list
    collisions: list
    supervisor_actions: list
    failed: bool

    @property
    def duration(self) -> float:
        return float(self.t[-1] - self.t[0]) if len(self.t) > 1 else 0.0

    @property
    def distance_flown(self) -> float:
        if len(self.true_positions) < 2:
            return 0.0
        return float(
            np.linalg.norm(np.diff(self.true_positions, axis=0), axis=1).sum()
        )


@dataclass
class MissionMetrics:
    flights: int
    images: int
    flight_time: float
    flight_distance: float
    max_height: float
    min_obstacle_distance: float

    def to_dict(self) -> dict:
        return {
            "flights": int(self.flights),
            "images": int(self.images),
            "flight_time_s": float(self.flight_time),
            "flight_distance_m": float(self.flight_distance),
            "max_height_m": float(self.max_height),
            "min_obstacle_distance_m": float(self.min_obstacle_distance),
        }


class SupervisorAction(IntEnum):
    """Safety actions ordered by severity."""

    NONE = 0
    STOP_ALL = 1
    GOTO_TAKEOFF = 2
    LAND_ALL = 3


@dataclass(frozen=True)
class SupervisorRules:
    min_obstacle_distance: float = 1.0  # frame clearance floor, m
    max_position_error: float = 0.5  # tracking runaway threshold, m
    time_budget_s: float = float("inf")
    budget_fraction: float = 0.9


def supervisor_check(
    obstacle_distances, position_errors, time_used: float, rules: SupervisorRules
) -> SupervisorAction:
    """Most severe action triggered by the current fleet state.

    Severity: land_all > goto_takeoff > stop_all > none. Tracking-error
    runaway lands the fleet; budget exhaustion sends it home; an obstacle
    clearance breach stops it in place.
    """
    action = SupervisorAction.NONE
    if any(d < rules.min_obstacle_distance for d in obstacle_distances):
        action = max(action, SupervisorAction.STOP_ALL)
    if time_used >= rules.budget_fraction * rules.time_budget_s:
        action = max(action, SupervisorAction.GOTO_TAKEOFF)
    if any(e > rules.max_position_error for e in position_errors):
        action = max(action, SupervisorAction.LAND_ALL)
    return action


def simulate(
    trajectories: list,
    map_cloud: PointCloud,
    models: Optional[list] = None,
    seed: int = 0,
    rules: Optional[SupervisorRules] = None,
    acquisition_tolerance: float = ACQUISITION_TOLERANCE_M,
    tau: float = TRACKING_TAU_S,
) -> list:
    """Run all robots in lockstep against the map; one FlightLog per robot.

    Deterministic for fixed inputs and seed: robot i draws from a child
    generator spawned from the seed, so adding a robot never perturbs the
    noise of the others.
    """
    if not trajectories:
        raise ParameterError("no trajectories to simulate")
    if len(map_cloud) == 0:
        raise ParameterError("empty map cloud")
    if models is None:
        models = [RobotModel()] * len(trajectories)
    if len(models) != len(trajectories):
        raise ParameterError("one RobotModel per trajectory required")

    tree = cKDTree(map_cloud.points)
    ground_z = map_cloud.min_z
    children = np.random.SeedSequence(seed).spawn(len(trajectories))
    generators = [np.random.default_rng(c) for c in children]

    logs = []
    for robot, (traj, model, rng) in enumerate(zip(trajectories, models, generators)):
        if not traj:
            raise ParameterError(f"robot {robot}: empty trajectory")
        n = len(traj)
        ref = np.array([s.pose.position for s in traj])
        ts = np.array([s.t for s in traj])
        flags = np.array([s.acquire_window for s in traj])
        true = np.empty_like(ref)
        true[0] = ref[0]
        for k in range(1, n):
            dt = ts[k] - ts[k - 1]
            alpha = 1.0 - np.exp(-dt / tau)
            noise = (
                rng.normal(0.0, model.tracking_noise_sigma, 3)
                if model.tracking_noise_sigma > 0
                else np.zeros(3)
            )
            true[k] = true[k - 1] + alpha * (ref[k] - true[k - 1]) + noise

        center_dist, _ = tree.query(true, k=1, workers=-1)
        frame_dist = center_dist - model.bounding_radius
        error = np.linalg.norm(true - ref, axis=1)
        height = true[:, 2] - ground_z

        collisions = [
            CollisionEvent(float(ts[k]), int(k), float(center_dist[k]))
            for k in np.nonzero(center_dist < model.bounding_radius)[0]
        ]
        acquisitions = []
        k = 0
        while k < n:
            if flags[k]:
                j = k
                while j < n and flags[j]:
                    j += 1
                window = np.arange(k, j)
                ok = window[error[window] <= acquisition_tolerance]
                if ok.size:
                    idx = int(ok[0])
                    acquisitions.append(
                        AcquisitionEvent(float(ts[idx]), idx, float(error[idx]))
                    )
                k = j
            else:
                k += 1

        actions = []
        if rules is not None:
            for k in range(n):
                action = supervisor_check(
                    [frame_dist[k]], [error[k]], float(ts[k] - ts[0]), rules
                )
                if action is not SupervisorAction.NONE:
                    actions.append((float(ts[k]), action))

        logs.append(
            FlightLog(
                robot=robot,
                t=ts,
                true_positions=true,
                reference_positions=ref,
                position_error=error,
                obstacle_distance=frame_dist,
                height=height,
                acquire_window=flags,
                acquisitions=acquisitions,
                collisions=collisions,
                supervisor_actions=actions,
                failed=bool(collisions),
            )
        )
    return logs


def metrics(logs: list) -> MissionMetrics:
    """Aggregate the field-report quantities over a set of flight logs."""
    if not logs:
        raise ParameterError("no logs to aggregate")
    return MissionMetrics(
        flights=len(logs),
        images=sum(len(log.acquisitions) for log in logs),
        flight_time=sum(log.duration for log in logs),
        flight_distance=sum(log.distance_flown for log in logs),
        max_height=max(float(log.height.max()) for log in logs),
        min_obstacle_distance=min(float(log.obstacle_distance.min()) for log in logs),
    )
