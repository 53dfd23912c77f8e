"""Leader-follower coordination for aerial lighting.

Followers carry the light: each follower sample sits on a sphere around the
target at the requested lighting angle from the camera's optical axis.
The separation audit enforces the platform minimum mutual distance and the
no-hovering-above-each-other downwash exclusion, resolving conflicts by
delaying the follower (hover insertion) rather than bending its geometry.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .errors import ParameterError, SafetyViolationError
from .geometry import as_point
from .techniques import Pose
from .trajectory import TrajectorySample

D_MIN_DEFAULT = 2.0  # m, platform mutual-distance floor
DOWNWASH_RADIUS_DEFAULT = 1.0  # m, horizontal exclusion for vertical stacking


class LightSide(str, Enum):
    LEFT = "left"
    RIGHT = "right"
    ABOVE = "above"


@dataclass(frozen=True)
class LightingSpec:
    light_angle: float  # rad from the camera optical axis
    light_distance: float  # m from the target
    side: LightSide = LightSide.LEFT

    def __post_init__(self):
        if not 0 <= self.light_angle <= np.pi / 2:
            raise ParameterError("light_angle must be in [0, pi/2]")
        if self.light_distance <= 0:
            raise ParameterError("light_distance must be positive")
        object.__setattr__(self, "side", LightSide(self.side))

    def to_dict(self) -> dict:
        return {
            "light_angle": float(self.light_angle),
            "light_distance": float(self.light_distance),
            "side": self.side.value,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LightingSpec":
        return cls(float(d["light_angle"]), float(d["light_distance"]), LightSide(d["side"]))


@dataclass(frozen=True)
class SeparationSpec:
    d_min: float = D_MIN_DEFAULT
    downwash_radius: float = DOWNWASH_RADIUS_DEFAULT

    def __post_init__(self):
        if self.d_min <= 0:
            raise ParameterError("d_min must be positive")
        if self.downwash_radius < 0:
            raise ParameterError("downwash_radius must be non-negative")


@dataclass
class Violation:
    t: float
    index: int  # sample index on the shared timestamp grid
    pair: tuple  # robot indices
    kind: str  # "distance" | "downwash"
    distance: float

    def to_dict(self) -> dict:
        return {
            "t": float(self.t),
            "index": int(self.index),
            "pair": [int(self.pair[0]), int(self.pair[1])],
            "kind": self.kind,
            "distance": float(self.distance),
        }


@dataclass
class FollowerResult:
    trajectory: list  # TrajectorySample per leader sample
    infeasible: list  # (index, reason) for samples where geometry failed
    light_directions: list  # unit vectors target->light at acquisition samples


def _side_vector(axis: np.ndarray, side: LightSide) -> np.ndarray:
    """Unit vector perpendicular to the optical axis on the requested side."""
    up = np.array([0.0, 0.0, 1.0])
    if side is LightSide.ABOVE:
        v = up - axis * (up @ axis)
    else:
        v = np.cross(up, axis)
        if side is LightSide.RIGHT:
            v = -v
    norm = np.linalg.norm(v)
    if norm < 1e-9:
        raise ParameterError("optical axis degenerate for the requested side")
    return v / norm


def follower_reference(
    leader: list, ooi, spec: LightingSpec, required=None
) -> FollowerResult:
    """Follower trajectory holding the lighting geometry at every sample.

    For each leader sample the follower sits light_distance from the target
    so the angle between the two target rays (to camera, to light) equals
    light_angle, offset to the requested side; its heading faces the target.
    `ooi` is one point or an (n, 3) array of per-sample targets. Samples
    where the geometry degenerates (target on top of the leader or a
    vertical optical axis for a lateral side) are reported in `infeasible`
    and hold the last feasible position.
    """
    if not leader:
        raise ParameterError("leader trajectory is empty")
    ooi_arr = np.asarray(ooi, dtype=float)
    if ooi_arr.ndim == 1:
        targets = np.tile(as_point(ooi_arr), (len(leader), 1))
    else:
        if ooi_arr.shape != (len(leader), 3):
            raise ParameterError("per-sample targets must be (n, 3)")
        targets = ooi_arr
    samples = []
    infeasible = []
    directions = []
    last_pos = None
    for i, s in enumerate(leader):
        need = required[i] if required is not None else True
        ooi = targets[i]
        to_ooi = ooi - s.pose.position
        dist = np.linalg.norm(to_ooi)
        if dist < 1e-9:
            infeasible.append((i, "target coincides with leader position"))
            pos = last_pos
        else:
            axis = to_ooi / dist
            try:
                side_vec = _side_vector(axis, spec.side)
            except ParameterError as exc:
                infeasible.append((i, str(exc)))
                side_vec = None
            if side_vec is None:
                pos = last_pos
            else:
                back = -axis * np.cos(spec.light_angle) + side_vec * np.sin(spec.light_angle)
                pos = ooi + spec.light_distance * back
        if pos is None:
            # no feasible sample yet: park at the target-side offset of the
            # first leader position
            pos = s.pose.position
            infeasible.append((i, "no feasible lighting geometry yet"))
        heading = float(np.arctan2(ooi[1] - pos[1], ooi[0] - pos[0]))
        # followers hold during the leader's windows but do not acquire
        samples.append(TrajectorySample(s.t, Pose(pos, heading), np.zeros(3), False))
        if s.acquire_window and need:
            d = pos - ooi
            directions.append(d / np.linalg.norm(d))
        last_pos = pos
    # velocities by forward difference on the shared grid
    out = []
    for i, s in enumerate(samples):
        if i + 1 < len(samples):
            dt = samples[i + 1].t - s.t
            vel = (samples[i + 1].pose.position - s.pose.position) / dt if dt > 0 else np.zeros(3)
        else:
            vel = np.zeros(3)
        out.append(replace(s, velocity=vel))
    return FollowerResult(out, infeasible, directions)


def _pad_to_length(traj: list, n: int) -> list:
    """Extend with terminal hover samples on the same dt grid."""
    if len(traj) >= n:
        return traj
    out = list(traj)
    last = traj[-1]
    dt = traj[1].t - traj[0].t if len(traj) > 1 else 0.2
    for k in range(n - len(traj)):
        out.append(
            TrajectorySample(
                last.t + dt * (k + 1), last.pose, np.zeros(3), False
            )
        )
    return out


def _delay(traj: list, k: int) -> list:
    """Insert k hover samples at the start, shifting the schedule by k*dt."""
    if k == 0:
        return list(traj)
    dt = traj[1].t - traj[0].t if len(traj) > 1 else 0.2
    first = traj[0]
    head = [
        TrajectorySample(first.t + i * dt, first.pose, np.zeros(3), False)
        for i in range(k)
    ]
    tail = [replace(s, t=s.t + k * dt) for s in traj]
    return head + tail


def find_violations(trajectories: list, spec: SeparationSpec) -> list:
    """All pairwise separation and downwash violations on the shared grid."""
    if not trajectories:
        return []
    n = max(len(t) for t in trajectories)
    padded = [_pad_to_length(t, n) for t in trajectories]
    violations = []
    for i in range(len(padded)):
        for j in range(i + 1, len(padded)):
            for k in range(n):
                a = padded[i][k].pose.position
                b = padded[j][k].pose.position
                d = float(np.linalg.norm(a - b))
                t = padded[i][k].t
                if d < spec.d_min:
                    violations.append(Violation(t, k, (i, j), "distance", d))
                horiz = float(np.hypot(a[0] - b[0], a[1] - b[1]))
                if horiz < spec.downwash_radius and abs(a[2] - b[2]) > 1e-6:
                    violations.append(Violation(t, k, (i, j), "downwash", horiz))
    return violations


def enforce_separation(
    trajectories: list, spec: SeparationSpec, max_shift: int = 600
) -> tuple:
    """Resolve conflicts by delaying later-indexed robots (hover insertion).

    Robot 0 (the leader) keeps its schedule; each subsequent robot is delayed
    by the smallest number of samples that clears its conflicts against all
    already-committed robots. Returns (violations_found, adjusted) where
    violations_found are the pre-adjustment conflicts. Raises
    SafetyViolationError when no delay up to max_shift resolves a robot.
    """
    initial = find_violations(trajectories, spec)
    if not initial:
        return [], [list(t) for t in trajectories]
    adjusted = [list(trajectories[0])]
    for r in range(1, len(trajectories)):
        placed = None
        for k in range(0, max_shift + 1):
            candidate = _delay(trajectories[r], k)
            if not find_violations(adjusted + [candidate], spec):
                placed = candidate
                break
        if placed is None:
            earliest = min(v.t for v in initial if r in v.pair)
            raise SafetyViolationError(
                f"robot {r}: no hover delay up to {max_shift} samples clears "
                f"separation conflicts (earliest violation at t={earliest:.1f} s)"
            )
        adjusted.append(placed)
    return initial, adjusted


def rti_light_poses(
    ooi, camera_pose: Pose, count: int, dome_radius: float, grid=None
) -> tuple:
    """Quasi-uniform light poses on the camera-side hemisphere around a target.

    Fibonacci lattice on the hemisphere whose pole points from the target
    toward the camera; each pose faces the target and is paired with its unit
    illumination direction (target -> light). With an occupancy grid, poses
    in inflated obstacle space are dropped; a warning string is returned if
    fewer than 3 survive.
    """
    if count < 3:
        raise ParameterError("need at least 3 light poses")
    if dome_radius <= 0:
        raise ParameterError("dome_radius must be positive")
    ooi = as_point(ooi)
    pole = camera_pose.position - ooi
    norm = np.linalg.norm(pole)
    if norm < 1e-9:
        raise ParameterError("camera coincides with the target")
    pole = pole / norm

    # local frame with z on the pole
    seed = np.array([0.0, 0.0, 1.0])
    if abs(pole @ seed) > 0.99:
        seed = np.array([1.0, 0.0, 0.0])
    e1 = np.cross(pole, seed)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(pole, e1)

    golden = np.pi * (3.0 - np.sqrt(5.0))
    poses = []
    directions = []
    for i in range(count):
        z = (i + 0.5) / count  # hemisphere: z in (0, 1)
        r = np.sqrt(max(0.0, 1.0 - z * z))
        phi = golden * i
        direction = pole * z + (np.cos(phi) * e1 + np.sin(phi) * e2) * r
        pos = ooi + dome_radius * direction
        if grid is not None and grid.is_occupied(pos):
            continue
        heading = float(np.arctan2(ooi[1] - pos[1], ooi[0] - pos[0]))
        horiz = np.hypot(ooi[0] - pos[0], ooi[1] - pos[1])
        pitch = float(np.arctan2(ooi[2] - pos[2], horiz))
        poses.append(Pose(pos, heading, pitch))
        directions.append(direction)
    warning = None
    if len(poses) < 3:
        warning = (
            f"only {len(poses)} of {count} dome poses are collision-free; "
            "documentation coverage will be poor"
        )
    return poses, directions, warning
