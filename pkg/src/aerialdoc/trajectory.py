"""Time-parameterized reference trajectories with acquisition stops.

sample_reference walks the plan polyline at a spatially uniform step and
freezes the vehicle at every acquisition pose for the dwell duration.
smooth_track enforces the tracking contract: bounded velocity/acceleration,
bounded deviation from the reference path, and untouched acquisition windows.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import ParameterError
from .techniques import Pose

DT_DEFAULT = 0.2  # s, 5 Hz reference
DEV_MAX_DEFAULT = 0.3  # m, allowed smoothing deviation from the reference path


@dataclass(frozen=True)
class DynamicConstraints:
    v_max: float = 1.0
    a_max: float = 1.0
    yaw_rate_max: float = 1.0

    def __post_init__(self):
        if min(self.v_max, self.a_max, self.yaw_rate_max) <= 0:
            raise ParameterError("dynamic constraints must be positive")


@dataclass(frozen=True)
class TrajectorySample:
    t: float
    pose: Pose
    velocity: np.ndarray
    acquire_window: bool = False
    target: Optional[np.ndarray] = None  # the point being documented, if any

    def __post_init__(self):
        object.__setattr__(
            self, "velocity", np.asarray(self.velocity, dtype=float).reshape(3)
        )
        if self.target is not None:
            object.__setattr__(
                self, "target", np.asarray(self.target, dtype=float).reshape(3)
            )


def _wrap(a: float) -> float:
    return (a + np.pi) % (2 * np.pi) - np.pi


def sample_reference(
    plan: list,
    cruise_speed: float,
    dt: float = DT_DEFAULT,
    dwell_override: Optional[float] = None,
) -> list:
    """Uniformly sample the plan polyline; stop at acquisition poses.

    plan: list of PlanTriplet (poses form the collision-free polyline).
    Transit samples are spaced cruise_speed*dt apart along the path; each
    acquisition pose contributes ceil(dwell/dt) zero-velocity samples flagged
    acquire_window. First and last samples have zero velocity.
    """
    if dt <= 0:
        raise ParameterError("dt must be positive")
    if cruise_speed <= 0:
        raise ParameterError("cruise_speed must be positive")
    if not plan:
        return []

    samples = []
    t = 0.0

    def emit(pose, vel, flag, target):
        nonlocal t
        samples.append(TrajectorySample(t, pose, vel, flag, target))
        t += dt

    def emit_stop(step):
        dwell = dwell_override if dwell_override is not None else step.dwell_s
        count = max(1, int(np.ceil(dwell / dt))) if step.acquire else 1
        for _ in range(count):
            emit(step.pose, np.zeros(3), step.acquire, step.ooi)

    emit_stop(plan[0])
    step_len = cruise_speed * dt
    for prev, step in zip(plan[:-1], plan[1:]):
        a = prev.pose.position
        b = step.pose.position
        leg = np.linalg.norm(b - a)
        if leg > 0:
            direction = (b - a) / leg
            n_steps = int(np.floor(leg / step_len - 1e-9))
            for k in range(1, n_steps + 1):
                frac = k * step_len / leg
                pose = Pose(
                    a + direction * (k * step_len),
                    _wrap(prev.pose.heading + _wrap(step.pose.heading - prev.pose.heading) * frac),
                    _wrap(prev.pose.gimbal_pitch + _wrap(step.pose.gimbal_pitch - prev.pose.gimbal_pitch) * frac),
                )
                emit(pose, direction * cruise_speed, False, step.ooi)
        emit_stop(step)

    first = samples[0]
    if np.linalg.norm(first.velocity) > 0:
        samples[0] = replace(first, velocity=np.zeros(3))
    last = samples[-1]
    if np.linalg.norm(last.velocity) > 0:
        samples[-1] = replace(last, velocity=np.zeros(3))
    return samples


def _positions(samples) -> np.ndarray:
    return np.array([s.pose.position for s in samples])


def point_to_polyline_distance(p, polyline) -> float:
    p = np.asarray(p, dtype=float)
    polyline = np.asarray(polyline, dtype=float)
    if len(polyline) == 1:
        return float(np.linalg.norm(p - polyline[0]))
    a = polyline[:-1]
    b = polyline[1:]
    ab = b - a
    denom = np.einsum("ij,ij->i", ab, ab)
    denom = np.where(denom == 0, 1.0, denom)
    u = np.clip(np.einsum("ij,ij->i", p - a, ab) / denom, 0.0, 1.0)
    proj = a + u[:, None] * ab
    return float(np.linalg.norm(p - proj, axis=1).min())


def audit_dynamics(samples, constraints: DynamicConstraints, dt: float) -> bool:
    """Finite-difference velocity and acceleration check at the sample rate."""
    pts = _positions(samples)
    if len(pts) < 3:
        return True
    vel = np.diff(pts, axis=0) / dt
    speed = np.linalg.norm(vel, axis=1)
    if speed.max(initial=0.0) > constraints.v_max + 1e-6:
        return False
    acc = np.diff(vel, axis=0) / dt
    if np.linalg.norm(acc, axis=1).max(initial=0.0) > constraints.a_max + 1e-6:
        return False
    return True


def _window_runs(samples) -> list:
    """Maximal runs of consecutive acquire_window samples, as [lo, hi)."""
    runs = []
    i = 0
    n = len(samples)
    while i < n:
        if samples[i].acquire_window:
            j = i
            while j < n and samples[j].acquire_window:
                j += 1
            runs.append((i, j))
            i = j
        else:
            i += 1
    return runs


def _subdivide(pts: np.ndarray, target: float) -> tuple:
    """Insert points so no segment exceeds `target`; returns (fine, arc)."""
    fine = [pts[0]]
    arc = [0.0]
    s = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        length = float(np.linalg.norm(b - a))
        if length < 1e-12:
            continue
        pieces = max(1, int(np.ceil(length / target)))
        for k in range(1, pieces + 1):
            frac = k / pieces
            fine.append(a + (b - a) * frac)
            arc.append(s + length * frac)
        s += length
    return np.array(fine), np.array(arc)


def _relax(fine: np.ndarray, dev_max: float, passes: int = 60) -> np.ndarray:
    """Laplacian smoothing with endpoints fixed; displacement from each
    vertex's initial (on-path) position capped at 0.95*dev_max."""
    smoothed = fine.copy()
    cap = 0.95 * dev_max
    for _ in range(passes):
        smoothed[1:-1] += 0.45 * (smoothed[:-2] - 2 * smoothed[1:-1] + smoothed[2:])
        offset = smoothed - fine
        norms = np.linalg.norm(offset, axis=1)
        over = norms > cap
        if np.any(over):
            smoothed[over] = fine[over] + offset[over] * (cap / norms[over])[:, None]
    return smoothed


def _retime_run(
    run_pts: np.ndarray,
    arc_headings,  # (arc coordinates, unwrapped headings) on the run polyline
    arc_pitches,
    constraints: DynamicConstraints,
    dt: float,
    dev_max: float,
    horizon: int,
) -> list:
    """Emit (position, heading, pitch, speed) tuples for one stop-to-stop run.

    The run polyline is subdivided, geometrically relaxed inside the dev_max
    corridor, and walked with a speed profile limited by per-vertex turn
    angle (both the v^2*curvature and v*kink/dt readings), tangential ramps,
    and v_max. Start and end speeds are zero; endpoint samples not included.
    """
    a_lat = 0.5 * constraints.a_max
    beta = 0.3 * constraints.a_max
    fine, _ = _subdivide(run_pts, target=0.05)
    if len(fine) < 2:
        return []
    smoothed = _relax(fine, dev_max)
    seg = np.linalg.norm(np.diff(smoothed, axis=0), axis=1)
    n = len(smoothed)
    v_cap = np.full(n, constraints.v_max)
    for i in range(1, n - 1):
        ab = smoothed[i] - smoothed[i - 1]
        bc = smoothed[i + 1] - smoothed[i]
        la, lb = np.linalg.norm(ab), np.linalg.norm(bc)
        if la < 1e-12 or lb < 1e-12:
            continue
        cosang = np.clip(ab @ bc / (la * lb), -1.0, 1.0)
        kink = float(np.arccos(cosang))
        if kink > 1e-9:
            curvature = kink / max(min(la, lb), 1e-9)
            v_cap[i] = min(
                v_cap[i], np.sqrt(a_lat / curvature), a_lat * dt / kink
            )
    v_cap[0] = v_cap[-1] = 0.0
    for i in range(1, n):
        v_cap[i] = min(v_cap[i], np.sqrt(v_cap[i - 1] ** 2 + 2 * beta * seg[i - 1]))
    for i in range(n - 2, -1, -1):
        v_cap[i] = min(v_cap[i], np.sqrt(v_cap[i + 1] ** 2 + 2 * beta * seg[i]))

    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = cum[-1]
    if total < 1e-9:
        return []
    head_arc, head_vals = arc_headings
    pitch_arc, pitch_vals = arc_pitches

    out = []
    s, v = 0.0, 0.0
    lookahead = max(horizon, 4) * constraints.v_max * dt
    guard = int(20 * total / (beta * dt * dt) + 400)
    for _ in range(guard):
        probe = min(s + (v + beta * dt) * dt, total)
        cap_ahead = float(np.interp(probe, cum, v_cap))
        brake = np.sqrt(max(0.0, 2 * beta * (min(total, s + lookahead) - s)))
        v = min(v + beta * dt, cap_ahead, brake, constraints.v_max)
        s_next = s + v * dt
        if s_next >= total - 1e-9 or v <= 1e-12:
            break
        s = s_next
        pos = np.array([np.interp(s, cum, smoothed[:, k]) for k in range(3)])
        heading = float(np.interp(s, head_arc, head_vals))
        pitch = float(np.interp(s, pitch_arc, pitch_vals))
        ahead = np.array(
            [np.interp(min(s + 1e-4, total), cum, smoothed[:, k]) for k in range(3)]
        )
        direction = ahead - pos
        nrm = np.linalg.norm(direction)
        out.append((pos, _wrap(heading), _wrap(pitch), direction / nrm * v if nrm > 0 else np.zeros(3)))
    return out


def smooth_track(
    reference: list,
    constraints: DynamicConstraints,
    horizon: int = 40,
    dt: float = DT_DEFAULT,
    dev_max: float = DEV_MAX_DEFAULT,
) -> list:
    """Constraint-satisfying trajectory near the reference.

    If the reference already satisfies the dynamic constraints it is returned
    unchanged. Otherwise transit segments are geometrically relaxed inside a
    dev_max corridor around the reference path and re-timed with a curvature-
    and ramp-limited speed profile (speed dips instead of erroring at sharp
    corners). Acquisition windows keep their poses, zero velocity, flags, and
    sample counts; the re-timing may shift their timestamps.
    """
    if not reference:
        raise ParameterError("reference trajectory is empty")
    if audit_dynamics(reference, constraints, dt):
        return list(reference)

    pts = _positions(reference)
    n = len(pts)
    runs = _window_runs(reference)
    window_starts = {lo: (lo, hi) for lo, hi in runs}

    out = []
    t = 0.0

    def emit(pose, vel, flag, target):
        nonlocal t
        out.append(TrajectorySample(t, pose, vel, flag, target))
        t += dt

    idx = 0
    while idx < n:
        if idx in window_starts:
            lo, hi = window_starts[idx]
            for k in range(lo, hi):
                emit(reference[k].pose, np.zeros(3), True, reference[k].target)
            idx = hi
            continue
        if idx == 0:
            emit(reference[0].pose, np.zeros(3), False, reference[0].target)
        # transit run: previous stop pose through reference samples to the
        # next anchor (window start or trajectory end)
        end = n - 1
        for lo, _ in runs:
            if lo > idx:
                end = min(end, lo)
                break
        lo_idx = max(idx - 1, 0)
        run_pts = pts[lo_idx : end + 1]
        run_arc = np.concatenate(
            [[0.0], np.cumsum(np.linalg.norm(np.diff(run_pts, axis=0), axis=1))]
        )
        headings = np.unwrap([s.pose.heading for s in reference[lo_idx : end + 1]])
        pitches = np.unwrap([s.pose.gimbal_pitch for s in reference[lo_idx : end + 1]])
        run_target = reference[end].target
        for pos, heading, pitch, vel in _retime_run(
            run_pts, (run_arc, headings), (run_arc, pitches),
            constraints, dt, dev_max, horizon,
        ):
            emit(Pose(pos, heading, pitch), vel, False, run_target)
        if end == n - 1:
            emit(reference[end].pose, np.zeros(3), False, reference[end].target)
            idx = n
        else:
            idx = end

    # yaw-rate limiting on the heading channel only
    max_step = constraints.yaw_rate_max * dt
    limited = [out[0]]
    for sample in out[1:]:
        prev_h = limited[-1].pose.heading
        delta = _wrap(sample.pose.heading - prev_h)
        if abs(delta) > max_step and not sample.acquire_window:
            new_h = _wrap(prev_h + np.sign(delta) * max_step)
            sample = replace(
                sample, pose=Pose(sample.pose.position, new_h, sample.pose.gimbal_pitch)
            )
        limited.append(sample)
    return limited
