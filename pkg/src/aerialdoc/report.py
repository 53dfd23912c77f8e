"""Flight-log figures and delimited exports.

Renders the standard per-flight trace figure (obstacle clearance, position
error with acquisition marks, height above ground) and writes the log and
trajectory CSVs that sit alongside it in a report directory.
"""

from __future__ import annotations

import csv
import io
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

# fixed metadata keeps PNG output byte-stable across runs
_PNG_METADATA = {"Software": "aerialdoc"}

TRAJECTORY_HEADER = ["t", "x", "y", "z", "heading", "vx", "vy", "vz", "acquire"]
LOG_HEADER = [
    "t", "x", "y", "z", "ref_x", "ref_y", "ref_z",
    "position_error", "obstacle_distance", "height", "acquire",
]


def _fmt(v: float) -> str:
    return repr(float(v))


def trajectory_csv(samples) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRAJECTORY_HEADER)
    for s in samples:
        writer.writerow(
            [
                _fmt(s.t),
                *(_fmt(v) for v in s.pose.position),
                _fmt(s.pose.heading),
                *(_fmt(v) for v in s.velocity),
                int(s.acquire_window),
            ]
        )
    return buf.getvalue()


def parse_trajectory_csv(text: str):
    """Rows of the trajectory CSV as dicts with floats (acquire as bool)."""
    rows = []
    reader = csv.DictReader(io.StringIO(text))
    for row in reader:
        rows.append(
            {
                **{k: float(row[k]) for k in TRAJECTORY_HEADER[:-1]},
                "acquire": bool(int(row["acquire"])),
            }
        )
    return rows


def flight_log_csv(log) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(LOG_HEADER)
    for k in range(len(log.t)):
        writer.writerow(
            [
                _fmt(log.t[k]),
                *(_fmt(v) for v in log.true_positions[k]),
                *(_fmt(v) for v in log.reference_positions[k]),
                _fmt(log.position_error[k]),
                _fmt(log.obstacle_distance[k]),
                _fmt(log.height[k]),
                int(log.acquire_window[k]),
            ]
        )
    return buf.getvalue()


def flight_figure(log):
    """Three stacked traces: obstacle clearance, tracking error with
    acquisition marks, and height above ground."""
    fig, axes = plt.subplots(3, 1, figsize=(8, 6), sharex=True)
    t = log.t
    axes[0].plot(t, log.obstacle_distance, color="tab:blue", lw=1.0)
    axes[0].set_ylabel("obstacle dist (m)")
    axes[0].axhline(0.0, color="tab:red", lw=0.8, ls="--")

    axes[1].plot(t, log.position_error, color="tab:orange", lw=1.0)
    for event in log.acquisitions:
        axes[1].axvline(event.t, color="tab:green", lw=0.8, alpha=0.7)
        axes[1].plot([event.t], [event.position_error], "o", color="tab:red", ms=3)
    axes[1].set_ylabel("position error (m)")

    axes[2].plot(t, log.height, color="tab:purple", lw=1.0)
    axes[2].set_ylabel("height (m)")
    axes[2].set_xlabel("time (s)")

    fig.suptitle(f"flight {log.robot}")
    fig.tight_layout()
    return fig


def write_flight_report(logs, out_dir, prefix: str = "flight", figures: bool = True) -> list:
    """Write per-flight CSV (+ PNG) pairs; returns the created file names."""
    os.makedirs(out_dir, exist_ok=True)
    created = []
    for log in logs:
        base = f"{prefix}_{log.robot:02d}"
        csv_path = os.path.join(out_dir, f"{base}.csv")
        with open(csv_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(flight_log_csv(log))
        created.append(csv_path)
        if figures:
            fig = flight_figure(log)
            png_path = os.path.join(out_dir, f"{base}.png")
            fig.savefig(png_path, dpi=110, metadata=_PNG_METADATA)
            plt.close(fig)
            created.append(png_path)
    return created


def plan_overview_figure(planset, map_cloud=None):
    """Top-down view: per-flight paths with acquisition markers."""
    fig, ax = plt.subplots(figsize=(7, 7))
    if map_cloud is not None and len(map_cloud):
        pts = map_cloud.points
        step = max(1, len(pts) // 20000)
        ax.scatter(pts[::step, 0], pts[::step, 1], s=0.3, c="0.8", lw=0)
    for i, plan in enumerate(planset.plans):
        xy = [step.pose.position for step in plan]
        xs = [p[0] for p in xy]
        ys = [p[1] for p in xy]
        ax.plot(xs, ys, lw=1.0, label=f"flight {i}", color=f"C{i % 10}")
        acq = [s.pose.position for s in plan if s.acquire]
        if acq:
            ax.scatter([p[0] for p in acq], [p[1] for p in acq],
                       marker="*", s=40, color="tab:green", zorder=3)
    ax.scatter(*planset.takeoff.position[:2], marker="^", s=60,
               color="tab:red", zorder=3, label="takeoff")
    ax.set_aspect("equal")
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    return fig
