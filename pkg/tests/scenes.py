"""Synthetic church-scale scenes shared by the test suite.

All builders return (N, 3) float arrays of surface samples in meters with the
floor at z=0. Interiors carry columns and an altar block like real naves do;
without them a bare box is translation-degenerate along its axis and the
registration tests would be ill-posed.
"""

import numpy as np

from aerialdoc.geometry import PointCloud, RigidTransform


def _grid2d(extent_a, extent_b, spacing, rng, jitter):
    """Random surface sampling at one point per spacing^2 on average.

    Uniform scatter, not a lattice: regular grids alias under translation and
    make registration problems artificially degenerate.
    """
    n = max(4, int(round(extent_a * extent_b / spacing**2)))
    pts = np.column_stack(
        [rng.uniform(0, extent_a, n), rng.uniform(0, extent_b, n)]
    )
    if jitter > 0:
        pts = pts + rng.normal(0.0, jitter, pts.shape)
    return pts


def _box_block(rng, x0, y0, z0, dx, dy, dz, spacing, jitter):
    """Surface samples of a closed block (4 sides + top)."""
    parts = []
    for x in (x0, x0 + dx):
        w = _grid2d(dy, dz, spacing, rng, jitter)
        parts.append(np.column_stack([np.full(len(w), x), y0 + w[:, 0], z0 + w[:, 1]]))
    for y in (y0, y0 + dy):
        w = _grid2d(dx, dz, spacing, rng, jitter)
        parts.append(np.column_stack([x0 + w[:, 0], np.full(len(w), y), z0 + w[:, 1]]))
    top = _grid2d(dx, dy, spacing, rng, jitter)
    parts.append(np.column_stack([x0 + top[:, 0], y0 + top[:, 1], np.full(len(top), z0 + dz)]))
    return np.vstack(parts)


def _column(rng, cx, cy, radius, height, spacing, jitter):
    n = max(16, int(round(2 * np.pi * radius * height / spacing**2)))
    ang = rng.uniform(0, 2 * np.pi, n)
    zz = rng.uniform(0, height, n)
    pts = np.column_stack([cx + radius * np.cos(ang), cy + radius * np.sin(ang), zz])
    if jitter > 0:
        pts = pts + rng.normal(0.0, jitter, pts.shape)
    return pts


def church(
    rng,
    length=30.0,
    width=14.0,
    height=12.0,
    spacing=0.18,
    jitter=0.02,
    apse=True,
    altar=True,
    columns=True,
    chapel=False,
    vault=True,
):
    """Closed nave with optional apse, altar block, column rows, side chapel.

    The default ceiling is a barrel vault: besides realism, the densely
    triangulated curved hull regions (vault + apse) keep the hull-edge
    barycenter stable under subsampling, which flat boxes are not.
    """
    parts = []

    floor = _grid2d(length, width, spacing, rng, jitter)
    parts.append(np.column_stack([floor, np.zeros(len(floor))]))
    if vault:
        # half-cylinder along the nave axis, springing at the wall tops
        radius = width / 2.0
        n = max(16, int(round(np.pi * radius * length / spacing**2)))
        ang = rng.uniform(0, np.pi, n)
        xs = rng.uniform(0, length, n)
        vault_pts = np.column_stack(
            [xs, radius + radius * np.cos(ang), height + radius * np.sin(ang)]
        )
        if jitter > 0:
            vault_pts = vault_pts + rng.normal(0.0, jitter, vault_pts.shape)
        parts.append(vault_pts)
    else:
        ceil = _grid2d(length, width, spacing, rng, jitter)
        parts.append(np.column_stack([ceil, np.full(len(ceil), height)]))
    for y in (0.0, width):
        wall = _grid2d(length, height, spacing, rng, jitter)
        parts.append(np.column_stack([wall[:, 0], np.full(len(wall), y), wall[:, 1]]))
    def end_wall(x):
        wall_h = height + (width / 2.0 if vault else 0.0)
        w = _grid2d(width, wall_h, spacing, rng, jitter)
        if vault:
            # clip the gable to the vault profile above the springing line
            above = w[:, 1] > height
            w = w[
                ~above
                | (np.hypot(w[:, 0] - width / 2.0, w[:, 1] - height) <= width / 2.0)
            ]
        return np.column_stack([np.full(len(w), x), w[:, 0], w[:, 1]])

    parts.append(end_wall(0.0))

    if apse:
        radius = width / 2.0
        n = max(16, int(round(np.pi * radius * height / spacing**2)))
        ang = rng.uniform(-np.pi / 2, np.pi / 2, n)
        zz = rng.uniform(0, height, n)
        dome = np.column_stack(
            [length + radius * np.cos(ang), radius + radius * np.sin(ang), zz]
        )
        if jitter > 0:
            dome = dome + rng.normal(0.0, jitter, dome.shape)
        parts.append(dome)
    else:
        parts.append(end_wall(length))

    if altar:
        dx, dy, dz = 0.14 * length, 0.25 * width, 0.25 * height
        parts.append(
            _box_block(
                rng, 0.78 * length, (width - dy) / 2.0, 0.0, dx, dy, dz, spacing, jitter
            )
        )
    if columns:
        col_r = 0.35
        for fx in (0.22, 0.5, 0.72):
            for fy in (0.27, 0.73):
                parts.append(
                    _column(rng, fx * length, fy * width, col_r, height, spacing, jitter)
                )
    if chapel:
        # annex box on the -y side near the back end; breaks lateral symmetry
        parts.append(
            _box_block(
                rng,
                0.2 * length,
                -0.22 * width,
                0.0,
                0.15 * length,
                0.22 * width,
                0.45 * height,
                spacing,
                jitter,
            )
        )
    return np.vstack(parts)


def symmetric_hall(rng, length=28.0, width=8.0, height=6.0, spacing=0.25, jitter=0.02):
    """Closed box hall, 180-degree symmetric except for one altar block.

    The shell and column pair map onto themselves under a half-turn about the
    hall center; only the altar near the -x end distinguishes the two modes.
    Long enough that 45-degree-off initializations cannot slide into the true
    basin within the loose gate.
    """
    shell = church(
        rng, length=length, width=width, height=height, spacing=spacing,
        jitter=jitter, apse=False, altar=False, columns=False,
    )
    cols = np.vstack(
        [
            _column(rng, 0.3 * length, width / 2.0, 0.3, height, spacing, jitter),
            _column(rng, 0.7 * length, width / 2.0, 0.3, height, spacing, jitter),
        ]
    )
    altar = _box_block(
        rng, 0.08 * length, 0.25 * width, 0.0, 0.12 * length, 0.5 * width,
        0.5 * height, spacing, jitter,
    )
    return np.vstack([shell, cols, altar])


def hall_center(length=28.0, width=8.0):
    return np.array([length / 2.0, width / 2.0, 0.0])


def make_scan(rng, map_points, true_transform, keep=0.5, noise=0.01):
    """Subsample the map, move it into its own frame, add sensor noise.

    true_transform maps scan frame -> map frame; the returned cloud lives in
    the scan frame.
    """
    n = len(map_points)
    idx = rng.choice(n, size=int(n * keep), replace=False)
    pts = map_points[idx]
    pts = true_transform.inverse().apply(pts)
    if noise > 0:
        pts = pts + rng.normal(0.0, noise, pts.shape)
    return pts


def random_yaw_translation(rng, xy=8.0, z=0.5):
    yaw = float(rng.uniform(-np.pi, np.pi))
    t = np.array([rng.uniform(-xy, xy), rng.uniform(-xy, xy), rng.uniform(-z, z)])
    return RigidTransform.from_translation(t).compose(RigidTransform.rot_z(yaw))


def cloud(points, label="map"):
    return PointCloud(np.asarray(points, dtype=float), label)
