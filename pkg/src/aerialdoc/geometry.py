"""Foundational geometric types and point-cloud preprocessing.

Coordinates live in a right-handed metric frame with z pointing up
(antiparallel to gravity). All operations are pure functions; the types are
immutable after construction and safe to share between threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.spatial import ConvexHull, cKDTree
from scipy.spatial import QhullError

from .errors import DegenerateGeometryError, ParameterError

# Relative eigenvalue gap below which a principal heading is flagged ambiguous.
HEADING_GAP_TOL = 1e-6


def as_point(p) -> np.ndarray:
    """Coerce to a finite (3,) float64 vector."""
    a = np.asarray(p, dtype=float).reshape(3)
    if not np.all(np.isfinite(a)):
        raise ParameterError(f"point has non-finite coordinates: {a}")
    return a


@dataclass(frozen=True)
class PointCloud:
    """Unordered 3D point set with metric coordinates.

    points: (N, 3) float64 array; frame_label names the coordinate frame.
    """

    points: np.ndarray
    frame_label: str = "map"

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ParameterError(f"expected (N, 3) points, got shape {pts.shape}")
        if pts.size and not np.all(np.isfinite(pts)):
            raise ParameterError("point cloud contains NaN/Inf coordinates")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def min_z(self) -> float:
        if len(self) == 0:
            raise ParameterError("empty cloud has no minimum height")
        return float(self.points[:, 2].min())

    def transformed(self, transform: "RigidTransform") -> "PointCloud":
        return PointCloud(transform.apply(self.points), self.frame_label)


@dataclass(frozen=True)
class RigidTransform:
    """SE(3) transform: rotation (3x3 orthonormal, det +1) and translation."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=float).reshape(3, 3)
        t = np.asarray(self.translation, dtype=float).reshape(3)
        if not np.allclose(r @ r.T, np.eye(3), atol=1e-9):
            raise ParameterError("rotation matrix is not orthonormal within 1e-9")
        if np.linalg.det(r) < 0:
            raise ParameterError("rotation matrix has negative determinant")
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_translation(cls, t) -> "RigidTransform":
        return cls(np.eye(3), as_point(t))

    @classmethod
    def rot_z(cls, angle: float, center=(0.0, 0.0, 0.0)) -> "RigidTransform":
        """Rotation by `angle` about the vertical axis through `center`."""
        c, s = np.cos(angle), np.sin(angle)
        r = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
        center = as_point(center)
        return cls(r, center - r @ center)

    @classmethod
    def from_matrix(cls, m) -> "RigidTransform":
        m = np.asarray(m, dtype=float).reshape(4, 4)
        return cls(m[:3, :3], m[:3, 3])

    @property
    def matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    def apply(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            return self.rotation @ pts + self.translation
        return pts @ self.rotation.T + self.translation

    def compose(self, other: "RigidTransform") -> "RigidTransform":
        """Return self ∘ other (apply `other` first)."""
        return RigidTransform(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def inverse(self) -> "RigidTransform":
        rt = self.rotation.T
        return RigidTransform(rt, -rt @ self.translation)

    @property
    def yaw(self) -> float:
        """Rotation angle about z implied by the matrix (for z-dominant rotations)."""
        return float(np.arctan2(self.rotation[1, 0], self.rotation[0, 0]))

    @property
    def rotation_angle(self) -> float:
        """Magnitude of the rotation about its axis."""
        tr = np.clip((np.trace(self.rotation) - 1.0) / 2.0, -1.0, 1.0)
        return float(np.arccos(tr))


@dataclass(frozen=True)
class HullEdgeSet:
    """Undirected edges of a 3D convex hull.

    edges: (E, 2, 3) array; edges[i, 0] and edges[i, 1] are the endpoints.
    """

    edges: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=float)
        if e.ndim != 3 or e.shape[1:] != (2, 3):
            raise ParameterError(f"expected (E, 2, 3) edges, got shape {e.shape}")
        object.__setattr__(self, "edges", e)

    def __len__(self) -> int:
        return self.edges.shape[0]

    @property
    def lengths(self) -> np.ndarray:
        return np.linalg.norm(self.edges[:, 1] - self.edges[:, 0], axis=1)

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.edges[:, 0] + self.edges[:, 1])


class Heading(NamedTuple):
    """Principal horizontal direction of a cloud, with an ambiguity flag."""

    theta: float
    ambiguous: bool


def voxel_downsample(cloud: PointCloud, leaf: float) -> PointCloud:
    """Collapse each occupied voxel to the centroid of its points.

    The voxel grid is anchored at the coordinate origin so results are
    reproducible run to run. Output order follows lexicographic voxel index,
    which makes the operation idempotent for a fixed leaf.
    """
    if leaf <= 0:
        raise ParameterError(f"voxel leaf must be positive, got {leaf}")
    pts = cloud.points
    if len(cloud) == 0:
        return PointCloud(pts.copy(), cloud.frame_label)
    keys = np.floor(pts / leaf).astype(np.int64)
    mins = keys.min(axis=0)
    shifted = keys - mins
    dims = shifted.max(axis=0) + 1
    flat = (shifted[:, 0] * dims[1] + shifted[:, 1]) * dims[2] + shifted[:, 2]
    uniq, inverse = np.unique(flat, return_inverse=True)
    sums = np.zeros((uniq.size, 3))
    np.add.at(sums, inverse, pts)
    counts = np.bincount(inverse, minlength=uniq.size).astype(float)
    return PointCloud(sums / counts[:, None], cloud.frame_label)


def radius_outlier_filter(
    cloud: PointCloud, radius: float, min_neighbors: int
) -> PointCloud:
    """Keep points that have at least `min_neighbors` other points within `radius`."""
    if radius <= 0:
        raise ParameterError(f"radius must be positive, got {radius}")
    if min_neighbors < 1:
        raise ParameterError(f"min_neighbors must be >= 1, got {min_neighbors}")
    if len(cloud) == 0:
        return PointCloud(cloud.points.copy(), cloud.frame_label)
    tree = cKDTree(cloud.points)
    counts = tree.query_ball_point(cloud.points, radius, return_length=True, workers=-1)
    keep = (counts - 1) >= min_neighbors  # query_ball_point counts the point itself
    return PointCloud(cloud.points[keep], cloud.frame_label)


def convex_hull_edges(cloud: PointCloud) -> HullEdgeSet:
    """Edges of the 3D convex hull, with coplanar facets merged.

    Qhull triangulates facets; edges shared by two coplanar triangles (face
    diagonals) are dropped so the result is the true polytope edge set.
    """
    if len(cloud) < 4:
        raise DegenerateGeometryError(
            f"convex hull needs >= 4 points, got {len(cloud)}"
        )
    try:
        hull = ConvexHull(cloud.points, qhull_options="Qt")
    except QhullError as exc:
        first = str(exc).splitlines()[0] if str(exc) else "degenerate input"
        raise DegenerateGeometryError(f"hull computation failed: {first}") from exc
    edges = []
    for i, simplex in enumerate(hull.simplices):
        for j in range(3):
            k = hull.neighbors[i, j]
            if k < i:
                continue  # visit each shared edge once
            if np.dot(hull.equations[i, :3], hull.equations[k, :3]) >= 1.0 - 1e-9:
                continue  # coplanar neighbors: internal triangulation edge
            pair = [v for m, v in enumerate(simplex) if m != j]
            a, b = cloud.points[pair[0]], cloud.points[pair[1]]
            if np.linalg.norm(b - a) > 0.0:
                edges.append((a, b))
    if not edges:
        raise DegenerateGeometryError("hull has no non-degenerate edges")
    return HullEdgeSet(np.array(edges))


def covariance(cloud: PointCloud) -> np.ndarray:
    """3x3 covariance about the centroid with 1/n normalization."""
    if len(cloud) < 3:
        raise DegenerateGeometryError(f"covariance needs >= 3 points, got {len(cloud)}")
    centered = cloud.points - cloud.points.mean(axis=0)
    return (centered.T @ centered) / len(cloud)


def principal_heading(cloud: PointCloud) -> Heading:
    """Heading of the dominant horizontal covariance eigenvector.

    Selection maximizes the horizontal variance the eigenvector explains,
    eigenvalue * (x^2 + y^2 of the unit eigenvector): for gravity-aligned
    clouds both in-plane eigenvectors have horizontal norm ~1, so the raw
    norm alone is a knife-edge tie; weighting by the eigenvalue resolves it
    toward the building's long axis, stably across subsampling and rotation.
    The eigenvector sign is fixed so its x component is non-negative (y
    non-negative on ties), pinning the result to (-pi/2, pi/2]; the remaining
    pi ambiguity is left to the rotation search downstream.
    """
    cov = covariance(cloud)
    eigvals, eigvecs = np.linalg.eigh(cov)  # ascending eigenvalues
    if eigvals[1] <= 1e-18 * max(eigvals[2], 1.0):
        raise DegenerateGeometryError("covariance rank < 2: heading undefined")
    horiz = np.hypot(eigvecs[0, :], eigvecs[1, :])
    weight = eigvals * horiz**2  # horizontal variance explained
    best = int(np.argmax(weight))
    if horiz[best] < 1e-12:
        raise DegenerateGeometryError("no eigenvector with horizontal component")
    vec = eigvecs[:, best]
    if vec[0] < 0 or (vec[0] == 0 and vec[1] < 0):
        vec = -vec
    theta = float(np.arctan2(vec[1], vec[0]))
    # a heading is meaningful only if the in-plane variance is anisotropic:
    # compare the eigenvalues of the horizontal 2x2 covariance block
    plane = np.linalg.eigvalsh(cov[:2, :2])
    ambiguous = bool(plane[1] - plane[0] <= HEADING_GAP_TOL * max(plane[1], 1e-300))
    return Heading(theta, ambiguous)
