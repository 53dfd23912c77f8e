"""Four-phase alignment of a first LiDAR scan to the a-priori interior map.

Phases: data loading (voxelize both clouds, outlier-filter the scan), global
correlation (hull barycenters + covariance headings give a coarse transform),
global registration (a fan of z-rotation initializations refined by loose ICP
copes with laterally symmetric interiors), and a final strict ICP fine-tune.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from .errors import (
    AlignmentPhaseError,
    DegenerateGeometryError,
    ParameterError,
    RegistrationFailureError,
)
from .geometry import (
    HullEdgeSet,
    PointCloud,
    RigidTransform,
    convex_hull_edges,
    principal_heading,
    radius_outlier_filter,
    voxel_downsample,
)


@dataclass(frozen=True)
class IcpParams:
    """Correspondence gate and convergence limits for one ICP run."""

    max_corr_dist: float
    max_iterations: int
    translation_eps: float = 1e-4
    rotation_eps: float = 1e-4

    def __post_init__(self):
        for name in ("max_corr_dist", "max_iterations", "translation_eps", "rotation_eps"):
            if getattr(self, name) <= 0:
                raise ParameterError(f"IcpParams.{name} must be positive")


@dataclass(frozen=True)
class AlignmentConfig:
    """Pipeline parameters, sized by default for church-scale interiors."""

    leaf_map: float = 0.25
    leaf_scan: float = 0.25
    outlier_radius: float = 1.0
    outlier_min_neighbors: int = 5
    rotation_count: int = 8
    loose_icp: IcpParams = field(default_factory=lambda: IcpParams(2.0, 30, 1e-3, 1e-3))
    strict_icp: IcpParams = field(default_factory=lambda: IcpParams(0.5, 100, 1e-4, 1e-4))

    def __post_init__(self):
        if self.rotation_count < 1:
            raise ParameterError("rotation_count must be >= 1")
        if self.loose_icp.max_corr_dist < self.strict_icp.max_corr_dist:
            raise ParameterError(
                "loose ICP correspondence gate must be >= strict gate"
            )

    @classmethod
    def from_dict(cls, d: dict) -> "AlignmentConfig":
        kwargs = dict(d)
        for key in ("loose_icp", "strict_icp"):
            if key in kwargs and isinstance(kwargs[key], dict):
                kwargs[key] = IcpParams(**kwargs[key])
        return cls(**kwargs)


@dataclass
class IcpResult:
    transform: RigidTransform
    cost: float  # mean squared correspondence distance, m^2
    iterations: int
    converged: bool
    no_overlap: bool
    matched: int
    cost_trace: list


@dataclass
class GlobalCorrelation:
    transform: RigidTransform
    theta_map: float
    theta_scan: float
    scan_pivot: np.ndarray  # scan hull barycenter; pivot for yaw initializations
    warnings: list


@dataclass
class AlignmentResult:
    transform: RigidTransform  # scan frame -> map frame
    cost: float
    best_yaw: float
    yaw_costs: list  # (yaw, loose-ICP cost) per initialization
    converged: bool
    warnings: list

    def to_dict(self) -> dict:
        return {
            "transform": [[float(v) for v in row] for row in self.transform.matrix],
            "cost_m2": float(self.cost),
            "best_yaw_rad": float(self.best_yaw),
            "yaw_costs": [
                {"yaw_rad": float(t), "cost_m2": float(c)} for t, c in self.yaw_costs
            ],
            "converged": bool(self.converged),
            "warnings": list(self.warnings),
        }


def polyline_barycenter(hull: HullEdgeSet) -> np.ndarray:
    """Edge-length-weighted mean of edge midpoints."""
    lengths = hull.lengths
    total = lengths.sum()
    if total <= 0:
        raise DegenerateGeometryError("all hull edges have zero length")
    return (hull.midpoints * lengths[:, None]).sum(axis=0) / total


def preprocess(
    map_cloud: PointCloud, scan_cloud: PointCloud, config: AlignmentConfig
) -> tuple:
    """Data-loading phase: voxelize both clouds, outlier-filter the scan."""
    map_pre = voxel_downsample(map_cloud, config.leaf_map)
    scan_pre = voxel_downsample(scan_cloud, config.leaf_scan)
    scan_pre = radius_outlier_filter(
        scan_pre, config.outlier_radius, config.outlier_min_neighbors
    )
    if len(map_pre) == 0 or len(scan_pre) == 0:
        raise ParameterError("preprocessing produced an empty cloud")
    return map_pre, scan_pre


def global_correlation(map_pre: PointCloud, scan_pre: PointCloud) -> GlobalCorrelation:
    """Coarse transform matching hull barycenters, ground heights, and headings.

    The horizontal translation moves the scan's hull barycenter onto the
    map's; the vertical translation couples the minimum heights (both clouds
    are assumed gravity-aligned and ground-containing); the rotation is a
    z-rotation by the heading difference, pivoted at the scan barycenter so
    the barycenters stay matched for any rotation angle.
    """
    warnings = []
    b_map = polyline_barycenter(convex_hull_edges(map_pre))
    b_scan = polyline_barycenter(convex_hull_edges(scan_pre))
    translation = b_map - b_scan
    translation[2] = map_pre.min_z - scan_pre.min_z
    h_map = principal_heading(map_pre)
    h_scan = principal_heading(scan_pre)
    if h_map.ambiguous:
        warnings.append("map principal heading is ambiguous (near-isotropic covariance)")
    if h_scan.ambiguous:
        warnings.append("scan principal heading is ambiguous (near-isotropic covariance)")
    theta = h_map.theta - h_scan.theta
    transform = RigidTransform.from_translation(translation).compose(
        RigidTransform.rot_z(theta, center=b_scan)
    )
    return GlobalCorrelation(transform, h_map.theta, h_scan.theta, b_scan, warnings)


def icp(
    map_cloud: PointCloud,
    scan_cloud: PointCloud,
    init: RigidTransform,
    params: IcpParams,
    tree: Optional[cKDTree] = None,
) -> IcpResult:
    """Point-to-point ICP with a closed-form SVD update.

    Correspondences are gated at params.max_corr_dist; the cost is the mean
    squared distance over matched pairs. Deterministic for fixed inputs: the
    kd-tree breaks distance ties by point index.
    """
    if len(map_cloud) == 0 or len(scan_cloud) == 0:
        raise ParameterError("ICP requires non-empty clouds")
    if tree is None:
        tree = cKDTree(map_cloud.points)
    src = scan_cloud.points
    transform = init
    cost = float("inf")
    trace = []
    for iteration in range(1, params.max_iterations + 1):
        moved = transform.apply(src)
        dists, idx = tree.query(
            moved, k=1, distance_upper_bound=params.max_corr_dist, workers=-1
        )
        mask = np.isfinite(dists)
        matched = int(mask.sum())
        if matched == 0:
            return IcpResult(init, float("inf"), iteration, False, True, 0, trace)
        cost = float(np.mean(dists[mask] ** 2))
        trace.append(cost)
        src_pts = moved[mask]
        dst_pts = map_cloud.points[idx[mask]]
        src_c = src_pts.mean(axis=0)
        dst_c = dst_pts.mean(axis=0)
        h = (src_pts - src_c).T @ (dst_pts - dst_c)
        u, _, vt = np.linalg.svd(h)
        d = np.sign(np.linalg.det(vt.T @ u.T))
        rot = vt.T @ np.diag([1.0, 1.0, d]) @ u.T
        delta = RigidTransform(rot, dst_c - rot @ src_c)
        transform = delta.compose(transform)
        if (
            np.linalg.norm(delta.translation) < params.translation_eps
            and delta.rotation_angle < params.rotation_eps
        ):
            moved = transform.apply(src)
            dists, _ = tree.query(
                moved, k=1, distance_upper_bound=params.max_corr_dist, workers=-1
            )
            final = dists[np.isfinite(dists)]
            if final.size:
                cost = float(np.mean(final**2))
                trace.append(cost)
            return IcpResult(transform, cost, iteration, True, False, matched, trace)
    return IcpResult(transform, cost, params.max_iterations, False, False, matched, trace)


# scan size above which the loose mode-selection trials run on a stride
# subsample; the winning pose is re-refined at full resolution afterwards
LOOSE_TRIAL_POINTS = 9000


def global_registration(
    map_pre: PointCloud,
    scan_pre: PointCloud,
    initial: RigidTransform,
    config: AlignmentConfig,
    pivot=(0.0, 0.0, 0.0),
    tree: Optional[cKDTree] = None,
):
    """Pick the z-rotation whose loose-ICP refinement has minimal cost.

    Evaluates initializations initial . Rz(2*pi*i/k, pivot) for i in 0..k-1
    (the fan that disambiguates laterally symmetric interiors); ties break
    toward the smallest index. Pivoting at the scan barycenter keeps every
    initialization overlapping the map. Large scans are stride-subsampled for
    the trials (deterministic; costs stay comparable across the fan).
    Returns (best_yaw, [(yaw, cost)], best IcpResult).
    """
    if tree is None:
        tree = cKDTree(map_pre.points)
    stride = max(1, len(scan_pre) // LOOSE_TRIAL_POINTS)
    trial_scan = (
        PointCloud(scan_pre.points[::stride], scan_pre.frame_label)
        if stride > 1
        else scan_pre
    )
    k = config.rotation_count
    yaw_costs = []
    best = None
    best_yaw = None
    for i in range(k):
        yaw = 2.0 * np.pi * i / k
        init = initial.compose(RigidTransform.rot_z(yaw, center=pivot))
        result = icp(map_pre, trial_scan, init, config.loose_icp, tree=tree)
        yaw_costs.append((yaw, result.cost))
        if result.no_overlap:
            continue
        if best is None or result.cost < best.cost:
            best = result
            best_yaw = yaw
    if best is None:
        raise RegistrationFailureError(
            f"all {k} initializations produced no in-gate correspondences"
        )
    return best_yaw, yaw_costs, best


def align(
    map_cloud: PointCloud, scan_cloud: PointCloud, config: AlignmentConfig = None
) -> AlignmentResult:
    """Full pipeline producing the scan-to-map origin transform."""
    config = config or AlignmentConfig()
    try:
        map_pre, scan_pre = preprocess(map_cloud, scan_cloud, config)
    except Exception as exc:
        raise AlignmentPhaseError("data loading", exc) from exc
    try:
        correlation = global_correlation(map_pre, scan_pre)
    except Exception as exc:
        raise AlignmentPhaseError("global correlation", exc) from exc
    tree = cKDTree(map_pre.points)
    try:
        best_yaw, yaw_costs, best_loose = global_registration(
            map_pre,
            scan_pre,
            correlation.transform,
            config,
            pivot=correlation.scan_pivot,
            tree=tree,
        )
    except RegistrationFailureError:
        raise
    except Exception as exc:
        raise AlignmentPhaseError("global registration", exc) from exc
    try:
        # fine-tune from the winning trial's refined pose: the raw barycenter
        # initialization can sit outside the strict correspondence gate
        fine = icp(map_pre, scan_pre, best_loose.transform, config.strict_icp, tree=tree)
    except Exception as exc:
        raise AlignmentPhaseError("fine tuning", exc) from exc
    warnings = list(correlation.warnings)
    if fine.no_overlap:
        warnings.append("strict ICP lost overlap; returning initialization")
    return AlignmentResult(
        transform=fine.transform,
        cost=fine.cost,
        best_yaw=best_yaw,
        yaw_costs=yaw_costs,
        converged=fine.converged,
        warnings=warnings,
    )
