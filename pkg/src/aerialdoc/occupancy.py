"""Occupancy grid construction and collision-free grid path planning.

The grid is anchored at the world origin (voxel index = floor(p/resolution))
and inflated by a Chebyshev dilation so a path for the robot center can be
planned as if the robot were a point. Paths come from 26-connected A* with
greedy line-of-sight shortcutting; segment clearance uses exact voxel
traversal, not sampling.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from itertools import product

import numpy as np
from scipy import ndimage

from .errors import InfeasiblePlanError, ParameterError
from .geometry import PointCloud, as_point

def _support_offsets(d):
    """Voxels a straight step through `d` grazes: every nonzero sub-pattern.

    Requiring these free prevents diagonal moves from cutting corners of
    blocked voxels.
    """
    axes = [i for i in range(3) if d[i] != 0]
    subs = []
    for mask in range(1, 2 ** len(axes) - 1):
        e = [0, 0, 0]
        for bit, axis in enumerate(axes):
            if mask >> bit & 1:
                e[axis] = d[axis]
        subs.append(np.array(e))
    return subs


_NEIGHBORS = [
    (np.array(d), float(np.linalg.norm(d)), _support_offsets(d))
    for d in product((-1, 0, 1), repeat=3)
    if d != (0, 0, 0)
]


@dataclass
class OccupancyGrid:
    """Sparse voxelization of the map with a Chebyshev-inflated twin.

    resolution: voxel edge length (m); origin: world position of the minimum
    corner of the stored array; inflation: metric dilation radius applied to
    the raw occupancy.
    """

    resolution: float
    origin: np.ndarray  # world coordinates of array cell (0,0,0)'s min corner
    inflation: float
    raw: np.ndarray  # bool, raw occupancy
    inflated: np.ndarray  # bool, dilated occupancy
    index_offset: np.ndarray  # world voxel index of array cell (0,0,0)

    @property
    def shape(self):
        return self.raw.shape

    def occupied_count(self, inflated: bool = False) -> int:
        return int((self.inflated if inflated else self.raw).sum())

    def occupied_voxels(self, inflated: bool = False) -> np.ndarray:
        """World voxel indices of occupied cells, lexicographically sorted."""
        grid = self.inflated if inflated else self.raw
        return np.argwhere(grid) + self.index_offset

    def voxel_index(self, point) -> np.ndarray:
        """World voxel index (grid anchored at the coordinate origin)."""
        return np.floor(np.asarray(point, dtype=float) / self.resolution).astype(np.int64)

    def _array_index(self, world_voxel) -> np.ndarray:
        return np.asarray(world_voxel) - self.index_offset

    def voxel_center(self, world_voxel) -> np.ndarray:
        return (np.asarray(world_voxel, dtype=float) + 0.5) * self.resolution

    def is_occupied(self, point, inflated: bool = True) -> bool:
        idx = self._array_index(self.voxel_index(point))
        if np.any(idx < 0) or np.any(idx >= self.shape):
            return False
        grid = self.inflated if inflated else self.raw
        return bool(grid[tuple(idx)])

    def _voxel_blocked(self, world_voxel) -> bool:
        idx = self._array_index(world_voxel)
        if np.any(idx < 0) or np.any(idx >= self.shape):
            return False
        return bool(self.inflated[tuple(idx)])


def build_occupancy_grid(
    map_cloud: PointCloud, resolution: float = 0.25, inflation: float = 0.75
) -> OccupancyGrid:
    """Mark every voxel containing at least one map point, then dilate."""
    if resolution <= 0:
        raise ParameterError(f"resolution must be positive, got {resolution}")
    if inflation < 0:
        raise ParameterError(f"inflation must be non-negative, got {inflation}")
    if len(map_cloud) == 0:
        raise ParameterError("cannot build an occupancy grid from an empty map")
    keys = np.floor(map_cloud.points / resolution).astype(np.int64)
    radius = int(np.ceil(inflation / resolution)) if inflation > 0 else 0
    lo = keys.min(axis=0) - radius - 1
    hi = keys.max(axis=0) + radius + 2
    shape = tuple(hi - lo)
    raw = np.zeros(shape, dtype=bool)
    raw[tuple((keys - lo).T)] = True
    if radius > 0:
        size = 2 * radius + 1
        inflated = ndimage.binary_dilation(raw, structure=np.ones((size,) * 3, dtype=bool))
    else:
        inflated = raw.copy()
    return OccupancyGrid(
        resolution=resolution,
        origin=lo.astype(float) * resolution,
        inflation=inflation,
        raw=raw,
        inflated=inflated,
        index_offset=lo,
    )


def segment_is_free(grid: OccupancyGrid, a, b) -> bool:
    """Exact voxel-traversal test: no inflated-occupied voxel intersects [a, b]."""
    a = as_point(a)
    b = as_point(b)
    res = grid.resolution
    voxel = grid.voxel_index(a)
    goal_voxel = grid.voxel_index(b)
    if grid._voxel_blocked(voxel):
        return False
    direction = b - a
    length = np.linalg.norm(direction)
    if length == 0 or np.array_equal(voxel, goal_voxel):
        return not grid._voxel_blocked(goal_voxel)
    step = np.sign(direction).astype(np.int64)
    safe = np.where(direction == 0, 1.0, direction)
    # parametric distance (t in [0,1] along the segment) to the first
    # boundary crossing per axis
    next_boundary = (voxel + (step > 0)) * res
    t_max = np.where(direction != 0, (next_boundary - a) / safe, np.inf)
    t_delta = np.where(direction != 0, res / np.abs(safe), np.inf)
    guard = int(np.abs(goal_voxel - voxel).sum()) + 3
    for _ in range(guard):
        if np.array_equal(voxel, goal_voxel):
            return True
        axis = int(np.argmin(t_max))
        if t_max[axis] >= 1.0 - 1e-12:
            # remaining crossings happen at or beyond the endpoint: the
            # segment only touches the boundary there
            return not grid._voxel_blocked(goal_voxel)
        voxel = voxel.copy()
        voxel[axis] += step[axis]
        t_max[axis] += t_delta[axis]
        if grid._voxel_blocked(voxel):
            return False
    return np.array_equal(voxel, goal_voxel)


def _shortcut(grid: OccupancyGrid, waypoints: list) -> list:
    """Greedy line-of-sight smoothing: keep the farthest directly visible node."""
    out = [waypoints[0]]
    i = 0
    while i < len(waypoints) - 1:
        j = len(waypoints) - 1
        while j > i + 1 and not segment_is_free(grid, waypoints[i], waypoints[j]):
            j -= 1
        out.append(waypoints[j])
        i = j
    return out


def plan_path(grid: OccupancyGrid, start, goal) -> list:
    """Collision-free polyline from start to goal through free voxels.

    26-connected A* over the inflated grid, then line-of-sight shortcutting.
    Raises InfeasiblePlanError for occupied endpoints or unreachable goals.
    """
    start = as_point(start)
    goal = as_point(goal)
    if grid.is_occupied(start):
        raise InfeasiblePlanError(f"start {start.tolist()} lies in inflated obstacle space")
    if grid.is_occupied(goal):
        raise InfeasiblePlanError(f"goal {goal.tolist()} lies in inflated obstacle space")
    if segment_is_free(grid, start, goal):
        return [start, goal]

    start_voxel = grid.voxel_index(start)
    goal_voxel = grid.voxel_index(goal)
    # search domain: inflated grid bounds padded, expanded to cover endpoints
    lo = np.minimum(grid.index_offset, np.minimum(start_voxel, goal_voxel) - 2)
    hi = np.maximum(
        grid.index_offset + np.array(grid.shape),
        np.maximum(start_voxel, goal_voxel) + 3,
    )

    def heuristic(v):
        return float(np.linalg.norm((goal_voxel - v).astype(float)))

    start_key = tuple(start_voxel)
    goal_key = tuple(goal_voxel)
    open_heap = [(heuristic(start_voxel), 0, start_key)]
    g_score = {start_key: 0.0}
    came_from = {}
    closed = set()
    counter = 0
    while open_heap:
        _, _, current = heapq.heappop(open_heap)
        if current == goal_key:
            break
        if current in closed:
            continue
        closed.add(current)
        cur = np.array(current)
        for offset, cost, supports in _NEIGHBORS:
            nxt = cur + offset
            if np.any(nxt < lo) or np.any(nxt >= hi):
                continue
            key = tuple(nxt)
            if key in closed or grid._voxel_blocked(nxt):
                continue
            if any(grid._voxel_blocked(cur + s) for s in supports):
                continue  # diagonal move would graze a blocked corner
            tentative = g_score[current] + cost
            if tentative < g_score.get(key, np.inf):
                g_score[key] = tentative
                came_from[key] = current
                counter += 1
                heapq.heappush(open_heap, (tentative + heuristic(nxt), counter, key))
    else:
        raise InfeasiblePlanError(
            f"no collision-free path from {start.tolist()} to {goal.tolist()}"
        )

    chain = [goal_key]
    while chain[-1] != start_key:
        chain.append(came_from[chain[-1]])
    voxel_path = [grid.voxel_center(np.array(k)) for k in reversed(chain)]
    waypoints = [start] + voxel_path[1:-1] + [goal]
    smoothed = _shortcut(grid, waypoints)
    for a, b in zip(smoothed[:-1], smoothed[1:]):
        if not segment_is_free(grid, a, b):
            raise InfeasiblePlanError("post-smoothing clearance audit failed")
    return smoothed


def path_length(path) -> float:
    pts = np.asarray(path, dtype=float)
    if len(pts) < 2:
        return 0.0
    return float(np.linalg.norm(np.diff(pts, axis=0), axis=1).sum())
