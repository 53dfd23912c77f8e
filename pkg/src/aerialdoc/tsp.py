"""Open-tour viewpoint sequencing.

Nearest-neighbor construction followed by 2-opt and Or-opt improvement until
no improving move exists (the classic Lin-Kernighan move repertoire at depth
one). The tour is open: it starts at a fixed takeoff index and does not
return. Deterministic for a fixed input order: sweeps scan in index order and
apply the first improving move.
"""

from __future__ import annotations

from itertools import permutations

import numpy as np

from .errors import InfeasiblePlanError, ParameterError
from .occupancy import OccupancyGrid, path_length, plan_path


def euclidean_matrix(positions: np.ndarray) -> np.ndarray:
    diff = positions[:, None, :] - positions[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def path_length_matrix(positions: np.ndarray, grid: OccupancyGrid) -> np.ndarray:
    """Pairwise collision-free path lengths (symmetric; independent queries)."""
    n = len(positions)
    dist = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            try:
                path = plan_path(grid, positions[i], positions[j])
            except InfeasiblePlanError as exc:
                raise InfeasiblePlanError(
                    f"no collision-free path between poses {i} and {j}: {exc}"
                ) from exc
            dist[i, j] = dist[j, i] = path_length(path)
    return dist


def tour_length(order, dist: np.ndarray) -> float:
    return float(sum(dist[a, b] for a, b in zip(order[:-1], order[1:])))


def _nearest_neighbor_order(dist: np.ndarray, start: int) -> list:
    n = dist.shape[0]
    unvisited = set(range(n)) - {start}
    order = [start]
    while unvisited:
        last = order[-1]
        nxt = min(unvisited, key=lambda j: (dist[last, j], j))
        order.append(nxt)
        unvisited.remove(nxt)
    return order


def _two_opt_pass(order: list, dist: np.ndarray) -> bool:
    """Reverse one segment if it shortens the open tour. First improvement."""
    n = len(order)
    for i in range(1, n - 1):
        for j in range(i + 1, n):
            before = dist[order[i - 1], order[i]]
            after = dist[order[i - 1], order[j]]
            if j < n - 1:
                before += dist[order[j], order[j + 1]]
                after += dist[order[i], order[j + 1]]
            if after < before - 1e-12:
                order[i : j + 1] = reversed(order[i : j + 1])
                return True
    return False


def _or_opt_pass(order: list, dist: np.ndarray) -> bool:
    """Relocate a chain of 1-3 nodes (possibly reversed) if it shortens the tour."""
    n = len(order)
    for size in (1, 2, 3):
        for i in range(1, n - size + 1):
            chain = order[i : i + size]
            prev_node = order[i - 1]
            removal = dist[prev_node, chain[0]]
            if i + size < n:
                removal += dist[chain[-1], order[i + size]]
                removal -= dist[prev_node, order[i + size]]
            rest = order[:i] + order[i + size :]
            variants = [chain] if size == 1 else [chain, chain[::-1]]
            for k in range(1, len(rest) + 1):
                left = rest[k - 1]
                for cand in variants:
                    if k == i and cand is chain:
                        continue  # same position, same orientation
                    insertion = dist[left, cand[0]]
                    if k < len(rest):
                        insertion += dist[cand[-1], rest[k]]
                        insertion -= dist[left, rest[k]]
                    if insertion < removal - 1e-12:
                        order[:] = rest[:k] + cand + rest[k:]
                        return True
    return False


def _local_search(order: list, dist: np.ndarray) -> None:
    improved = True
    while improved:
        improved = _two_opt_pass(order, dist)
        if not improved:
            improved = _or_opt_pass(order, dist)


def _double_bridge(order: list, rng) -> list:
    """4-opt kick: cut the tail into three blocks and rotate them."""
    n = len(order)
    if n < 5:
        return list(order)
    cuts = sorted(rng.choice(np.arange(1, n), size=3, replace=False))
    a, b, c = cuts
    return order[:a] + order[b:c] + order[a:b] + order[c:]


def solve_tsp(
    positions,
    dist_mode: str = "euclidean",
    grid: OccupancyGrid = None,
    start: int = 0,
) -> list:
    """Order all poses into an open tour from the takeoff pose.

    positions: (n, 3) array-like of pose positions; the tour visits each index
    exactly once starting at `start`. dist_mode 'euclidean' or 'path_length'
    (the latter needs an occupancy grid).
    """
    positions = np.asarray(positions, dtype=float)
    if positions.ndim != 2 or positions.shape[1] != 3:
        raise ParameterError(f"expected (n, 3) positions, got {positions.shape}")
    n = len(positions)
    if n == 0:
        raise ParameterError("no poses to sequence")
    if not 0 <= start < n:
        raise ParameterError(f"start index {start} out of range")
    if n == 1:
        return [0]
    if dist_mode == "euclidean":
        dist = euclidean_matrix(positions)
    elif dist_mode == "path_length":
        if grid is None:
            raise ParameterError("path_length mode requires an occupancy grid")
        dist = path_length_matrix(positions, grid)
    else:
        raise ParameterError(f"unknown distance mode '{dist_mode}'")

    order = _nearest_neighbor_order(dist, start)
    _local_search(order, dist)
    best = list(order)
    best_len = tour_length(best, dist)
    # iterated local search: double-bridge kicks plus a few shuffled restarts,
    # all on a fixed-seed schedule so results depend only on the input order
    rng = np.random.default_rng(0)
    kicks = 12 if n >= 5 else 0
    restarts = 4 if n >= 4 else 0
    current = list(best)
    for _ in range(kicks):
        candidate = _double_bridge(current, rng)
        _local_search(candidate, dist)
        cand_len = tour_length(candidate, dist)
        if cand_len < best_len - 1e-12:
            best, best_len = list(candidate), cand_len
            current = list(candidate)
        else:
            current = list(best)
    tail = list(range(n))
    tail.remove(start)
    for _ in range(restarts):
        rng.shuffle(tail)
        candidate = [start, *tail]
        _local_search(candidate, dist)
        cand_len = tour_length(candidate, dist)
        if cand_len < best_len - 1e-12:
            best, best_len = list(candidate), cand_len
    return best


def exhaustive_tsp(positions, start: int = 0) -> list:
    """Exact optimum by enumeration; oracle-sized inputs only (n <= 10)."""
    positions = np.asarray(positions, dtype=float)
    n = len(positions)
    if n > 10:
        raise ParameterError("exhaustive search limited to n <= 10")
    dist = euclidean_matrix(positions)
    others = [i for i in range(n) if i != start]
    best_order = None
    best_len = np.inf
    for perm in permutations(others):
        total = 0.0
        prev = start
        for node in perm:
            total += dist[prev, node]
            prev = node
            if total >= best_len:
                break
        else:
            if total < best_len:
                best_len = total
                best_order = [start, *perm]
    return best_order
