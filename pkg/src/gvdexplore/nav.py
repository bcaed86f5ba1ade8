"""Grid path planning: A* over the discovered map with obstacle inflation."""

from __future__ import annotations

import heapq
import math

import numpy as np

from . import _kernels
from .errors import InvalidStartError
from .grid import FREE, OCCUPIED, UNKNOWN, OccupancyGrid

SQRT2 = math.sqrt(2.0)

_STEPS = (
    (-1, -1, SQRT2), (-1, 0, 1.0), (-1, 1, SQRT2),
    (0, -1, 1.0), (0, 1, 1.0),
    (1, -1, SQRT2), (1, 0, 1.0), (1, 1, SQRT2),
)


def traversable_mask(discovered: OccupancyGrid, inflation: float = 0.25) -> np.ndarray:
    """Free cells farther than ``inflation`` meters from any occupied cell."""
    free = discovered.cells == FREE
    occupied = discovered.cells == OCCUPIED
    if not occupied.any() or inflation <= 0:
        return free
    dist = np.empty(free.shape, dtype=np.float64)
    _kernels.chamfer_cells(np.ascontiguousarray(occupied, dtype=np.uint8), dist)
    return free & (dist * discovered.resolution > inflation)


def _octile(r0: int, c0: int, r1: int, c1: int) -> float:
    dr, dc = abs(r0 - r1), abs(c0 - c1)
    return max(dr, dc) + (SQRT2 - 1.0) * min(dr, dc)


def _simplify(cells: list[tuple[int, int]]) -> list[tuple[int, int]]:
    if len(cells) <= 2:
        return cells
    out = [cells[0]]
    for prev, cur, nxt in zip(cells[:-2], cells[1:-1], cells[2:]):
        d0 = (cur[0] - prev[0], cur[1] - prev[1])
        d1 = (nxt[0] - cur[0], nxt[1] - cur[1])
        if d0 != d1:
            out.append(cur)
    out.append(cells[-1])
    return out


def plan_path(
    discovered: OccupancyGrid,
    from_xy: tuple[float, float],
    to_xy: tuple[float, float],
    inflation: float = 0.25,
    snap_radius: float = 0.5,
) -> list[tuple[float, float]] | None:
    """8-connected A* (diagonal cost sqrt(2)) over inflated free space.

    Unknown cells are blocked except as the terminal cell, so frontier
    centroids remain valid goals.  An occupied or inflated goal cell snaps
    to the nearest eligible cell within snap_radius.  Returns a collinear-
    simplified polyline of cell centers, or None when unreachable.
    """
    cells = discovered.cells
    res = discovered.resolution
    start = discovered.world_to_cell(*from_xy)
    if not discovered.in_bounds(start.col, start.row):
        raise InvalidStartError(f"start {from_xy} outside the grid")
    if cells[start.row, start.col] != FREE:
        raise InvalidStartError(f"start {from_xy} is not in free discovered space")

    open_mask = traversable_mask(discovered, inflation)
    open_mask[start.row, start.col] = True  # the robot may leave an inflated cell

    goal = discovered.world_to_cell(*to_xy)
    goal_rc = (goal.row, goal.col)

    def eligible(r: int, c: int) -> bool:
        return open_mask[r, c] or cells[r, c] == UNKNOWN

    if not (discovered.in_bounds(goal.col, goal.row) and eligible(goal.row, goal.col)):
        goal_rc = _snap_goal(discovered, open_mask, to_xy, snap_radius)
        if goal_rc is None:
            return None

    h, w = cells.shape
    start_rc = (start.row, start.col)
    if start_rc == goal_rc:
        return [discovered.cell_center(start.col, start.row)]

    g = {start_rc: 0.0}
    came: dict[tuple[int, int], tuple[int, int]] = {}
    counter = 0
    heap = [(_octile(*start_rc, *goal_rc), counter, start_rc)]
    closed = set()
    while heap:
        _, _, cur = heapq.heappop(heap)
        if cur in closed:
            continue
        if cur == goal_rc:
            path = [cur]
            while path[-1] in came:
                path.append(came[path[-1]])
            path.reverse()
            return [
                discovered.cell_center(c, r) for r, c in _simplify(path)
            ]
        closed.add(cur)
        r, c = cur
        for dr, dc, cost in _STEPS:
            nr, nc = r + dr, c + dc
            if not (0 <= nr < h and 0 <= nc < w):
                continue
            nxt = (nr, nc)
            if nxt == goal_rc:
                if not eligible(nr, nc):
                    continue
            elif not open_mask[nr, nc]:
                continue
            ng = g[cur] + cost
            if ng < g.get(nxt, math.inf) - 1e-12:
                g[nxt] = ng
                came[nxt] = cur
                counter += 1
                heapq.heappush(heap, (ng + _octile(nr, nc, *goal_rc), counter, nxt))
    return None


def nearest_reachable_point(
    discovered: OccupancyGrid,
    from_xy: tuple[float, float],
    target_xy: tuple[float, float],
    inflation: float = 0.25,
) -> tuple[float, float] | None:
    """Center of the traversable cell, reachable from ``from_xy``, closest
    to ``target_xy`` (a viewpoint for goals that cannot be reached yet)."""
    start = discovered.world_to_cell(*from_xy)
    if not discovered.in_bounds(start.col, start.row):
        raise InvalidStartError(f"start {from_xy} outside the grid")
    open_mask = traversable_mask(discovered, inflation)
    open_mask[start.row, start.col] = True
    h, w = open_mask.shape
    seen = np.zeros_like(open_mask)
    seen[start.row, start.col] = True
    stack = [(start.row, start.col)]
    best = None
    best_d2 = math.inf
    tx, ty = target_xy
    while stack:
        r, c = stack.pop()
        cx, cy = discovered.cell_center(c, r)
        d2 = (cx - tx) ** 2 + (cy - ty) ** 2
        if d2 < best_d2 or (d2 == best_d2 and best is not None and (r, c) < best):
            best_d2 = d2
            best = (r, c)
        for dr, dc, _ in _STEPS:
            nr, nc = r + dr, c + dc
            if 0 <= nr < h and 0 <= nc < w and open_mask[nr, nc] and not seen[nr, nc]:
                seen[nr, nc] = True
                stack.append((nr, nc))
    if best is None:
        return None
    return discovered.cell_center(best[1], best[0])


def _snap_goal(discovered, open_mask, to_xy, snap_radius):
    res = discovered.resolution
    cells = discovered.cells
    gx, gy = to_xy
    radius_cells = int(math.ceil(snap_radius / res)) + 1
    center = discovered.world_to_cell(gx, gy)
    best = None
    best_d = math.inf
    for r in range(center.row - radius_cells, center.row + radius_cells + 1):
        for c in range(center.col - radius_cells, center.col + radius_cells + 1):
            if not discovered.in_bounds(c, r):
                continue
            if not (open_mask[r, c] or cells[r, c] == UNKNOWN):
                continue
            cx, cy = discovered.cell_center(c, r)
            d = math.hypot(cx - gx, cy - gy)
            if d <= snap_radius and (d < best_d or (d == best_d and (r, c) < best)):
                best = (r, c)
                best_d = d
    return best
