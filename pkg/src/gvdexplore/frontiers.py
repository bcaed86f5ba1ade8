"""Frontier extraction and the two frontier-selection utilities.

A frontier cell is an unknown cell with at least one free 4-neighbor; cells
are grouped into 8-connected regions.  Selection is either greedy over the
whole map (weighted distance minus size) or oriented within a local window
(min-max normalized distance, size and steering terms).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .grid import FREE, UNKNOWN, CellIndex, OccupancyGrid
from .sim import Pose, wrap_angle

_EIGHT = np.ones((3, 3), dtype=np.uint8)


@dataclass
class Frontier:
    id: int
    cells: list[CellIndex]
    centroid: tuple[float, float]
    size: int


@dataclass
class FrontierCosts:
    distance: float
    size: int
    steering: float  # radians in [0, pi]


@dataclass
class LocalWindow:
    center: tuple[float, float]
    half_extent: float

    def __post_init__(self):
        if self.half_extent <= 0:
            raise ValueError("half_extent must be > 0")

    def contains(self, x: float, y: float) -> bool:
        return (
            abs(x - self.center[0]) <= self.half_extent
            and abs(y - self.center[1]) <= self.half_extent
        )


def frontier_cell_mask(discovered: OccupancyGrid) -> np.ndarray:
    """Unknown cells that touch a free cell through a 4-neighbor edge."""
    cells = discovered.cells
    unknown = cells == UNKNOWN
    free = cells == FREE
    near_free = np.zeros_like(free)
    near_free[1:, :] |= free[:-1, :]
    near_free[:-1, :] |= free[1:, :]
    near_free[:, 1:] |= free[:, :-1]
    near_free[:, :-1] |= free[:, 1:]
    return unknown & near_free


def detect_frontiers(discovered: OccupancyGrid, min_size: int = 5) -> list[Frontier]:
    """All maximal 8-connected frontier regions of at least min_size cells,
    ordered (and numbered) by their minimum (row, col)."""
    mask = frontier_cell_mask(discovered)
    labels, n = ndimage.label(mask, structure=_EIGHT)
    if n == 0:
        return []
    regions = []
    rows, cols = np.nonzero(labels)
    for lab in range(1, n + 1):
        pick = labels[rows, cols] == lab
        rr, cc = rows[pick], cols[pick]
        if rr.size < min_size:
            continue
        order = np.lexsort((cc, rr))
        rr, cc = rr[order], cc[order]
        regions.append((int(rr[0]), int(cc[0]), rr, cc))
    regions.sort(key=lambda t: (t[0], t[1]))
    out = []
    res = discovered.resolution
    ox, oy = discovered.origin
    for fid, (_, _, rr, cc) in enumerate(regions):
        cx = ox + (float(cc.mean()) + 0.5) * res
        cy = oy + (float(rr.mean()) + 0.5) * res
        out.append(
            Frontier(
                id=fid,
                cells=[CellIndex(int(c), int(r)) for r, c in zip(rr, cc)],
                centroid=(cx, cy),
                size=int(rr.size),
            )
        )
    return out


def frontier_costs(frontier: Frontier, robot: Pose) -> FrontierCosts:
    dx = frontier.centroid[0] - robot.x
    dy = frontier.centroid[1] - robot.y
    distance = math.hypot(dx, dy)
    steering = abs(wrap_angle(math.atan2(dy, dx) - robot.theta))
    return FrontierCosts(distance=distance, size=frontier.size, steering=steering)


def greedy_select(
    frontiers: list[Frontier], robot: Pose, w_d: float = 1.0, w_s: float = 1.0
) -> Frontier | None:
    """Global greedy pick: argmin of w_d*distance - w_s*size over all
    frontiers; ties go to the lowest id."""
    if w_d < 0 or w_s < 0:
        raise ValueError("weights must be >= 0")
    best = None
    best_cost = math.inf
    for f in frontiers:
        cost = w_d * frontier_costs(f, robot).distance - w_s * f.size
        if cost < best_cost or (cost == best_cost and best is not None and f.id < best.id):
            best = f
            best_cost = cost
    return best


def normalize_component(values: list[float]) -> list[float]:
    """Min-max rescale to [0, 1]; a spread-free component maps to all zeros."""
    lo, hi = min(values), max(values)
    if hi <= lo:
        return [0.0 for _ in values]
    return [(v - lo) / (hi - lo) for v in values]


def oriented_select(
    frontiers: list[Frontier], robot: Pose, window: LocalWindow
) -> Frontier | None:
    """Window-local pick: argmin of |D| - |S| + |R| with each component
    min-max normalized across the in-window candidates."""
    cands = [f for f in frontiers if window.contains(*f.centroid)]
    if not cands:
        return None
    costs = [frontier_costs(f, robot) for f in cands]
    nd = normalize_component([c.distance for c in costs])
    ns = normalize_component([float(c.size) for c in costs])
    nr = normalize_component([c.steering for c in costs])
    best = None
    best_cost = math.inf
    for f, d, s, r in zip(cands, nd, ns, nr):
        cost = d - s + r
        if cost < best_cost or (cost == best_cost and best is not None and f.id < best.id):
            best = f
            best_cost = cost
    return best
