"""Static PGM snapshots: discovered map with skeleton, graph nodes,
frontiers, robot and goal overlaid in distinct gray levels."""

from __future__ import annotations

import numpy as np

from .frontiers import detect_frontiers
from .grid import FREE, OCCUPIED, UNKNOWN, OccupancyGrid, save_pgm
from .gvd import BRANCH, STEM, build_graph, extract_gvd
from .sim import SimState

GRAY_UNKNOWN = 128
GRAY_FREE = 255
GRAY_OCCUPIED = 0
GRAY_SKELETON = 190
GRAY_FRONTIER = 100
GRAY_BRANCH_NODE = 70
GRAY_STEM_NODE = 40
GRAY_GOAL = 25
GRAY_ROBOT = 10


def render_state(state: SimState, goal=None, min_frontier_size: int = 5) -> np.ndarray:
    """Compose the overlay raster (uint8, same shape as the map)."""
    grid = state.discovered
    img = np.full(grid.cells.shape, GRAY_UNKNOWN, dtype=np.uint8)
    img[grid.cells == FREE] = GRAY_FREE
    img[grid.cells == OCCUPIED] = GRAY_OCCUPIED

    matrix = extract_gvd(grid)
    img[matrix.mask] = GRAY_SKELETON

    frontiers = detect_frontiers(grid, min_frontier_size)
    for f in frontiers:
        for cell in f.cells:
            img[cell.row, cell.col] = GRAY_FRONTIER

    graph = build_graph(matrix, frontiers, grid)
    for node in graph.nodes:
        value = GRAY_STEM_NODE if node.kind == STEM else GRAY_BRANCH_NODE
        _stamp(img, node.cell, value)

    if goal is not None:
        c = grid.world_to_cell(goal.target.x, goal.target.y)
        _stamp(img, (c.row, c.col), GRAY_GOAL)
    rc = grid.world_to_cell(state.robot.x, state.robot.y)
    _stamp(img, (rc.row, rc.col), GRAY_ROBOT)
    return img


def _stamp(img: np.ndarray, cell: tuple[int, int], value: int) -> None:
    h, w = img.shape
    r0, c0 = cell
    for r in range(max(0, r0 - 1), min(h, r0 + 2)):
        for c in range(max(0, c0 - 1), min(w, c0 + 2)):
            img[r, c] = value


def save_snapshot_pgm(state: SimState, path, goal=None, min_frontier_size: int = 5) -> None:
    save_pgm(render_state(state, goal, min_frontier_size), path)
