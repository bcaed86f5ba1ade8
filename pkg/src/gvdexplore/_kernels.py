"""Hot inner-loop kernels shared by the grid, sensor and skeleton code.

Every kernel is written once as a plain Python/numpy function and compiled
with numba when it is available.  Setting the environment variable
``GVDEXPLORE_NUMBA=0`` before import selects the uncompiled fallback path;
both paths run the exact same code and produce bit-identical results.
"""

import os

import numpy as np

FREE = 0
OCCUPIED = 1
UNKNOWN = 2

# terminal codes for ray traversal
HIT_OBSTACLE = 0
HIT_MAXRANGE = 1
HIT_MAPEDGE = 2

USE_NUMBA = os.environ.get("GVDEXPLORE_NUMBA", "1") != "0"

if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        USE_NUMBA = False

if not USE_NUMBA:
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


@njit(cache=True)
def chamfer_cells(obstacle, out):
    """Two-pass 3-4 chamfer distance to the nearest obstacle cell.

    ``obstacle`` is a uint8 mask (1 = obstacle), ``out`` receives distances
    in cell units (weights 3/4 divided by 3, so an orthogonal step costs 1.0
    and a diagonal step 4/3).  Relative error vs. Euclidean is within 8%.
    """
    h, w = obstacle.shape
    big = np.float64(1e18)
    for r in range(h):
        for c in range(w):
            out[r, c] = 0.0 if obstacle[r, c] == 1 else big

    # forward pass: N, NW, NE, W predecessors
    for r in range(h):
        for c in range(w):
            d = out[r, c]
            if d == 0.0:
                continue
            if c > 0 and out[r, c - 1] + 1.0 < d:
                d = out[r, c - 1] + 1.0
            if r > 0:
                if out[r - 1, c] + 1.0 < d:
                    d = out[r - 1, c] + 1.0
                if c > 0 and out[r - 1, c - 1] + 4.0 / 3.0 < d:
                    d = out[r - 1, c - 1] + 4.0 / 3.0
                if c + 1 < w and out[r - 1, c + 1] + 4.0 / 3.0 < d:
                    d = out[r - 1, c + 1] + 4.0 / 3.0
            out[r, c] = d

    # backward pass: S, SE, SW, E successors
    for r in range(h - 1, -1, -1):
        for c in range(w - 1, -1, -1):
            d = out[r, c]
            if d == 0.0:
                continue
            if c + 1 < w and out[r, c + 1] + 1.0 < d:
                d = out[r, c + 1] + 1.0
            if r + 1 < h:
                if out[r + 1, c] + 1.0 < d:
                    d = out[r + 1, c] + 1.0
                if c + 1 < w and out[r + 1, c + 1] + 4.0 / 3.0 < d:
                    d = out[r + 1, c + 1] + 4.0 / 3.0
                if c > 0 and out[r + 1, c - 1] + 4.0 / 3.0 < d:
                    d = out[r + 1, c - 1] + 4.0 / 3.0
            out[r, c] = d


@njit(cache=True)
def ray_traverse(cells, ox, oy, dx, dy, max_t):
    """Walk a ray through the grid (Amanatides-Woo line traversal).

    Origin and the returned distance are in cell units; (ox, oy) must lie
    inside the grid.  Returns (t, terminal, hit_row, hit_col) where t is the
    distance to the first occupied-cell boundary, the map edge, or max_t.
    hit_row/hit_col are -1 unless terminal == HIT_OBSTACLE.
    """
    h, w = cells.shape
    col = int(np.floor(ox))
    row = int(np.floor(oy))
    if col < 0 or col >= w or row < 0 or row >= h:
        return -1.0, HIT_MAPEDGE, -1, -1

    if cells[row, col] == OCCUPIED:
        return 0.0, HIT_OBSTACLE, row, col

    step_c = 1 if dx > 0.0 else (-1 if dx < 0.0 else 0)
    step_r = 1 if dy > 0.0 else (-1 if dy < 0.0 else 0)

    inf = np.float64(1e30)
    if dx != 0.0:
        next_cx = col + 1.0 if step_c > 0 else float(col)
        t_max_x = (next_cx - ox) / dx
        t_dx = abs(1.0 / dx)
    else:
        t_max_x = inf
        t_dx = inf
    if dy != 0.0:
        next_cy = row + 1.0 if step_r > 0 else float(row)
        t_max_y = (next_cy - oy) / dy
        t_dy = abs(1.0 / dy)
    else:
        t_max_y = inf
        t_dy = inf

    while True:
        if t_max_x < t_max_y:
            t = t_max_x
            col += step_c
            t_max_x += t_dx
        else:
            t = t_max_y
            row += step_r
            t_max_y += t_dy
        if t >= max_t:
            return max_t, HIT_MAXRANGE, -1, -1
        if col < 0 or col >= w or row < 0 or row >= h:
            return t, HIT_MAPEDGE, -1, -1
        if cells[row, col] == OCCUPIED:
            return t, HIT_OBSTACLE, row, col


@njit(cache=True)
def sense_rays(truth, discovered, ox, oy, angles, max_t):
    """Mark every cell crossed by a beam before its hit as FREE and the hit
    cell itself as OCCUPIED, in place, on ``discovered``.

    Coordinates in cell units.  Same traversal as ray_traverse, duplicated
    here so the whole scan stays inside one jitted loop.
    """
    h, w = truth.shape
    for k in range(angles.shape[0]):
        dx = np.cos(angles[k])
        dy = np.sin(angles[k])
        col = int(np.floor(ox))
        row = int(np.floor(oy))
        discovered[row, col] = FREE

        step_c = 1 if dx > 0.0 else (-1 if dx < 0.0 else 0)
        step_r = 1 if dy > 0.0 else (-1 if dy < 0.0 else 0)
        inf = np.float64(1e30)
        if dx != 0.0:
            next_cx = col + 1.0 if step_c > 0 else float(col)
            t_max_x = (next_cx - ox) / dx
            t_dx = abs(1.0 / dx)
        else:
            t_max_x = inf
            t_dx = inf
        if dy != 0.0:
            next_cy = row + 1.0 if step_r > 0 else float(row)
            t_max_y = (next_cy - oy) / dy
            t_dy = abs(1.0 / dy)
        else:
            t_max_y = inf
            t_dy = inf

        while True:
            if t_max_x < t_max_y:
                t = t_max_x
                col += step_c
                t_max_x += t_dx
            else:
                t = t_max_y
                row += step_r
                t_max_y += t_dy
            if t >= max_t:
                break
            if col < 0 or col >= w or row < 0 or row >= h:
                break
            if truth[row, col] == OCCUPIED:
                discovered[row, col] = OCCUPIED
                break
            discovered[row, col] = FREE


@njit(cache=True)
def thinning_pass(mask, flags, step):
    """One Zhang-Suen subiteration on a uint8 mask; returns removal count.

    ``step`` 0 marks the (N4, E6) subpass, 1 the mirrored one.  Decisions are
    taken on a snapshot: cells to delete are collected in ``flags`` first.
    """
    h, w = mask.shape
    n_removed = 0
    for r in range(h):
        for c in range(w):
            flags[r, c] = 0
    for r in range(1, h - 1):
        for c in range(1, w - 1):
            if mask[r, c] == 0:
                continue
            p2 = mask[r - 1, c]
            p3 = mask[r - 1, c + 1]
            p4 = mask[r, c + 1]
            p5 = mask[r + 1, c + 1]
            p6 = mask[r + 1, c]
            p7 = mask[r + 1, c - 1]
            p8 = mask[r, c - 1]
            p9 = mask[r - 1, c - 1]
            b = p2 + p3 + p4 + p5 + p6 + p7 + p8 + p9
            if b < 2 or b > 6:
                continue
            a = 0
            if p2 == 0 and p3 == 1:
                a += 1
            if p3 == 0 and p4 == 1:
                a += 1
            if p4 == 0 and p5 == 1:
                a += 1
            if p5 == 0 and p6 == 1:
                a += 1
            if p6 == 0 and p7 == 1:
                a += 1
            if p7 == 0 and p8 == 1:
                a += 1
            if p8 == 0 and p9 == 1:
                a += 1
            if p9 == 0 and p2 == 1:
                a += 1
            if a != 1:
                continue
            if step == 0:
                if p2 * p4 * p6 != 0:
                    continue
                if p4 * p6 * p8 != 0:
                    continue
            else:
                if p2 * p4 * p8 != 0:
                    continue
                if p2 * p6 * p8 != 0:
                    continue
            flags[r, c] = 1
            n_removed += 1
    if n_removed > 0:
        for r in range(h):
            for c in range(w):
                if flags[r, c] == 1:
                    mask[r, c] = 0
    return n_removed


def warmup():
    """Force-compile all kernels (no-op on the fallback path)."""
    g = np.zeros((4, 4), dtype=np.uint8)
    g[0, 0] = OCCUPIED
    chamfer_cells(g, np.zeros((4, 4), dtype=np.float64))
    ray_traverse(g, 2.5, 2.5, 1.0, 0.0, 10.0)
    sense_rays(g, np.full((4, 4), UNKNOWN, dtype=np.uint8), 2.5, 2.5,
               np.array([0.0, 1.5]), 10.0)
    m = np.zeros((5, 5), dtype=np.uint8)
    m[1:4, 1:4] = 1
    thinning_pass(m, np.zeros((5, 5), dtype=np.uint8), 0)
