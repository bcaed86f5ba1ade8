#!/usr/bin/env python3
"""Regenerate the bundled fixture maps (deterministic; run from repo root).

Layout constraints the rest of the project relies on:
- corridors and doors at least 3 cells wide (the skeleton keeps one cell of
  clearance from walls, so narrower passages would break it apart),
- every free cell reachable from every start pose,
- occupied border all around.
"""

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from gvdexplore.grid import FREE, OCCUPIED, OccupancyGrid, save_map  # noqa: E402

OUT = Path(__file__).resolve().parents[1] / "src" / "gvdexplore" / "maps"


def corridor_office():
    """96x40 at 0.5 m/cell: a 48 m central corridor with six 8 m-deep
    offices on each side, 4-wide doors staggered so the nearest frontier
    keeps flipping across the corridor for a purely distance-driven
    picker.  Room depth matches the local-window reach."""
    w, h = 96, 40
    g = np.full((h, w), OCCUPIED, dtype=np.uint8)
    g[1:-1, 1:-1] = FREE
    # corridor rows 18..21; separating walls rows 17 and 22
    g[17, 1:-1] = OCCUPIED
    g[22, 1:-1] = OCCUPIED
    # room divider columns (rooms are 16 cells deep on both sides)
    for col in (16, 32, 48, 64, 80):
        g[1:17, col] = OCCUPIED
        g[23:-1, col] = OCCUPIED
    # doors: 4-wide gaps; top rooms open near their left edge, bottom rooms
    # near their right edge
    up_doors = [(2, 6), (18, 22), (34, 38), (50, 54), (66, 70), (82, 86)]
    down_doors = [(10, 14), (26, 30), (42, 46), (58, 62), (74, 78), (90, 94)]
    for a, b in up_doors:
        g[22, a:b] = FREE
    for a, b in down_doors:
        g[17, a:b] = FREE
    poses = [
        (1.75, 9.75, 0.0),                     # corridor west end, facing east
        (46.25, 9.75, 3.141592653589793),      # corridor east end, facing west
        (2.25, 2.25, 1.5707963267948966),      # bottom-left room
        (45.75, 17.75, -1.5707963267948966),   # top-right room
    ]
    return g, poses, 0.5


def maze64(seed=7):
    """64x64 corridor maze: recursive backtracker on a 7x7 block grid,
    passages 5 cells wide, walls 3 thick."""
    n = 7
    passage, wall = 5, 3
    pitch = passage + wall
    size = n * pitch + wall  # 59
    rng = np.random.default_rng(seed)

    visited = np.zeros((n, n), dtype=bool)
    carved_h = np.zeros((n, n), dtype=bool)  # opening to the block east
    carved_v = np.zeros((n, n), dtype=bool)  # opening to the block north
    stack = [(0, 0)]
    visited[0, 0] = True
    while stack:
        r, c = stack[-1]
        options = []
        for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            nr, nc = r + dr, c + dc
            if 0 <= nr < n and 0 <= nc < n and not visited[nr, nc]:
                options.append((nr, nc))
        if not options:
            stack.pop()
            continue
        nr, nc = options[rng.integers(len(options))]
        visited[nr, nc] = True
        if nr == r:
            carved_h[r, min(c, nc)] = True
        else:
            carved_v[min(r, nr), c] = True
        stack.append((nr, nc))

    m = np.full((size, size), OCCUPIED, dtype=np.uint8)
    for r in range(n):
        for c in range(n):
            r0 = wall + r * pitch
            c0 = wall + c * pitch
            m[r0 : r0 + passage, c0 : c0 + passage] = FREE
            if carved_h[r, c]:
                m[r0 : r0 + passage, c0 + passage : c0 + passage + wall] = FREE
            if carved_v[r, c]:
                m[r0 + passage : r0 + passage + wall, c0 : c0 + passage] = FREE

    g = np.full((64, 64), OCCUPIED, dtype=np.uint8)
    g[2 : 2 + size, 2 : 2 + size] = m
    res = 0.5
    block_center = lambda i: (2 + wall + i * pitch + passage / 2.0) * res
    poses = [
        (block_center(0), block_center(0), 0.0),
        (block_center(6), block_center(0), 1.5707963267948966),
        (block_center(0), block_center(6), -1.5707963267948966),
        (block_center(6), block_center(6), 3.141592653589793),
    ]
    return g, poses, res


def open_plus():
    """64x64: open plus-shaped hall with four corner rooms, 4-wide doors."""
    g = np.full((64, 64), OCCUPIED, dtype=np.uint8)
    # plus arms, 10 wide
    g[27:37, 2:62] = FREE
    g[2:62, 27:37] = FREE
    rooms = {
        "bl": (slice(3, 22), slice(3, 22)),
        "br": (slice(3, 22), slice(42, 61)),
        "tl": (slice(42, 61), slice(3, 22)),
        "tr": (slice(42, 61), slice(42, 61)),
    }
    for sl in rooms.values():
        g[sl] = FREE
    # doors: 6-wide stubs connecting each room to the vertical arm
    g[9:15, 22:27] = FREE    # bottom-left -> vertical arm
    g[9:15, 37:42] = FREE    # bottom-right -> vertical arm
    g[49:55, 22:27] = FREE   # top-left -> vertical arm
    g[49:55, 37:42] = FREE   # top-right -> vertical arm
    poses = [
        (8.125, 8.125, 0.0),                   # center crossing
        (3.125, 8.125, 0.0),                   # west arm, facing east
        (3.125, 3.125, 1.5707963267948966),    # bottom-left room
        (13.125, 13.125, 3.141592653589793),   # top-right room
    ]
    return g, poses, 0.25


def check_reachable(grid, poses):
    from gvdexplore.sim import Pose, reachable_free_mask

    total_free = int((grid.cells == FREE).sum())
    for x, y, theta in poses:
        assert grid.state_at(x, y) == FREE, f"pose ({x}, {y}) not free"
        reach = int(reachable_free_mask(grid, Pose(x, y, theta)).sum())
        assert reach == total_free, (
            f"pose ({x}, {y}): only {reach}/{total_free} free cells reachable"
        )


def write(name, cells, poses, res):
    OUT.mkdir(parents=True, exist_ok=True)
    grid = OccupancyGrid(cells, res, (0.0, 0.0))
    check_reachable(grid, poses)
    path = OUT / f"{name}.txt"
    save_map(grid, path)
    meta = path.with_suffix(".meta")
    pose_str = ";".join(f"{x!r},{y!r},{t!r}" for x, y, t in poses)
    meta.write_text(meta.read_text() + f"start_poses={pose_str}\n")
    print(f"{name}: {cells.shape[1]}x{cells.shape[0]}, "
          f"free={int((cells == FREE).sum())}, occ={int((cells == OCCUPIED).sum())}")


def main():
    for name, (cells, poses, res) in {
        "corridor_office": corridor_office(),
        "maze64": maze64(),
        "open_plus": open_plus(),
    }.items():
        write(name, cells, poses, res)


if __name__ == "__main__":
    main()
