"""Occupancy grid, map file I/O, distance transform and raycasting.

Cell states are tri-state (free / occupied / unknown).  World coordinates
are meters; a cell's center is ``origin + (index + 0.5) * resolution`` and
all geometry (raycasts, planners) operates on cell centers.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels
from .errors import (
    InvalidDimensionsError,
    MapFormatError,
    OutOfBoundsError,
    UndefinedFieldError,
)

FREE = _kernels.FREE
OCCUPIED = _kernels.OCCUPIED
UNKNOWN = _kernels.UNKNOWN

_ASCII_TO_STATE = {".": FREE, "#": OCCUPIED, "?": UNKNOWN}
_STATE_TO_ASCII = {FREE: ".", OCCUPIED: "#", UNKNOWN: "?"}


class RayTerminal(enum.Enum):
    OBSTACLE = "obstacle"
    MAX_RANGE = "max_range"
    MAP_EDGE = "map_edge"


_TERMINAL_BY_CODE = {
    _kernels.HIT_OBSTACLE: RayTerminal.OBSTACLE,
    _kernels.HIT_MAXRANGE: RayTerminal.MAX_RANGE,
    _kernels.HIT_MAPEDGE: RayTerminal.MAP_EDGE,
}


@dataclass(frozen=True)
class CellIndex:
    col: int
    row: int


@dataclass(frozen=True)
class RayHit:
    range_m: float
    terminal: RayTerminal
    cell: CellIndex | None = None


@dataclass
class OccupancyGrid:
    """Tri-state raster with metric resolution and origin.

    ``cells`` is a (height, width) uint8 array; row 0 is the southernmost row
    (y grows with the row index).
    """

    cells: np.ndarray
    resolution: float = 1.0
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        self.cells = np.ascontiguousarray(self.cells, dtype=np.uint8)
        if self.cells.ndim != 2 or self.cells.size == 0:
            raise InvalidDimensionsError(
                f"grid must be a non-empty 2D raster, got shape {self.cells.shape}"
            )
        if self.resolution <= 0:
            raise InvalidDimensionsError(f"resolution must be > 0, got {self.resolution}")
        bad = ~np.isin(self.cells, (FREE, OCCUPIED, UNKNOWN))
        if bad.any():
            raise MapFormatError(f"grid contains {int(bad.sum())} invalid cell values")

    @property
    def height(self) -> int:
        return self.cells.shape[0]

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    def copy(self) -> "OccupancyGrid":
        return OccupancyGrid(self.cells.copy(), self.resolution, self.origin)

    @classmethod
    def full_unknown(cls, like: "OccupancyGrid") -> "OccupancyGrid":
        return cls(np.full_like(like.cells, UNKNOWN), like.resolution, like.origin)

    # --- coordinate conversions -------------------------------------------------
    def world_to_cell(self, x: float, y: float) -> CellIndex:
        col = int(math.floor((x - self.origin[0]) / self.resolution))
        row = int(math.floor((y - self.origin[1]) / self.resolution))
        return CellIndex(col, row)

    def cell_center(self, col: int, row: int) -> tuple[float, float]:
        return (
            self.origin[0] + (col + 0.5) * self.resolution,
            self.origin[1] + (row + 0.5) * self.resolution,
        )

    def in_bounds(self, col: int, row: int) -> bool:
        return 0 <= col < self.width and 0 <= row < self.height

    def contains_point(self, x: float, y: float) -> bool:
        c = self.world_to_cell(x, y)
        return self.in_bounds(c.col, c.row)

    def state_at(self, x: float, y: float) -> int:
        c = self.world_to_cell(x, y)
        if not self.in_bounds(c.col, c.row):
            raise OutOfBoundsError(f"point ({x}, {y}) outside grid")
        return int(self.cells[c.row, c.col])

    def count(self, state: int) -> int:
        return int((self.cells == state).sum())


@dataclass
class DistanceField:
    """Per-cell distance in meters to the nearest obstacle cell."""

    meters: np.ndarray
    resolution: float = 1.0
    origin: tuple[float, float] = (0.0, 0.0)

    @property
    def cells(self) -> np.ndarray:
        return self.meters / self.resolution


def _read_meta(path: Path) -> dict:
    meta = {}
    if not path.exists():
        return meta
    for i, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise MapFormatError(f"metadata line has no '=': {line!r}", line=i)
        key, value = line.split("=", 1)
        meta[key.strip()] = value.strip()
    return meta


def _meta_path(path: Path) -> Path:
    return path.with_suffix(".meta")


def parse_start_poses(meta: dict) -> list[tuple[float, float, float]]:
    """Decode the optional start_poses metadata entry: 'x,y,theta;x,y,theta;...'."""
    raw = meta.get("start_poses", "")
    poses = []
    for chunk in raw.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        x, y, theta = (float(v) for v in chunk.split(","))
        poses.append((x, y, theta))
    return poses


def load_map(path, fmt: str | None = None) -> OccupancyGrid:
    """Load an ASCII ('.'/'#'/'?') or binary PGM (P5) map.

    Resolution and origin come from a ``<name>.meta`` sidecar with key=value
    lines (resolution, origin_x, origin_y); defaults are 1.0 and (0, 0).
    """
    path = Path(path)
    if fmt is None:
        fmt = "pgm" if path.suffix.lower() == ".pgm" else "ascii"
    if fmt not in ("ascii", "pgm"):
        raise ValueError(f"unknown map format {fmt!r}")

    meta = _read_meta(_meta_path(path))
    resolution = float(meta.get("resolution", 1.0))
    origin = (float(meta.get("origin_x", 0.0)), float(meta.get("origin_y", 0.0)))

    if fmt == "ascii":
        rows = []
        width = None
        for i, raw in enumerate(path.read_text().splitlines(), start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            states = []
            for ch in line:
                if ch not in _ASCII_TO_STATE:
                    raise MapFormatError(f"invalid map character {ch!r}", line=i)
                states.append(_ASCII_TO_STATE[ch])
            if width is None:
                width = len(states)
            elif len(states) != width:
                raise MapFormatError(
                    f"row width {len(states)} != {width} of first row", line=i
                )
            rows.append(states)
        if not rows or width == 0:
            raise InvalidDimensionsError(f"map {path} has zero area")
        cells = np.array(rows, dtype=np.uint8)
    else:
        cells = _load_pgm(path)

    return OccupancyGrid(cells, resolution, origin)


def _load_pgm(path: Path) -> np.ndarray:
    data = path.read_bytes()
    pos = 0

    def next_token():
        nonlocal pos
        while pos < len(data):
            if data[pos : pos + 1].isspace():
                pos += 1
            elif data[pos : pos + 1] == b"#":
                while pos < len(data) and data[pos : pos + 1] != b"\n":
                    pos += 1
            else:
                break
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise MapFormatError(f"truncated PGM header at byte {start}")
        return data[start:pos]

    magic = next_token()
    if magic != b"P5":
        raise MapFormatError(f"not a binary PGM (magic {magic!r} at byte 0)")
    try:
        width = int(next_token())
        height = int(next_token())
        maxval = int(next_token())
    except ValueError as exc:
        raise MapFormatError(f"bad PGM header near byte {pos}: {exc}") from exc
    if width == 0 or height == 0:
        raise InvalidDimensionsError(f"PGM {path} has zero area")
    if maxval > 255:
        raise MapFormatError("16-bit PGM not supported")
    pos += 1  # single whitespace byte after maxval
    raster = np.frombuffer(data, dtype=np.uint8, count=width * height, offset=pos)
    if raster.size != width * height:
        raise MapFormatError(f"PGM raster truncated at byte {pos + raster.size}")
    gray = raster.reshape(height, width)
    cells = np.full(gray.shape, UNKNOWN, dtype=np.uint8)
    cells[gray >= 250] = FREE
    cells[gray <= 50] = OCCUPIED
    # PGM row 0 is the top of the image; internal row 0 is the lowest y
    return cells[::-1]


def save_map(grid: OccupancyGrid, path) -> None:
    """Write the ASCII format plus its metadata sidecar."""
    path = Path(path)
    lines = [
        "".join(_STATE_TO_ASCII[int(v)] for v in row) for row in grid.cells
    ]
    path.write_text("\n".join(lines) + "\n")
    meta = (
        f"resolution={grid.resolution!r}\n"
        f"origin_x={grid.origin[0]!r}\n"
        f"origin_y={grid.origin[1]!r}\n"
    )
    _meta_path(path).write_text(meta)


def save_pgm(gray: np.ndarray, path) -> None:
    """Write a uint8 image as binary PGM (P5); row 0 is rendered at the top."""
    gray = np.asarray(gray, dtype=np.uint8)
    h, w = gray.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode())
        fh.write(gray[::-1].tobytes())


def raycast(
    grid: OccupancyGrid,
    from_xy: tuple[float, float],
    heading: float,
    max_range: float,
) -> RayHit:
    """Cast a single ray; returns the distance to the first occupied-cell
    boundary, or the max-range / map-edge distance."""
    if max_range <= 0:
        raise ValueError(f"max_range must be > 0, got {max_range}")
    x, y = from_xy
    if not grid.contains_point(x, y):
        raise OutOfBoundsError(f"ray origin ({x}, {y}) outside grid")
    res = grid.resolution
    ox = (x - grid.origin[0]) / res
    oy = (y - grid.origin[1]) / res
    t, code, hit_r, hit_c = _kernels.ray_traverse(
        grid.cells, ox, oy, math.cos(heading), math.sin(heading), max_range / res,
    )
    terminal = _TERMINAL_BY_CODE[int(code)]
    cell = CellIndex(int(hit_c), int(hit_r)) if terminal is RayTerminal.OBSTACLE else None
    return RayHit(range_m=float(t) * res, terminal=terminal, cell=cell)


def distance_transform(grid: OccupancyGrid, unknown_as_obstacle: bool = True) -> DistanceField:
    """Chamfer 3-4 distance (two-pass, ≤8% relative error) to the nearest
    obstacle cell.  Unknown cells count as obstacles by default so the GVD
    stays inside explored free space."""
    obstacle = grid.cells == OCCUPIED
    if unknown_as_obstacle:
        obstacle |= grid.cells == UNKNOWN
    if not obstacle.any():
        raise UndefinedFieldError("grid has no obstacle cells")
    out = np.empty(grid.cells.shape, dtype=np.float64)
    _kernels.chamfer_cells(np.ascontiguousarray(obstacle, dtype=np.uint8), out)
    return DistanceField(out * grid.resolution, grid.resolution, grid.origin)
