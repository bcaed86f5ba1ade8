"""Time-stepped point-robot simulation with a 2D range sensor.

Localization is perfect: the ground-truth pose drives both motion and
sensing, and the discovered map is updated straight from the truth map.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from .errors import InvalidStateError, MapFormatError
from .grid import FREE, OCCUPIED, UNKNOWN, OccupancyGrid


def wrap_angle(a: float) -> float:
    """Wrap to (-pi, pi]."""
    a = math.fmod(a, 2.0 * math.pi)
    if a <= -math.pi:
        a += 2.0 * math.pi
    elif a > math.pi:
        a -= 2.0 * math.pi
    return a


@dataclass
class Pose:
    x: float
    y: float
    theta: float = 0.0

    def __post_init__(self):
        self.theta = wrap_angle(self.theta)


@dataclass
class SensorConfig:
    beam_count: int = 360
    fov: float = math.radians(270.0)
    max_range: float = 10.0
    yaw_offset: float = 0.0

    def __post_init__(self):
        if self.beam_count <= 0:
            raise ValueError("beam_count must be > 0")
        if not (0 <= self.fov <= 2.0 * math.pi):
            raise ValueError("fov must lie in [0, 2*pi]")
        if self.max_range <= 0:
            raise ValueError("max_range must be > 0")

    def beam_angles(self, heading: float) -> np.ndarray:
        center = heading + self.yaw_offset
        if self.beam_count == 1 or self.fov == 0.0:
            return np.array([center], dtype=np.float64)
        return center + np.linspace(-self.fov / 2.0, self.fov / 2.0, self.beam_count)


@dataclass
class CoverageRecord:
    sim_time: float
    discovered_free_fraction: float
    distance_travelled: float
    active_stage: str  # Local | Global | Idle


@dataclass
class SimState:
    truth: OccupancyGrid
    discovered: OccupancyGrid
    robot: Pose
    sim_time: float = 0.0
    distance_travelled: float = 0.0
    history_window: float = 5.0
    heading_history: deque = field(default_factory=deque)
    reachable: np.ndarray | None = None
    last_warning: str | None = None

    @classmethod
    def create(cls, truth: OccupancyGrid, start: Pose, history_window: float = 5.0) -> "SimState":
        if truth.state_at(start.x, start.y) != FREE:
            raise InvalidStateError(
                f"start pose ({start.x}, {start.y}) is not in free truth space"
            )
        state = cls(
            truth=truth,
            discovered=OccupancyGrid.full_unknown(truth),
            robot=Pose(start.x, start.y, start.theta),
            history_window=history_window,
        )
        state.reachable = reachable_free_mask(truth, state.robot)
        state._record_heading()
        return state

    def _record_heading(self):
        self.heading_history.append((self.sim_time, self.robot.theta))
        horizon = self.sim_time - self.history_window
        while len(self.heading_history) > 1 and self.heading_history[1][0] <= horizon:
            self.heading_history.popleft()


def sense(state: SimState, cfg: SensorConfig) -> None:
    """Run one full scan from the current pose, updating the discovered map."""
    truth = state.truth
    if truth.state_at(state.robot.x, state.robot.y) == OCCUPIED:
        raise InvalidStateError("robot is inside an occupied truth cell")
    res = truth.resolution
    ox = (state.robot.x - truth.origin[0]) / res
    oy = (state.robot.y - truth.origin[1]) / res
    angles = cfg.beam_angles(state.robot.theta)
    _kernels.sense_rays(
        truth.cells, state.discovered.cells, ox, oy, angles, cfg.max_range / res
    )


def step_along(
    state: SimState,
    path: list[tuple[float, float]],
    v_max: float,
    dt: float,
    sensor: SensorConfig | None = None,
) -> float:
    """Advance the robot v_max*dt of arc length along the polyline.

    The robot is projected onto the path first, so a path may be followed
    across many steps.  Heading snaps to the local tangent.  Returns the
    distance actually advanced (0.0 for an empty path, with a warning flag
    left on the state).  Sensing runs after motion when a sensor is given.
    """
    if v_max <= 0 or dt <= 0:
        raise ValueError("v_max and dt must be > 0")
    state.last_warning = None
    if not path:
        state.sim_time += dt
        state.last_warning = "empty-path"
        state._record_heading()
        return 0.0

    pts = [(float(p[0]), float(p[1])) for p in path]
    if len(pts) == 1:
        pts = [pts[0], pts[0]]

    # arc-length position of the closest point on the polyline to the robot
    rx, ry = state.robot.x, state.robot.y
    best_d2 = math.inf
    s_here = 0.0
    s_acc = 0.0
    for (x0, y0), (x1, y1) in zip(pts[:-1], pts[1:]):
        seg_dx, seg_dy = x1 - x0, y1 - y0
        seg_len = math.hypot(seg_dx, seg_dy)
        if seg_len > 0:
            t = ((rx - x0) * seg_dx + (ry - y0) * seg_dy) / (seg_len * seg_len)
            t = min(1.0, max(0.0, t))
        else:
            t = 0.0
        px, py = x0 + t * seg_dx, y0 + t * seg_dy
        d2 = (rx - px) ** 2 + (ry - py) ** 2
        if d2 < best_d2 - 1e-12:
            best_d2 = d2
            s_here = s_acc + t * seg_len
        s_acc += seg_len
    total_len = s_acc

    s_target = min(total_len, s_here + v_max * dt)

    # locate s_target on the polyline and take the tangent of that segment
    s_acc = 0.0
    nx, ny, tangent = pts[-1][0], pts[-1][1], state.robot.theta
    for (x0, y0), (x1, y1) in zip(pts[:-1], pts[1:]):
        seg_len = math.hypot(x1 - x0, y1 - y0)
        if seg_len <= 0:
            continue
        if s_target <= s_acc + seg_len or (x1, y1) == pts[-1]:
            t = (s_target - s_acc) / seg_len
            t = min(1.0, max(0.0, t))
            nx, ny = x0 + t * (x1 - x0), y0 + t * (y1 - y0)
            tangent = math.atan2(y1 - y0, x1 - x0)
            if s_target <= s_acc + seg_len:
                break
        s_acc += seg_len

    # the truth map is the physical world: refuse to move into a wall when
    # a path ends in an unknown cell that turns out occupied
    advance = s_target - s_here
    if state.truth.contains_point(nx, ny) and state.truth.state_at(nx, ny) == OCCUPIED:
        state.last_warning = "collision"
        nx, ny = state.robot.x, state.robot.y
        advance = 0.0

    state.robot = Pose(nx, ny, tangent)
    state.sim_time += dt
    state.distance_travelled += advance
    state._record_heading()
    if sensor is not None:
        sense(state, sensor)
    return advance


def heading_change(state: SimState, window: float) -> float:
    """Net unwrapped heading change over the trailing window, in radians.

    Returns 0 when the recorded history does not yet span the window.
    """
    if window <= 0:
        raise ValueError("window must be > 0")
    cutoff = state.sim_time - window
    hist = state.heading_history
    if not hist or hist[0][0] > cutoff + 1e-9:
        return 0.0
    base_idx = 0
    for i, (t, _) in enumerate(hist):
        if t <= cutoff + 1e-9:
            base_idx = i
        else:
            break
    total = 0.0
    prev = hist[base_idx][1]
    for i in range(base_idx + 1, len(hist)):
        cur = hist[i][1]
        total += wrap_angle(cur - prev)
        prev = cur
    return abs(total)


def reachable_free_mask(truth: OccupancyGrid, start: Pose) -> np.ndarray:
    """4-connected flood fill of truth free cells from the start pose."""
    if truth.state_at(start.x, start.y) != FREE:
        raise InvalidStateError("start pose is not in free truth space")
    free = truth.cells == FREE
    seen = np.zeros_like(free, dtype=bool)
    c0 = truth.world_to_cell(start.x, start.y)
    stack = [(c0.row, c0.col)]
    seen[c0.row, c0.col] = True
    h, w = free.shape
    while stack:
        r, c = stack.pop()
        for nr, nc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
            if 0 <= nr < h and 0 <= nc < w and free[nr, nc] and not seen[nr, nc]:
                seen[nr, nc] = True
                stack.append((nr, nc))
    return seen


def coverage(state: SimState) -> float:
    """Fraction of reachable truth free cells currently discovered as free.

    The reachable set is fixed at run start (flood fill from the start pose).
    """
    if state.reachable is None:
        raise InvalidStateError("state has no reachable mask; use SimState.create")
    denom = int(state.reachable.sum())
    if denom == 0:
        return 0.0
    num = int(((state.discovered.cells == FREE) & state.reachable).sum())
    return num / denom


def save_snapshot(state: SimState, path) -> None:
    """Serialize the discovered map (ASCII rows) plus pose/progress lines."""
    from .grid import _STATE_TO_ASCII  # local import to keep the map dialect in one place

    lines = ["".join(_STATE_TO_ASCII[int(v)] for v in row) for row in state.discovered.cells]
    tail = [
        "",
        f"pose={state.robot.x!r},{state.robot.y!r},{state.robot.theta!r}",
        f"sim_time={state.sim_time!r}",
        f"distance={state.distance_travelled!r}",
        f"resolution={state.discovered.resolution!r}",
        f"origin={state.discovered.origin[0]!r},{state.discovered.origin[1]!r}",
    ]
    Path(path).write_text("\n".join(lines + tail) + "\n")


def load_snapshot(path) -> tuple[OccupancyGrid, Pose, float, float]:
    """Inverse of save_snapshot: (discovered grid, pose, sim_time, distance)."""
    from .grid import _ASCII_TO_STATE

    rows = []
    meta = {}
    in_tail = False
    for i, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.rstrip()
        if not line:
            in_tail = True
            continue
        if in_tail:
            if "=" not in line:
                raise MapFormatError("snapshot tail line has no '='", line=i)
            key, value = line.split("=", 1)
            meta[key] = value
        else:
            try:
                rows.append([_ASCII_TO_STATE[ch] for ch in line])
            except KeyError as exc:
                raise MapFormatError(f"invalid snapshot character {exc}", line=i) from exc
    res = float(meta.get("resolution", 1.0))
    ox, oy = (float(v) for v in meta.get("origin", "0,0").split(","))
    grid = OccupancyGrid(np.array(rows, dtype=np.uint8), res, (ox, oy))
    px, py, ptheta = (float(v) for v in meta["pose"].split(","))
    return grid, Pose(px, py, ptheta), float(meta["sim_time"]), float(meta["distance"])
