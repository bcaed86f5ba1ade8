"""Comparison policies: global greedy frontier picking and a simplified
random-tree explorer that dispatches unknown-boundary points."""

from __future__ import annotations

import math

import numpy as np

from .config import ExplorationConfig
from .frontiers import detect_frontiers, greedy_select
from .grid import FREE, OCCUPIED, UNKNOWN
from .handler import (
    MODE_DONE,
    MODE_LOCAL,
    SOURCE_LOCAL,
    Blacklist,
    ExplorationGoal,
    TickResult,
    _frontier_key,
    frontier_goal,
)
from .nav import plan_path
from .sim import Pose, SimState

STALL_LIMIT = 35


class GreedyPolicy:
    """Every cycle: re-pick the global utility argmin among all frontiers."""

    uses_rng = False

    def __init__(self, cfg: ExplorationConfig, start: Pose):
        self.cfg = cfg
        self.blacklist = Blacklist(cfg.blacklist_ttl)
        self.done = False
        self.stall_cycles = 0
        self.goal: ExplorationGoal | None = None
        self.last_xy = (start.x, start.y)

    def _ban(self, f, now):
        self.blacklist.add(
            _frontier_key(f), now, permanent=f.size < self.cfg.min_frontier_size
        )

    def tick(self, sim: SimState) -> TickResult:
        now = sim.sim_time
        if self.done:
            return TickResult(None, done=True, mode=MODE_DONE)
        self.blacklist.prune(now)

        # housekeeping only: the pick below is redone from scratch every
        # cycle over the whole frontier list, which is exactly what makes
        # this baseline wander back and forth in cluttered maps
        if self.goal is not None:
            d_now = math.hypot(sim.robot.x - self.goal.target.x,
                               sim.robot.y - self.goal.target.y)
            moved = math.hypot(sim.robot.x - self.last_xy[0],
                               sim.robot.y - self.last_xy[1])
            if d_now <= self.cfg.goal_tol:
                self.blacklist.note_reached(self.goal.key)
                self.goal = None
            elif moved < 0.05:
                # stuck against something; retire the target for a while
                self.blacklist.add(self.goal.key, now)
                self.goal = None
        self.last_xy = (sim.robot.x, sim.robot.y)

        raw = detect_frontiers(sim.discovered, self.cfg.global_min_frontier_size)
        if not raw:
            self.done = True
            self.goal = None
            return TickResult(None, done=True, mode=MODE_DONE)
        pool = [f for f in raw if _frontier_key(f) not in self.blacklist]
        while pool:
            f = greedy_select(pool, sim.robot, self.cfg.w_d, self.cfg.w_s)
            goal = frontier_goal(sim, f, self.cfg)
            if goal is not None:
                self.stall_cycles = 0
                dispatched = self.goal is None or goal.key != self.goal.key
                self.goal = goal
                return TickResult(goal, dispatched=dispatched, mode=MODE_LOCAL)
            self._ban(f, now)
            pool = [p for p in pool if p.id != f.id]
        self.goal = None
        self.stall_cycles += 1
        if self.stall_cycles >= STALL_LIMIT:
            self.done = True
            return TickResult(None, done=True, mode=MODE_DONE)
        return TickResult(None, mode=MODE_LOCAL)


class RrtPolicy:
    """Grow a random tree through discovered free space each cycle; segments
    that poke into unknown space yield candidate goals, ranked by the same
    distance-minus-size utility shape as the greedy picker."""

    uses_rng = True

    def __init__(self, cfg: ExplorationConfig, start: Pose, seed: int = 0):
        self.cfg = cfg
        self.rng = np.random.default_rng(seed)
        self.done = False
        self.empty_cycles = 0

    def _segment_probe(self, sim: SimState, x0, y0, x1, y1):
        """March the segment; returns ('free', None), ('blocked', None) or
        ('unknown', (x, y)) with the first point inside unknown space."""
        grid = sim.discovered
        step = grid.resolution * 0.25
        length = math.hypot(x1 - x0, y1 - y0)
        n = max(1, int(math.ceil(length / step)))
        for i in range(1, n + 1):
            t = i / n
            x = x0 + t * (x1 - x0)
            y = y0 + t * (y1 - y0)
            if not grid.contains_point(x, y):
                return "blocked", None
            state = grid.state_at(x, y)
            if state == OCCUPIED:
                return "blocked", None
            if state == UNKNOWN:
                return "unknown", (x, y)
        return "free", None

    def _unknown_nearby(self, sim: SimState, x: float, y: float, radius: float = 0.5) -> int:
        grid = sim.discovered
        res = grid.resolution
        rc = grid.world_to_cell(x, y)
        span = int(math.ceil(radius / res))
        count = 0
        for r in range(rc.row - span, rc.row + span + 1):
            for c in range(rc.col - span, rc.col + span + 1):
                if grid.in_bounds(c, r) and grid.cells[r, c] == UNKNOWN:
                    count += 1
        return count

    def tick(self, sim: SimState) -> TickResult:
        now = sim.sim_time
        cfg = self.cfg
        if self.done:
            return TickResult(None, done=True, mode=MODE_DONE)
        grid = sim.discovered
        x_lo, y_lo = grid.origin
        x_hi = x_lo + grid.width * grid.resolution
        y_hi = y_lo + grid.height * grid.resolution

        tree = np.empty((cfg.rrt_iters + 1, 2), dtype=np.float64)
        tree[0] = (sim.robot.x, sim.robot.y)
        n_tree = 1
        candidates: list[tuple[float, float]] = []
        for _ in range(cfg.rrt_iters):
            sx = self.rng.uniform(x_lo, x_hi)
            sy = self.rng.uniform(y_lo, y_hi)
            d2 = (tree[:n_tree, 0] - sx) ** 2 + (tree[:n_tree, 1] - sy) ** 2
            near = tree[int(np.argmin(d2))]
            d = math.hypot(sx - near[0], sy - near[1])
            if d < 1e-9:
                continue
            nx = near[0] + cfg.rrt_step * (sx - near[0]) / d
            ny = near[1] + cfg.rrt_step * (sy - near[1]) / d
            kind, boundary = self._segment_probe(sim, near[0], near[1], nx, ny)
            if kind == "free":
                tree[n_tree] = (nx, ny)
                n_tree += 1
            elif kind == "unknown":
                candidates.append(boundary)

        ranked = sorted(
            candidates,
            key=lambda p: (
                cfg.w_d * math.hypot(p[0] - sim.robot.x, p[1] - sim.robot.y)
                - cfg.w_s * self._unknown_nearby(sim, p[0], p[1]),
                p,
            ),
        )
        for px, py in ranked[:5]:  # cap per-cycle planning attempts
            path = plan_path(
                grid, (sim.robot.x, sim.robot.y), (px, py),
                cfg.inflation, cfg.snap_radius,
            )
            if path is not None:
                self.empty_cycles = 0
                end = path[-1]
                ref = path[-2] if len(path) >= 2 else (sim.robot.x, sim.robot.y)
                goal = ExplorationGoal(
                    target=Pose(end[0], end[1], math.atan2(end[1] - ref[1], end[0] - ref[0])),
                    source=SOURCE_LOCAL,
                    issued_at=now,
                    path=path,
                    key=("rrt", round(end[0], 3), round(end[1], 3)),
                )
                return TickResult(goal, dispatched=True, mode=MODE_LOCAL)

        self.empty_cycles += 1
        if self.empty_cycles >= cfg.rrt_done_cycles:
            if not detect_frontiers(sim.discovered, self.cfg.global_min_frontier_size):
                self.done = True
                return TickResult(None, done=True, mode=MODE_DONE)
        return TickResult(None, mode=MODE_LOCAL)
