"""Single-run driver: steps the simulation under a policy, records coverage
and a per-cycle trace, and derives run metrics (milestones, reversals)."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .baselines import GreedyPolicy, RrtPolicy
from .config import ExplorationConfig
from .gvd import extract_gvd, neighbor_degree
from .handler import MODE_DONE, MODE_GLOBAL_PENDING, TaskHandler, goal_reached
from .grid import OccupancyGrid
from .sim import (
    CoverageRecord,
    Pose,
    SensorConfig,
    SimState,
    coverage,
    sense,
    step_along,
)

POLICIES = ("hierarchical", "greedy", "rrt")


@dataclass
class TraceRow:
    sim_time: float
    x: float
    y: float
    theta: float
    mode: str
    filter_fired: bool
    dispatched: bool
    goal_source: str
    goal_x: float
    goal_y: float
    coverage: float


@dataclass
class RunResult:
    records: list[CoverageRecord]
    trace: list[TraceRow]
    state: SimState
    done: bool
    wall_time: float
    failed: bool = False

    def time_to(self, fraction: float) -> float | None:
        for rec in self.records:
            if rec.discovered_free_fraction >= fraction:
                return rec.sim_time
        return None

    @property
    def final_coverage(self) -> float:
        return self.records[-1].discovered_free_fraction if self.records else 0.0

    @property
    def distance(self) -> float:
        return self.state.distance_travelled


def make_policy(name: str, cfg: ExplorationConfig, start: Pose, seed: int = 0):
    if name == "hierarchical":
        return TaskHandler(cfg, start)
    if name == "greedy":
        return GreedyPolicy(cfg, start)
    if name == "rrt":
        return RrtPolicy(cfg, start, seed)
    raise ValueError(f"unknown policy {name!r} (expected one of {POLICIES})")


def run_exploration(
    truth: OccupancyGrid,
    policy_name: str,
    start: Pose,
    cfg: ExplorationConfig | None = None,
    seed: int = 0,
    on_cycle=None,
) -> RunResult:
    """Run one exploration to completion (or to the sim/wall limits)."""
    cfg = cfg or ExplorationConfig()
    sensor = SensorConfig(cfg.beam_count, cfg.fov, cfg.max_range, cfg.sensor_yaw)
    state = SimState.create(truth, start, cfg.history_window)
    sense(state, sensor)
    policy = make_policy(policy_name, cfg, start, seed)

    records: list[CoverageRecord] = []
    trace: list[TraceRow] = []
    steps_per_cycle = max(1, round(cfg.planning_period / cfg.dt))
    wall_start = time.perf_counter()
    done = False
    failed = False

    while True:
        result = policy.tick(state)
        cov = coverage(state)
        if result.done:
            stage = "Idle"
        elif result.mode == MODE_GLOBAL_PENDING:
            stage = "Global"
        else:
            stage = "Local"
        records.append(
            CoverageRecord(state.sim_time, cov, state.distance_travelled, stage)
        )
        goal = result.goal
        trace.append(
            TraceRow(
                sim_time=state.sim_time,
                x=state.robot.x,
                y=state.robot.y,
                theta=state.robot.theta,
                mode=result.mode,
                filter_fired=result.filter_fired,
                dispatched=result.dispatched,
                goal_source=goal.source if goal else "",
                goal_x=goal.target.x if goal else math.nan,
                goal_y=goal.target.y if goal else math.nan,
                coverage=cov,
            )
        )
        if on_cycle is not None:
            on_cycle(state, result)
        if result.done:
            done = True
            break
        if state.sim_time >= cfg.max_sim_time:
            break
        if time.perf_counter() - wall_start > cfg.wall_budget:
            failed = True
            break
        path = goal.path if goal is not None else []
        for _ in range(steps_per_cycle):
            step_along(state, path, cfg.v_max, cfg.dt, sensor)
            if goal is not None and goal_reached(state.robot, goal.target, cfg.goal_tol):
                break

    return RunResult(
        records=records,
        trace=trace,
        state=state,
        done=done,
        wall_time=time.perf_counter() - wall_start,
        failed=failed,
    )


def junction_points(truth: OccupancyGrid) -> list[tuple[float, float]]:
    """World positions of skeleton junction cells of the fully known map."""
    matrix = extract_gvd(truth)
    deg = neighbor_degree(matrix.mask)
    out = []
    rows, cols = np.nonzero(matrix.mask & (deg >= 3))
    for r, c in zip(rows.tolist(), cols.tolist()):
        out.append(matrix.cell_center(r, c))
    return out


def count_reversals(
    result: RunResult,
    junctions: list[tuple[float, float]],
    angle_deg: float = 150.0,
    min_move: float = 0.1,
    junction_radius: float = 0.75,
) -> int:
    """Direction reversals sharper than ``angle_deg`` away from junctions.

    Consecutive per-cycle displacement vectors longer than ``min_move`` are
    compared; a flip sharper than the threshold counts unless it happens
    within ``junction_radius`` of a skeleton junction (where turning is
    structural, not back-and-forth).
    """
    pts = [(row.x, row.y) for row in result.trace]
    moves = []
    for (x0, y0), (x1, y1) in zip(pts[:-1], pts[1:]):
        dx, dy = x1 - x0, y1 - y0
        if math.hypot(dx, dy) >= min_move:
            moves.append((math.atan2(dy, dx), (x1, y1)))
    threshold = math.radians(angle_deg)
    count = 0
    for (h0, _), (h1, at) in zip(moves[:-1], moves[1:]):
        turn = abs(math.remainder(h1 - h0, 2.0 * math.pi))
        if turn <= threshold:
            continue
        near_junction = any(
            math.hypot(at[0] - jx, at[1] - jy) <= junction_radius
            for jx, jy in junctions
        )
        if not near_junction:
            count += 1
    return count
