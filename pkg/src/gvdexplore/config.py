"""Run configuration: one flat dataclass, overridable from key=value files."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from pathlib import Path


@dataclass
class ExplorationConfig:
    # sensor
    beam_count: int = 360
    fov_deg: float = 270.0
    max_range: float = 10.0
    sensor_yaw: float = 0.0
    # motion
    v_max: float = 0.5
    dt: float = 0.1
    # planning loop
    planning_period: float = 1.0
    heading_window: float = 2.0
    heading_threshold_deg: float = 150.0
    history_window: float = 5.0
    goal_tol: float = 0.3
    blacklist_ttl: float = 30.0
    # frontiers; the local window detector suppresses small regions, the
    # global consolidation list keeps them all so exploration can finish
    min_frontier_size: int = 5
    global_min_frontier_size: int = 1
    window_half_extent: float = 4.0
    w_d: float = 1.0
    w_s: float = 1.0
    # topological planner
    subpath_threshold_frac: float = 0.3
    pathscore_eps: float = 0.1
    # navigation
    inflation: float = 0.25
    snap_radius: float = 0.5
    # rrt baseline
    rrt_step: float = 0.5
    rrt_iters: int = 200
    rrt_done_cycles: int = 5
    # run limits
    max_sim_time: float = 1800.0
    wall_budget: float = 60.0

    @property
    def fov(self) -> float:
        return math.radians(self.fov_deg)

    @property
    def heading_threshold(self) -> float:
        return math.radians(self.heading_threshold_deg)

    def apply_overrides(self, pairs: dict) -> "ExplorationConfig":
        by_name = {f.name: f for f in fields(self)}
        for key, value in pairs.items():
            if key not in by_name:
                raise KeyError(f"unknown config key {key!r}")
            setattr(self, key, _cast(by_name[key], value))
        return self


def _cast(f, value):
    if f.type in ("int", int):
        return int(value)
    if f.type in ("float", float):
        return float(value)
    return value


def load_config(path) -> ExplorationConfig:
    """Parse a key=value config file (# starts a comment)."""
    cfg = ExplorationConfig()
    pairs = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line has no '=': {line!r}")
        key, value = line.split("=", 1)
        pairs[key.strip()] = value.strip()
    return cfg.apply_overrides(pairs)
