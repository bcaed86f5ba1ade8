"""Benchmark matrix: (map x policy x seeds x start poses) runs, per-run
coverage CSVs, per-run traces, and a summary table of milestone times."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from .config import ExplorationConfig
from .grid import OccupancyGrid, load_map, parse_start_poses, _read_meta, _meta_path
from .render import save_snapshot_pgm
from .runner import POLICIES, RunResult, run_exploration
from .sim import Pose

MILESTONES = (0.6, 0.8, 0.9)

COVERAGE_HEADER = "sim_time,discovered_free_fraction,distance_travelled,active_stage"
TRACE_HEADER = (
    "sim_time,x,y,theta,mode,filter_fired,dispatched,goal_source,goal_x,goal_y,coverage"
)
SUMMARY_HEADER = (
    "policy,runs,completed,failed,t60_mean,t80_mean,t90_mean,distance_mean"
)


@dataclass
class RunSpec:
    policy: str
    seed: int
    pose_index: int
    start: Pose


def coverage_csv(result: RunResult) -> str:
    lines = [COVERAGE_HEADER]
    for rec in result.records:
        lines.append(
            f"{rec.sim_time:.1f},{rec.discovered_free_fraction:.6f},"
            f"{rec.distance_travelled:.3f},{rec.active_stage}"
        )
    return "\n".join(lines) + "\n"


def trace_csv(result: RunResult) -> str:
    lines = [TRACE_HEADER]
    for row in result.trace:
        gx = "" if math.isnan(row.goal_x) else f"{row.goal_x:.3f}"
        gy = "" if math.isnan(row.goal_y) else f"{row.goal_y:.3f}"
        lines.append(
            f"{row.sim_time:.1f},{row.x:.4f},{row.y:.4f},{row.theta:.4f},"
            f"{row.mode},{int(row.filter_fired)},{int(row.dispatched)},"
            f"{row.goal_source},{gx},{gy},{row.coverage:.6f}"
        )
    return "\n".join(lines) + "\n"


def load_start_poses(map_path) -> list[Pose]:
    meta = _read_meta(_meta_path(Path(map_path)))
    poses = [Pose(*p) for p in parse_start_poses(meta)]
    return poses


def default_start_pose(truth: OccupancyGrid) -> Pose:
    from .grid import FREE
    import numpy as np

    rows, cols = np.nonzero(truth.cells == FREE)
    order = min(range(rows.size), key=lambda i: (rows[i], cols[i]))
    x, y = truth.cell_center(int(cols[order]), int(rows[order]))
    return Pose(x, y, 0.0)


def run_matrix(
    truth: OccupancyGrid,
    policies: list[str],
    seeds: list[int],
    poses: list[tuple[int, Pose]],
    out_dir,
    cfg: ExplorationConfig | None = None,
    snapshot_times: list[float] | None = None,
) -> dict:
    """Run the whole matrix, write CSVs and summary.csv, return stats."""
    cfg = cfg or ExplorationConfig()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stats: dict[str, list[RunResult]] = {p: [] for p in policies}
    multi_pose = len(poses) > 1

    for policy in policies:
        if policy not in POLICIES:
            raise ValueError(f"unknown policy {policy!r}")
        pdir = out / policy
        pdir.mkdir(parents=True, exist_ok=True)
        for pose_index, start in poses:
            for seed in seeds:
                stem = f"{seed}_pose{pose_index}" if multi_pose else f"{seed}"
                snapshots = sorted(snapshot_times or [])
                pending = list(snapshots)

                def on_cycle(state, result, _pending=pending, _stem=stem, _pdir=pdir):
                    while _pending and state.sim_time >= _pending[0]:
                        t = _pending.pop(0)
                        save_snapshot_pgm(
                            state, _pdir / f"{_stem}_t{t:g}.pgm",
                            result.goal, cfg.min_frontier_size,
                        )

                result = run_exploration(
                    truth, policy, start, cfg, seed,
                    on_cycle=on_cycle if snapshots else None,
                )
                (pdir / f"{stem}.csv").write_text(coverage_csv(result))
                (pdir / f"{stem}_trace.csv").write_text(trace_csv(result))
                stats[policy].append(result)

    (out / "summary.csv").write_text(summary_csv(stats))
    return stats


def _mean(values: list[float]) -> float | None:
    return sum(values) / len(values) if values else None


def summary_csv(stats: dict[str, list]) -> str:
    lines = [SUMMARY_HEADER]
    for policy in stats:
        results = stats[policy]
        cells = [policy, str(len(results))]
        cells.append(str(sum(1 for r in results if r.done)))
        cells.append(str(sum(1 for r in results if r.failed)))
        for frac in MILESTONES:
            times = [t for t in (r.time_to(frac) for r in results) if t is not None]
            m = _mean(times)
            cells.append("Failed" if m is None else f"{m:.1f}")
        dist = _mean([r.distance for r in results])
        cells.append("Failed" if dist is None else f"{dist:.2f}")
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
