"""Command-line front end for single runs and comparative benchmarks."""

from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path

from .bench import default_start_pose, load_start_poses, run_matrix
from .config import ExplorationConfig, load_config
from .errors import GvdExploreError
from .grid import load_map
from .runner import POLICIES


def bundled_map_path(name: str) -> Path | None:
    base = resources.files("gvdexplore") / "maps" / f"{name}.txt"
    try:
        with resources.as_file(base) as p:
            return p if p.exists() else None
    except FileNotFoundError:
        return None


def resolve_map(spec: str) -> Path | None:
    p = Path(spec)
    if p.exists():
        return p
    return bundled_map_path(spec)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gvdexplore",
        description="Run exploration benchmarks on occupancy-grid maps.",
    )
    parser.add_argument("--map", required=True,
                        help="map file (.txt/.pgm) or bundled map name")
    parser.add_argument("--policy", default="hierarchical",
                        help=f"comma list from {{{','.join(POLICIES)}}}")
    parser.add_argument("--seeds", type=int, default=1, metavar="N",
                        help="run seeds 0..N-1 per (policy, pose)")
    parser.add_argument("--start-pose-set", default="0",
                        help="'all' or comma list of start-pose indices from the map metadata")
    parser.add_argument("--out", default="runs", help="output directory")
    parser.add_argument("--snapshot-at", default="",
                        help="comma list of sim times for PGM snapshots")
    parser.add_argument("--config", default=None,
                        help="key=value config file overriding defaults")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    map_path = resolve_map(args.map)
    if map_path is None:
        print(f"error: map {args.map!r} not found", file=sys.stderr)
        return 2

    try:
        truth = load_map(map_path)
    except GvdExploreError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    policies = [p.strip() for p in args.policy.split(",") if p.strip()]
    for p in policies:
        if p not in POLICIES:
            print(f"error: unknown policy {p!r}", file=sys.stderr)
            return 2

    cfg = load_config(args.config) if args.config else ExplorationConfig()

    all_poses = load_start_poses(map_path)
    if not all_poses:
        all_poses = [default_start_pose(truth)]
    if args.start_pose_set.strip() == "all":
        indices = list(range(len(all_poses)))
    else:
        try:
            indices = [int(v) for v in args.start_pose_set.split(",") if v.strip()]
        except ValueError:
            print(f"error: bad --start-pose-set {args.start_pose_set!r}", file=sys.stderr)
            return 2
        for i in indices:
            if not 0 <= i < len(all_poses):
                print(f"error: start pose index {i} out of range "
                      f"(map has {len(all_poses)})", file=sys.stderr)
                return 2
    poses = [(i, all_poses[i]) for i in indices]

    snapshot_times = [float(v) for v in args.snapshot_at.split(",") if v.strip()]
    seeds = list(range(args.seeds))

    stats = run_matrix(truth, policies, seeds, poses, args.out, cfg, snapshot_times)

    total = sum(len(v) for v in stats.values())
    done = sum(1 for v in stats.values() for r in v if r.done)
    failed = sum(1 for v in stats.values() for r in v if r.failed)
    print(f"{total} runs ({done} completed, {failed} failed); "
          f"summary written to {Path(args.out) / 'summary.csv'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
