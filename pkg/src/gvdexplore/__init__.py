"""Deterministic 2D exploration simulator with hierarchical frontier/GVD
planning, greedy and random-tree baselines, and a benchmark harness."""

from ._kernels import USE_NUMBA
from .config import ExplorationConfig, load_config
from .frontiers import Frontier, LocalWindow, detect_frontiers, greedy_select, oriented_select
from .grid import (
    FREE,
    OCCUPIED,
    UNKNOWN,
    CellIndex,
    DistanceField,
    OccupancyGrid,
    RayHit,
    RayTerminal,
    distance_transform,
    load_map,
    raycast,
    save_map,
)
from .gvd import GvdMatrix, TopoEdge, TopoGraph, TopoNode, build_graph, dump_graph, extract_gvd
from .handler import ExplorationGoal, TaskHandler, goal_reached
from .nav import plan_path
from .runner import RunResult, run_exploration
from .sim import (
    CoverageRecord,
    Pose,
    SensorConfig,
    SimState,
    coverage,
    heading_change,
    sense,
    step_along,
)
from .topo_planner import (
    MainPathResult,
    MultiRootTree,
    fuse_to_roots,
    main_path_search,
    nearest_root,
    node_score,
    select_goal,
)

__version__ = "0.1.0"
