"""Hierarchical exploration loop: local frontier goals, escalation to the
topological planner when the local window empties or the robot spins, and
termination when both stages run dry."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .config import ExplorationConfig
from .frontiers import (
    Frontier,
    LocalWindow,
    detect_frontiers,
    frontier_costs,
    greedy_select,
    oriented_select,
)
from .gvd import build_graph, extract_gvd
from .nav import nearest_reachable_point, plan_path
from .sim import Pose, SimState, heading_change
from .topo_planner import (
    classify_nodes,
    enumerate_path_candidates,
    fuse_to_roots,
    main_path_search,
    nearest_root,
)

SOURCE_LOCAL = "local"
SOURCE_GLOBAL = "global"

MODE_LOCAL = "local"
MODE_GLOBAL_PENDING = "global_pending"
MODE_DONE = "done"

# consecutive goal-less cycles tolerated before giving up; must outlast
# the blacklist TTL so temporarily unreachable frontiers get retried
STALL_LIMIT = 35


class Blacklist:
    """TTL ban list for failed goals; repeat offenders become permanent.

    Phantom frontiers (never-sensed wall-surface cells boxed in by
    inflation) fail identically forever; three strikes retires them, and
    the caller may ban hopeless ones outright.
    """

    def __init__(self, ttl: float, permanent_after: int = 3):
        self.ttl = ttl
        self.permanent_after = permanent_after
        self._until: dict = {}
        self._strikes: dict = {}

    def prune(self, now: float):
        for key in [k for k, t in self._until.items() if t <= now]:
            del self._until[key]

    def add(self, key: tuple, now: float, permanent: bool = False):
        strikes = self._strikes.get(key, 0) + 1
        self._strikes[key] = strikes
        if permanent or strikes >= self.permanent_after:
            self._until[key] = math.inf
        else:
            self._until[key] = now + self.ttl

    def note_reached(self, key: tuple):
        self._strikes.pop(key, None)

    def __contains__(self, key: tuple) -> bool:
        return key in self._until


@dataclass
class ExplorationGoal:
    target: Pose
    source: str
    issued_at: float
    path: list[tuple[float, float]] = field(default_factory=list)
    key: tuple = ()


@dataclass
class HandlerState:
    active: bool = True
    mode: str = MODE_LOCAL
    goal: ExplorationGoal | None = None
    blacklist: Blacklist | None = None
    stall_cycles: int = 0
    spin_mute_until: float = 0.0
    last_xy: tuple = (0.0, 0.0)


@dataclass
class TickResult:
    goal: ExplorationGoal | None
    dispatched: bool = False
    filter_fired: bool = False
    done: bool = False
    mode: str = MODE_LOCAL


def goal_reached(robot: Pose, target: Pose, tol: float = 0.3) -> bool:
    """Position-only arrival test (heading ignored)."""
    return math.hypot(robot.x - target.x, robot.y - target.y) <= tol


def _frontier_key(f: Frontier) -> tuple:
    c = f.cells[0]
    return ("f", c.row, c.col)


def _node_key(cell: tuple[int, int]) -> tuple:
    return ("n", cell[0], cell[1])


def frontier_goal(sim: SimState, f: Frontier, cfg: ExplorationConfig,
                  source: str = SOURCE_LOCAL) -> ExplorationGoal | None:
    """Plan to a frontier: its centroid first, then member cells nearest
    the centroid (curved regions put the centroid deep inside unknown
    space), and finally the nearest reachable viewpoint, from which sensing
    will widen the frontier.  The viewpoint detour is only worth it for
    regions of meaningful size; tiny ones are usually occlusion phantoms.
    """
    targets = [f.centroid]
    cells = sorted(
        f.cells,
        key=lambda c: (
            (sim.discovered.cell_center(c.col, c.row)[0] - f.centroid[0]) ** 2
            + (sim.discovered.cell_center(c.col, c.row)[1] - f.centroid[1]) ** 2,
            (c.row, c.col),
        ),
    )
    targets += [sim.discovered.cell_center(c.col, c.row) for c in cells[:6]]
    if f.size >= cfg.min_frontier_size:
        view = nearest_reachable_point(
            sim.discovered, (sim.robot.x, sim.robot.y), f.centroid, cfg.inflation
        )
        if view is not None and math.hypot(view[0] - sim.robot.x, view[1] - sim.robot.y) > cfg.goal_tol:
            targets.append(view)
    for target in targets:
        path = plan_path(
            sim.discovered, (sim.robot.x, sim.robot.y), target,
            cfg.inflation, cfg.snap_radius,
        )
        if path is None:
            continue
        end = path[-1]
        ref = path[-2] if len(path) >= 2 else (sim.robot.x, sim.robot.y)
        theta = math.atan2(end[1] - ref[1], end[0] - ref[0])
        return ExplorationGoal(
            target=Pose(end[0], end[1], theta),
            source=source,
            issued_at=sim.sim_time,
            path=path,
            key=_frontier_key(f),
        )
    return None


class TaskHandler:
    """Per-cycle goal generation for the hierarchical policy."""

    uses_rng = False

    def __init__(self, cfg: ExplorationConfig, start: Pose):
        self.cfg = cfg
        self.start_xy = (start.x, start.y)
        self.state = HandlerState(blacklist=Blacklist(cfg.blacklist_ttl))

    def _blacklist(self, key: tuple, now: float):
        self.state.blacklist.add(key, now)

    def _ban_frontier(self, f: Frontier, now: float):
        # a tiny region that cannot even be planned to is an occlusion
        # phantom along a wall; retire it outright
        self.state.blacklist.add(
            _frontier_key(f), now, permanent=f.size < self.cfg.min_frontier_size
        )

    # -- goal builders ---------------------------------------------------------
    def _plan_to(self, sim: SimState, target_xy, source: str, key: tuple,
                 theta: float | None = None) -> ExplorationGoal | None:
        path = plan_path(
            sim.discovered, (sim.robot.x, sim.robot.y), target_xy,
            self.cfg.inflation, self.cfg.snap_radius,
        )
        if path is None:
            return None
        end = path[-1]
        if theta is None:
            ref = path[-2] if len(path) >= 2 else (sim.robot.x, sim.robot.y)
            theta = math.atan2(end[1] - ref[1], end[0] - ref[0])
        return ExplorationGoal(
            target=Pose(end[0], end[1], theta),
            source=source,
            issued_at=sim.sim_time,
            path=path,
            key=key,
        )

    def _local_goal(self, sim: SimState, candidates: list[Frontier],
                    window: LocalWindow) -> ExplorationGoal | None:
        pool = list(candidates)
        while pool:
            f = oriented_select(pool, sim.robot, window)
            if f is None:
                return None
            goal = frontier_goal(sim, f, self.cfg)
            if goal is not None:
                return goal
            self._ban_frontier(f, sim.sim_time)
            pool = [p for p in pool if p.id != f.id]
        return None

    def _fallback_goal(self, sim: SimState, frontiers: list[Frontier]) -> ExplorationGoal | None:
        pool = list(frontiers)
        while pool:
            f = greedy_select(pool, sim.robot, self.cfg.w_d, self.cfg.w_s)
            if f is None:
                return None
            goal = frontier_goal(sim, f, self.cfg)
            if goal is not None:
                return goal
            self._ban_frontier(f, sim.sim_time)
            pool = [p for p in pool if p.id != f.id]
        return None

    def _global_goal(self, sim: SimState, frontiers: list[Frontier]) -> ExplorationGoal | None:
        matrix = extract_gvd(sim.discovered)
        graph = build_graph(matrix, frontiers, sim.discovered)
        if not graph.nodes:
            return None
        # double DFS: the main path anchored at the far end of the explored
        # graph tracks the environment backbone instead of the start corner
        seed_node = min(
            graph.nodes,
            key=lambda n: (
                (n.position[0] - sim.robot.x) ** 2
                + (n.position[1] - sim.robot.y) ** 2,
                n.id,
            ),
        )
        probe = main_path_search(graph, seed_node.id, threshold_l=math.inf)
        main = main_path_search(graph, probe.nodes[0],
                                threshold_frac=self.cfg.subpath_threshold_frac)
        classify_nodes(graph, main)
        tree = fuse_to_roots(graph, stem_order=main.nodes, strict=False)
        v_key = nearest_root(tree, graph, sim.robot)
        if v_key is None:
            return None
        for cand in enumerate_path_candidates(tree, graph, v_key, self.cfg.pathscore_eps):
            if cand.score <= 0.0:
                break
            node = graph.nodes[cand.nodes[0]]
            key = _node_key(node.cell)
            if key in self.state.blacklist:
                continue
            if goal_reached(sim.robot, Pose(*node.position), self.cfg.goal_tol):
                # standing on it already; dispatching again would spin in place
                continue
            if len(cand.nodes) >= 2:
                nxt = graph.nodes[cand.nodes[1]].position
                theta = math.atan2(nxt[1] - node.position[1], nxt[0] - node.position[0])
            else:
                theta = math.atan2(node.position[1] - sim.robot.y,
                                   node.position[0] - sim.robot.x)
            goal = self._plan_to(sim, node.position, SOURCE_GLOBAL, key, theta)
            if goal is not None:
                return goal
            self._blacklist(key, sim.sim_time)
        return None

    # -- main cycle --------------------------------------------------------------
    def tick(self, sim: SimState) -> TickResult:
        now = sim.sim_time
        st = self.state
        st.blacklist.prune(now)
        if st.mode == MODE_DONE:
            return TickResult(None, done=True, mode=MODE_DONE)

        # upkeep of the active goal
        if st.goal is not None:
            d_now = math.hypot(sim.robot.x - st.goal.target.x, sim.robot.y - st.goal.target.y)
            if d_now <= self.cfg.goal_tol:
                st.blacklist.note_reached(st.goal.key)
                if st.goal.source == SOURCE_GLOBAL:
                    # the node is sensed out; re-targeting it is useless, and
                    # the turns made getting here must not re-fire the filter
                    self._blacklist(st.goal.key, now)
                    st.spin_mute_until = now + self.cfg.heading_window
                st.goal = None
                st.mode = MODE_LOCAL
            else:
                path = plan_path(
                    sim.discovered, (sim.robot.x, sim.robot.y),
                    (st.goal.target.x, st.goal.target.y),
                    self.cfg.inflation, self.cfg.snap_radius,
                )
                if path is None:
                    self._blacklist(st.goal.key, now)
                    st.goal = None
                    st.mode = MODE_LOCAL
                else:
                    st.goal.path = path
                    moved = math.hypot(sim.robot.x - st.last_xy[0],
                                       sim.robot.y - st.last_xy[1])
                    st.last_xy = (sim.robot.x, sim.robot.y)
                    if st.goal.source == SOURCE_GLOBAL:
                        # global goals are sticky: local planning stays off
                        return TickResult(st.goal, mode=st.mode)
                    if moved >= 0.05:
                        # keep a local goal while it is being pursued;
                        # re-selecting every cycle invites utility-tie
                        # chatter between two distant frontiers
                        return TickResult(st.goal, mode=st.mode)
                    self._blacklist(st.goal.key, now)
                    st.goal = None
                    st.mode = MODE_LOCAL

        raw_frontiers = detect_frontiers(sim.discovered, self.cfg.global_min_frontier_size)
        frontiers = [f for f in raw_frontiers if _frontier_key(f) not in st.blacklist]
        window = LocalWindow((sim.robot.x, sim.robot.y), self.cfg.window_half_extent)
        local_cands = [
            f for f in frontiers
            if f.size >= self.cfg.min_frontier_size and window.contains(*f.centroid)
        ]
        spin = (
            now >= st.spin_mute_until
            and heading_change(sim, self.cfg.heading_window) >= self.cfg.heading_threshold
        )
        filter_fired = (not local_cands) or spin

        # the topological planner consolidates the valid (size-filtered)
        # frontier list; stray slivers are cleaned up by the fallback only
        valid = [f for f in frontiers if f.size >= self.cfg.min_frontier_size]

        goal = None
        if filter_fired:
            goal = self._global_goal(sim, valid)
            if goal is None:
                if not raw_frontiers:
                    st.mode = MODE_DONE
                    st.goal = None
                    st.active = False
                    return TickResult(None, filter_fired=True, done=True, mode=MODE_DONE)
                goal = self._fallback_goal(sim, frontiers)
        else:
            goal = self._local_goal(sim, local_cands, window)
            if goal is None:
                filter_fired = True
                goal = self._global_goal(sim, valid)
                if goal is None:
                    if not raw_frontiers:
                        st.mode = MODE_DONE
                        st.goal = None
                        st.active = False
                        return TickResult(None, filter_fired=True, done=True, mode=MODE_DONE)
                    goal = self._fallback_goal(sim, frontiers)

        if goal is None:
            st.stall_cycles += 1
            st.goal = None
            st.mode = MODE_LOCAL
            if st.stall_cycles >= STALL_LIMIT:
                st.mode = MODE_DONE
                st.active = False
                return TickResult(None, filter_fired=filter_fired, done=True, mode=MODE_DONE)
            return TickResult(None, filter_fired=filter_fired, mode=st.mode)

        st.stall_cycles = 0
        dispatched = st.goal is None or goal.key != st.goal.key or goal.source != st.goal.source
        st.goal = goal
        st.last_xy = (sim.robot.x, sim.robot.y)
        st.mode = MODE_GLOBAL_PENDING if goal.source == SOURCE_GLOBAL else MODE_LOCAL
        return TickResult(st.goal, dispatched=dispatched, filter_fired=filter_fired, mode=st.mode)
