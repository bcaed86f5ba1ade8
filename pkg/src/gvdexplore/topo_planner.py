"""Global planning over the topological graph.

Pipeline: longest-path DFS from a start node marks the main path (stem
nodes); branch subtrees are fused upward so every stem root aggregates the
frontier records hanging below it; paths of stem nodes emanating from the
root nearest the robot are scored and the best path's first node becomes
the exploration goal.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

from .errors import MissingNodeError, OrphanBranchError
from .gvd import BRANCH, STEM, TopoGraph
from .sim import Pose


@dataclass
class MainPathResult:
    length: float
    nodes: list[int]  # farthest node first, start node last
    sub_paths: list[list[int]] = field(default_factory=list)


@dataclass
class FrontierRecord:
    frontier_id: int
    size: int
    distance: float  # graph travel distance root -> leaf, meters


@dataclass
class MultiRootTree:
    roots: list[int]
    records: dict[int, list[FrontierRecord]]
    orphans: list[int] = field(default_factory=list)  # frontier-bearing nodes with no stem connection


@dataclass
class PathCandidate:
    nodes: list[int]  # v1 .. v_end, emanating from (not including) v_key
    length: float  # travel distance v_key -> v_end
    score: float


def main_path_search(
    graph: TopoGraph,
    start: int,
    threshold_l: float | None = None,
    threshold_frac: float = 0.3,
) -> MainPathResult:
    """Longest simple path from ``start`` by recursive DFS.

    Secondary candidates longer than the threshold are recorded as
    sub-paths.  When no explicit threshold is given, a first pass finds the
    main path length L and a second pass records sub-paths against
    threshold_frac * L.
    """
    if start < 0 or start >= len(graph.nodes):
        raise MissingNodeError(f"node {start} not in graph")

    def search(threshold: float) -> tuple[float, list[int], list[list[int]]]:
        visited = [False] * len(graph.nodes)
        subs: list[list[int]] = []

        def dfs(v: int) -> tuple[float, list[int]]:
            visited[v] = True
            best_len = 0.0
            best_nodes: list[int] = []
            for n, edge in graph.neighbors(v):
                if visited[n]:
                    continue
                child_len, child_nodes = dfs(n)
                cand = child_len + edge.length
                if cand > best_len:
                    best_len, best_nodes = cand, child_nodes
                elif cand > threshold:
                    subs.append(list(child_nodes))
            best_nodes.append(v)
            return best_len, best_nodes

        length, nodes = dfs(start)
        return length, nodes, subs

    if threshold_l is None:
        length, _, _ = search(math.inf)
        threshold_l = threshold_frac * length
    length, nodes, subs = search(threshold_l)
    return MainPathResult(length=length, nodes=nodes, sub_paths=subs)


def classify_nodes(graph: TopoGraph, main: MainPathResult) -> TopoGraph:
    """Mark main-path nodes as stem, everything else as branch."""
    on_path = set(main.nodes)
    for node in graph.nodes:
        node.kind = STEM if node.id in on_path else BRANCH
    return graph


def fuse_to_roots(
    graph: TopoGraph, stem_order: list[int] | None = None, strict: bool = True
) -> MultiRootTree:
    """Aggregate every frontier-bearing node into its nearest stem root.

    Travel distances are graph shortest paths (ties to the lowest root id).
    Frontier-bearing nodes with no stem connection raise OrphanBranchError
    in strict mode and are reported as orphans otherwise.
    """
    stems = [n.id for n in graph.nodes if n.kind == STEM]
    if stem_order is not None:
        known = set(stems)
        roots = [v for v in stem_order if v in known]
        roots += sorted(known - set(roots))
    else:
        roots = sorted(stems)

    dist = {v: math.inf for v in range(len(graph.nodes))}
    root_of: dict[int, int] = {}
    heap = []
    for r in sorted(stems):
        dist[r] = 0.0
        root_of[r] = r
        heapq.heappush(heap, (0.0, r, r))
    while heap:
        d, root, v = heapq.heappop(heap)
        if d > dist[v] or (d == dist[v] and root_of.get(v, root) != root):
            continue
        for n, edge in graph.neighbors(v):
            nd = d + edge.length
            if nd < dist[n] or (nd == dist[n] and root < root_of.get(n, math.inf)):
                dist[n] = nd
                root_of[n] = root
                heapq.heappush(heap, (nd, root, n))

    records: dict[int, list[FrontierRecord]] = {r: [] for r in roots}
    orphans: list[int] = []
    for node in graph.nodes:
        if not node.frontier_refs:
            continue
        if node.id not in root_of or math.isinf(dist[node.id]):
            if strict:
                raise OrphanBranchError(
                    f"node {node.id} carries frontiers but reaches no stem node"
                )
            orphans.append(node.id)
            continue
        root = root_of[node.id]
        for fid, size in node.frontier_refs:
            records[root].append(FrontierRecord(fid, size, dist[node.id]))
    for r in records:
        records[r].sort(key=lambda rec: rec.frontier_id)
    return MultiRootTree(roots=roots, records=records, orphans=orphans)


def nearest_root(tree: MultiRootTree, graph: TopoGraph, robot: Pose) -> int | None:
    """Stem node closest to the robot (Euclidean); ties to the lowest id."""
    best = None
    best_d2 = math.inf
    for r in sorted(tree.roots):
        px, py = graph.nodes[r].position
        d2 = (px - robot.x) ** 2 + (py - robot.y) ** 2
        if d2 < best_d2:
            best = r
            best_d2 = d2
    return best


def node_score(records: list[FrontierRecord], d: float) -> float:
    """Aggregated frontier size at a node, decayed by travel distance."""
    if d < 0:
        raise ValueError("distance must be >= 0")
    total = sum(rec.size for rec in records)
    return total * math.exp(-d)


def _stem_adjacency(graph: TopoGraph) -> dict[int, list[tuple[int, float]]]:
    """stem node -> [(stem neighbor, min edge length)], sorted by neighbor."""
    adj: dict[int, dict[int, float]] = {}
    stems = {n.id for n in graph.nodes if n.kind == STEM}
    for e in graph.edges:
        if e.u in stems and e.v in stems:
            for a, b in ((e.u, e.v), (e.v, e.u)):
                cur = adj.setdefault(a, {})
                if b not in cur or e.length < cur[b]:
                    cur[b] = e.length
    return {v: sorted(nbrs.items()) for v, nbrs in adj.items()}


def enumerate_path_candidates(
    tree: MultiRootTree, graph: TopoGraph, v_key: int, eps: float = 0.1
) -> list[PathCandidate]:
    """All maximal simple stem paths emanating from v_key, scored.

    Each path's score sums the member nodes' aggregated-frontier scores
    (distance-decayed from v_key) and divides by log(path length + 1),
    floored at eps.  Candidates are sorted best first; exact score ties
    break toward the lexicographically smallest node-id sequence.
    """
    adj = _stem_adjacency(graph)
    candidates: list[PathCandidate] = []

    def extend(path: list[int], dists: list[float], on_path: set[int]):
        tail = path[-1]
        extended = False
        for n, length in adj.get(tail, []):
            if n in on_path or n == v_key:
                continue
            on_path.add(n)
            extend(path + [n], dists + [dists[-1] + length], on_path)
            on_path.remove(n)
            extended = True
        if not extended:
            total = sum(
                node_score(tree.records.get(v, []), d) for v, d in zip(path, dists)
            )
            l = dists[-1]
            score = total / max(math.log(l + 1.0), eps)
            candidates.append(PathCandidate(list(path), l, score))

    for n, length in adj.get(v_key, []):
        extend([n], [length], {n})

    candidates.sort(key=lambda c: (-c.score, tuple(c.nodes)))
    return candidates


def select_goal(
    tree: MultiRootTree, graph: TopoGraph, v_key: int | None, eps: float = 0.1
) -> int | None:
    """First node of the best-scoring stem path, or None when no path
    carries any frontier mass."""
    if v_key is None:
        return None
    candidates = enumerate_path_candidates(tree, graph, v_key, eps)
    if not candidates or candidates[0].score <= 0.0:
        return None
    return candidates[0].nodes[0]
