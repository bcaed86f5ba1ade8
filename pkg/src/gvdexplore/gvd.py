"""GVD skeleton extraction and topological graph construction.

The skeleton is obtained by eroding the free mask away from obstacles
(unknown cells count as obstacles, which keeps the diagram inside explored
space) and applying Zhang-Suen thinning until stable.  Junction clusters,
endpoints and frontier-bearing cells become graph nodes; the skeleton cells
between them become polyline edges with metric lengths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ShapeMismatchError
from .frontiers import Frontier
from .grid import FREE, OCCUPIED, UNKNOWN, OccupancyGrid

SQRT2 = math.sqrt(2.0)

# fixed neighbor visit order keeps tracing deterministic
_OFFSETS = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))

STEM = "stem"
BRANCH = "branch"


@dataclass
class GvdMatrix:
    mask: np.ndarray
    resolution: float = 1.0
    origin: tuple[float, float] = (0.0, 0.0)

    def cell_center(self, row: int, col: int) -> tuple[float, float]:
        return (
            self.origin[0] + (col + 0.5) * self.resolution,
            self.origin[1] + (row + 0.5) * self.resolution,
        )


@dataclass
class TopoNode:
    id: int
    position: tuple[float, float]
    cell: tuple[int, int]  # representative (row, col)
    cells: list[tuple[int, int]] = field(default_factory=list)
    kind: str = BRANCH
    frontier_refs: list[tuple[int, int]] = field(default_factory=list)  # (id, size)

    @property
    def is_leaf(self) -> bool:
        return len(self.frontier_refs) > 0


@dataclass
class TopoEdge:
    id: int
    u: int
    v: int
    polyline: list[tuple[int, int]]  # includes both node cells when raster-traced
    length: float


class TopoGraph:
    """Nodes, polyline edges and an adjacency index, ids dense from 0."""

    def __init__(self, resolution: float = 1.0, origin: tuple[float, float] = (0.0, 0.0)):
        self.nodes: list[TopoNode] = []
        self.edges: list[TopoEdge] = []
        self.adjacency: dict[int, list[int]] = {}
        self.resolution = resolution
        self.origin = origin

    def add_node(self, position, cell=None, kind=BRANCH, frontier_refs=None) -> TopoNode:
        node = TopoNode(
            id=len(self.nodes),
            position=tuple(position),
            cell=tuple(cell) if cell is not None else (0, 0),
            cells=[tuple(cell)] if cell is not None else [],
            kind=kind,
            frontier_refs=list(frontier_refs or []),
        )
        self.nodes.append(node)
        self.adjacency[node.id] = []
        return node

    def add_edge(self, u: int, v: int, length: float, polyline=None) -> TopoEdge:
        if u == v:
            raise ValueError("self-loop edges are not allowed")
        edge = TopoEdge(
            id=len(self.edges), u=u, v=v,
            polyline=list(polyline or []), length=float(length),
        )
        self.edges.append(edge)
        self.adjacency[u].append(edge.id)
        self.adjacency[v].append(edge.id)
        return edge

    def neighbors(self, node_id: int) -> list[tuple[int, TopoEdge]]:
        """(other node id, edge) pairs, sorted by (other id, edge id)."""
        out = []
        for eid in self.adjacency[node_id]:
            e = self.edges[eid]
            out.append((e.v if e.u == node_id else e.u, e))
        out.sort(key=lambda t: (t[0], t[1].id))
        return out

    def stem_nodes(self) -> list[TopoNode]:
        return [n for n in self.nodes if n.kind == STEM]


def neighbor_degree(mask: np.ndarray) -> np.ndarray:
    """Count of flagged 8-neighbors per cell."""
    deg = np.zeros(mask.shape, dtype=np.int8)
    m = mask.astype(np.int8)
    deg[1:, :] += m[:-1, :]
    deg[:-1, :] += m[1:, :]
    deg[:, 1:] += m[:, :-1]
    deg[:, :-1] += m[:, 1:]
    deg[1:, 1:] += m[:-1, :-1]
    deg[1:, :-1] += m[:-1, 1:]
    deg[:-1, 1:] += m[1:, :-1]
    deg[:-1, :-1] += m[1:, 1:]
    return deg


def _locally_connected_without(mask: np.ndarray, r: int, c: int) -> bool:
    """True when the flagged 8-neighbors of (r, c) stay 8-connected inside
    the 3x3 neighborhood once (r, c) is removed."""
    h, w = mask.shape
    nbrs = []
    for dr, dc in _OFFSETS:
        nr, nc = r + dr, c + dc
        if 0 <= nr < h and 0 <= nc < w and mask[nr, nc]:
            nbrs.append((nr, nc))
    if len(nbrs) <= 1:
        return True
    seen = {nbrs[0]}
    stack = [nbrs[0]]
    pool = set(nbrs)
    while stack:
        ar, ac = stack.pop()
        for br, bc in pool:
            if (br, bc) not in seen and max(abs(ar - br), abs(ac - bc)) == 1:
                seen.add((br, bc))
                stack.append((br, bc))
    return len(seen) == len(nbrs)


def _remove_square_blocks(mask: np.ndarray) -> None:
    """Peel 8-simple cells out of fully flagged 2x2 blocks until stable."""
    while True:
        blocks = mask[:-1, :-1] & mask[:-1, 1:] & mask[1:, :-1] & mask[1:, 1:]
        if not blocks.any():
            return
        removed = False
        rows, cols = np.nonzero(blocks)
        for r, c in zip(rows.tolist(), cols.tolist()):
            for dr, dc in ((0, 0), (0, 1), (1, 0), (1, 1)):
                rr, cc = r + dr, c + dc
                if mask[rr, cc] and _locally_connected_without(mask, rr, cc):
                    mask[rr, cc] = False
                    removed = True
                    break
            if removed:
                break
        if not removed:
            return


def extract_gvd(discovered: OccupancyGrid) -> GvdMatrix:
    """Thin the explored free space down to its one-cell-wide skeleton.

    Cells within one cell (8-neighborhood) of an occupied or unknown cell
    are never flagged, so the skeleton keeps clearance from walls and from
    the exploration boundary.
    """
    free = discovered.cells == FREE
    obstacle = (discovered.cells == OCCUPIED) | (discovered.cells == UNKNOWN)
    if not free.any():
        return GvdMatrix(
            np.zeros_like(free), discovered.resolution, discovered.origin
        )
    if obstacle.any():
        dist = np.empty(free.shape, dtype=np.float64)
        _kernels.chamfer_cells(np.ascontiguousarray(obstacle, dtype=np.uint8), dist)
        core = free & (dist > 1.34)  # drops the full 8-neighborhood of obstacles
    else:
        core = free.copy()

    h, w = core.shape
    work = np.zeros((h + 2, w + 2), dtype=np.uint8)
    work[1:-1, 1:-1] = core
    flags = np.zeros_like(work)
    while True:
        removed = _kernels.thinning_pass(work, flags, 0)
        removed += _kernels.thinning_pass(work, flags, 1)
        if removed == 0:
            break
    mask = work[1:-1, 1:-1].astype(bool)
    _remove_square_blocks(mask)
    return GvdMatrix(mask, discovered.resolution, discovered.origin)


def _step_length(a: tuple[int, int], b: tuple[int, int], resolution: float) -> float:
    return (SQRT2 if a[0] != b[0] and a[1] != b[1] else 1.0) * resolution


def polyline_length(cells: list[tuple[int, int]], resolution: float) -> float:
    return sum(_step_length(a, b, resolution) for a, b in zip(cells[:-1], cells[1:]))


def _cluster_representative(cells: list[tuple[int, int]]) -> tuple[int, int]:
    cr = sum(c[0] for c in cells) / len(cells)
    cc = sum(c[1] for c in cells) / len(cells)
    return min(cells, key=lambda p: ((p[0] - cr) ** 2 + (p[1] - cc) ** 2, p))


def build_graph(
    m: GvdMatrix, frontiers: list[Frontier], discovered: OccupancyGrid
) -> TopoGraph:
    """Extract nodes and polyline edges from the skeleton raster.

    Junction clusters (adjacent degree>=3 cells) merge into a single node;
    degree<=1 cells become nodes; each frontier is attributed to the
    skeleton cell nearest its centroid, promoting that cell to a node when
    needed.  Edges are traced cell-by-cell between nodes.
    """
    if m.mask.shape != discovered.cells.shape:
        raise ShapeMismatchError(
            f"matrix shape {m.mask.shape} != grid shape {discovered.cells.shape}"
        )
    mask = m.mask
    res = m.resolution
    graph = TopoGraph(res, m.origin)
    if not mask.any():
        return graph

    sk_rows, sk_cols = np.nonzero(mask)
    sk_cells = np.stack([sk_rows, sk_cols], axis=1).astype(np.float64)

    # anchor each frontier to its nearest skeleton cell (by centroid)
    anchor_refs: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for f in frontiers:
        fc = (
            (f.centroid[1] - m.origin[1]) / res - 0.5,
            (f.centroid[0] - m.origin[0]) / res - 0.5,
        )  # (row, col) in cell coordinates
        d2 = (sk_cells[:, 0] - fc[0]) ** 2 + (sk_cells[:, 1] - fc[1]) ** 2
        best = np.lexsort((sk_cells[:, 1], sk_cells[:, 0], d2))[0]
        cell = (int(sk_cells[best, 0]), int(sk_cells[best, 1]))
        anchor_refs.setdefault(cell, []).append((f.id, f.size))

    forced: set[tuple[int, int]] = set()
    for _ in range(64):
        result = _trace_once(mask, res, m.origin, anchor_refs, forced)
        if isinstance(result, TopoGraph):
            return result
        forced.add(result)
    raise RuntimeError("edge tracing failed to stabilize")


def _trace_once(mask, res, origin, anchor_refs, forced):
    """One node-assignment + edge-tracing attempt.

    Returns the finished TopoGraph, or a (row, col) cell to force as an
    extra node when a self-loop or an unreachable cycle was found.
    """
    deg = neighbor_degree(mask)
    h, w = mask.shape

    junction = mask & (deg >= 3)
    seen = np.zeros_like(mask)
    member_groups: list[list[tuple[int, int]]] = []
    rows, cols = np.nonzero(junction)
    for r, c in sorted(zip(rows.tolist(), cols.tolist())):
        if seen[r, c]:
            continue
        comp = [(r, c)]
        seen[r, c] = True
        stack = [(r, c)]
        while stack:
            ar, ac = stack.pop()
            for dr, dc in _OFFSETS:
                nr, nc = ar + dr, ac + dc
                if 0 <= nr < h and 0 <= nc < w and junction[nr, nc] and not seen[nr, nc]:
                    seen[nr, nc] = True
                    comp.append((nr, nc))
                    stack.append((nr, nc))
        member_groups.append(sorted(comp))

    in_cluster = {cell for comp in member_groups for cell in comp}
    single_cells = set()
    rows, cols = np.nonzero(mask & (deg <= 1))
    for cell in zip(rows.tolist(), cols.tolist()):
        single_cells.add(cell)
    for cell in anchor_refs:
        if cell not in in_cluster:
            single_cells.add(cell)
    for cell in forced:
        if mask[cell] and cell not in in_cluster:
            single_cells.add(cell)

    groups = member_groups + [[cell] for cell in sorted(single_cells)]
    groups.sort(key=lambda comp: comp[0])

    graph = TopoGraph(res, origin)
    cell_to_node: dict[tuple[int, int], int] = {}
    for comp in groups:
        rep = _cluster_representative(comp)
        node = graph.add_node(
            position=(origin[0] + (rep[1] + 0.5) * res, origin[1] + (rep[0] + 0.5) * res),
            cell=rep,
        )
        node.cells = list(comp)
        for cell in comp:
            cell_to_node[cell] = node.id
        for cell in comp:
            for ref in anchor_refs.get(cell, []):
                node.frontier_refs.append(ref)
        node.frontier_refs.sort()

    consumed = set()
    used_pairs = set()

    def flagged_neighbors(cell):
        out = []
        for dr, dc in _OFFSETS:
            nr, nc = cell[0] + dr, cell[1] + dc
            if 0 <= nr < h and 0 <= nc < w and mask[nr, nc]:
                out.append((nr, nc))
        return out

    for node in graph.nodes:
        for a in node.cells:
            for b in flagged_neighbors(a):
                if b in cell_to_node:
                    v = cell_to_node[b]
                    if v == node.id:
                        continue
                    pair = (a, b) if a < b else (b, a)
                    if pair in used_pairs:
                        continue
                    used_pairs.add(pair)
                    graph.add_edge(node.id, v, _step_length(a, b, res), [a, b])
                    continue
                if b in consumed:
                    continue
                polyline = [a, b]
                consumed.add(b)
                prev, cur = a, b
                end_node = None
                while True:
                    cands = [
                        n for n in flagged_neighbors(cur)
                        if n != prev and n not in polyline
                    ]
                    node_cands = sorted(n for n in cands if n in cell_to_node)
                    if node_cands:
                        nxt = node_cands[0]
                        polyline.append(nxt)
                        end_node = cell_to_node[nxt]
                        break
                    path_cands = sorted(n for n in cands if n not in consumed)
                    if not path_cands:
                        break
                    nxt = path_cands[0]
                    polyline.append(nxt)
                    consumed.add(nxt)
                    prev, cur = cur, nxt
                if end_node is None:
                    # dangling trace: the walk closed on itself with no node
                    return polyline[len(polyline) // 2]
                if end_node == node.id:
                    # self-loop: split it by forcing a node at its middle
                    return polyline[len(polyline) // 2]
                graph.add_edge(node.id, end_node, polyline_length(polyline, res), polyline)

    leftovers = sorted(
        (r, c)
        for r, c in zip(*(arr.tolist() for arr in np.nonzero(mask)))
        if (r, c) not in consumed and (r, c) not in cell_to_node
    )
    if leftovers:
        # nodeless cycle component: force a node on it and retrace
        return leftovers[0]
    return graph


def dump_graph(graph: TopoGraph) -> str:
    """Plain-text node and edge listing (golden-test and render substrate)."""
    lines = []
    for n in graph.nodes:
        refs = ",".join(f"{fid}:{size}" for fid, size in n.frontier_refs)
        lines.append(
            f"node {n.id} {n.position[0]:.6f} {n.position[1]:.6f} "
            f"{n.kind} {1 if n.is_leaf else 0} {refs}"
        )
    for e in graph.edges:
        lines.append(f"edge {e.u} {e.v} {e.length:.6f}")
    return "\n".join(lines) + "\n"
