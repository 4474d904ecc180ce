"""BBU/LC placement and wavelength assignment for coordinated BS sets.

Per CBS: a latency/capacity-pruned BFS tree is grown from every candidate
root, trees covering all members are back-tracked into root-to-member paths
with first-fit wavelength assignment, and the cheapest surviving tree is
committed to the graph.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

from .prioritization import PrioritizationThresholds, prioritize_cbs
from .scenario import CBSSpec
from .topology import BackhaulGraph


@dataclass(frozen=True)
class CostWeights:
    w_g: float = 1.0
    w_a: float = 1.0
    w_l: float = 1.0

    def __post_init__(self):
        if min(self.w_g, self.w_a, self.w_l) < 0:
            raise ValueError("cost weights must be non-negative")
        if self.w_g == self.w_a == self.w_l == 0:
            raise ValueError("cost weights must not all be zero")

    def total(self, n_g: int, n_a: int, n_l: int) -> float:
        return self.w_g * n_g + self.w_a * n_a + self.w_l * n_l


@dataclass
class BFSTree:
    root: int
    parent: dict[int, tuple[int, int] | None]  # vertex -> (parent vertex, link id)
    depth_latency: dict[int, float]

    @property
    def vertices(self) -> set[int]:
        return set(self.parent)

    def path_to(self, v: int) -> list[int]:
        path = [v]
        while (step := self.parent[path[-1]]) is not None:
            path.append(step[0])
        path.reverse()
        return path

    def link_path_to(self, v: int) -> list[int]:
        links = []
        while (step := self.parent[v]) is not None:
            links.append(step[1])
            v = step[0]
        links.reverse()
        return links


@dataclass(frozen=True)
class Route:
    member: int
    path: tuple[int, ...]          # controller -> member
    wavelengths: tuple[int, ...]   # one per hop
    links: tuple[int, ...]         # link id per hop


@dataclass(frozen=True)
class WavelengthAssignment:
    root: int
    routes: tuple[Route, ...]      # ascending member id

    def pairs(self) -> set[tuple[int, int]]:
        return {(l, w) for r in self.routes for l, w in zip(r.links, r.wavelengths)}


@dataclass(frozen=True)
class Cost:
    n: float
    n_g: int
    n_a: int
    n_l: int

    def astuple(self) -> tuple:
        return (self.n, self.n_g, self.n_a, self.n_l)


@dataclass(frozen=True)
class Placement:
    cbs_id: int
    controller: int
    assignment: WavelengthAssignment
    cost: Cost


def max_path_bfs(graph: BackhaulGraph, root: int, cbs: CBSSpec, *,
                 stop_when_covered: bool = False,
                 max_residual: Sequence[int] | None = None) -> BFSTree:
    """BFS from ``root`` keeping only vertices that pass the CBS constraints.

    A vertex reached over link (u, v) is admitted if the round trip over the
    tree path stays within the budget and, for CBS members, some wavelength
    on (u, v) still has room for the member's demand. A rejected discovery
    does not mark the vertex as visited; a later admissible edge may add it.
    """
    if not 0 <= root < graph.num_vertices:
        raise ValueError(f"root {root} is not a vertex")
    if max_residual is None:
        max_residual = graph.max_residual_units()
    budget = cbs.rtt_budget
    need = cbs.demand_units
    members = set(cbs.members)
    adjacency = graph.adjacency
    latency = graph.latencies

    parent: dict[int, tuple[int, int] | None] = {root: None}
    depth = {root: 0.0}
    remaining = len(members - {root})
    if stop_when_covered and remaining == 0:
        return BFSTree(root, parent, depth)
    queue = deque([root])
    while queue:
        u = queue.popleft()
        du = depth[u]
        for v, lid in adjacency[u]:
            if v in parent:
                continue
            d = du + latency[lid]
            if 2 * d > budget:
                continue
            if v in members:
                if max_residual[lid] < need:
                    continue
                remaining -= 1
            parent[v] = (u, lid)
            depth[v] = d
            queue.append(v)
            if stop_when_covered and remaining == 0:
                return BFSTree(root, parent, depth)
    return BFSTree(root, parent, depth)


def match_cbs(trees: Iterable[BFSTree], cbs: CBSSpec) -> list[BFSTree]:
    return [t for t in trees if all(m in t.parent for m in cbs.members)]


def _first_fit(graph: BackhaulGraph, link_paths: Sequence[Sequence[int]], need: int):
    """Per-path wavelength choices plus the tentative (link, wavelength) loads."""
    cap = graph.capacity
    alloc = graph._alloc
    K = graph.K
    tentative: dict[tuple[int, int], int] = {}
    choices = []
    for links in link_paths:
        chosen = []
        for lid in links:
            row = alloc[lid]
            for w in range(K):
                if row[w] + tentative.get((lid, w), 0) + need <= cap:
                    break
            else:
                return None
            tentative[(lid, w)] = tentative.get((lid, w), 0) + need
            chosen.append(w)
        choices.append(tuple(chosen))
    return choices, tentative


def _cost_of_pairs(graph: BackhaulGraph, pairs, weights: CostWeights) -> Cost:
    alloc = graph._alloc
    n_g = len(pairs)
    n_a = sum(1 for lid, w in pairs if alloc[lid][w] == 0)
    n_l = len({lid for lid, _ in pairs})
    return Cost(weights.total(n_g, n_a, n_l), n_g, n_a, n_l)


def _vertex_path(graph: BackhaulGraph, root: int, links: Sequence[int]) -> tuple[int, ...]:
    path = [root]
    for lid in links:
        path.append(graph.links[lid].other(path[-1]))
    return tuple(path)


def _build_assignment(graph, root, members, link_paths, choices) -> WavelengthAssignment:
    routes = tuple(
        Route(m, _vertex_path(graph, root, links), ws, tuple(links))
        for m, links, ws in zip(members, link_paths, choices)
    )
    return WavelengthAssignment(root, routes)


def backtrack_and_assign(graph: BackhaulGraph, tree: BFSTree, cbs: CBSSpec) -> WavelengthAssignment | None:
    """First-fit wavelengths on every root-to-member tree path, or None.

    Members are handled in ascending id, hops from the root outward; each hop
    takes the lowest wavelength whose residual, after the demands this CBS
    already placed, still fits the member's demand. Nothing is committed.
    """
    if any(m not in tree.parent for m in cbs.members):
        return None
    link_paths = [tree.link_path_to(m) for m in cbs.members]
    fitted = _first_fit(graph, link_paths, cbs.demand_units)
    if fitted is None:
        return None
    return _build_assignment(graph, tree.root, cbs.members, link_paths, fitted[0])


def tree_cost(graph: BackhaulGraph, assignment: WavelengthAssignment, weights: CostWeights) -> Cost:
    """Weighted cost of an uncommitted assignment against the current graph state."""
    return _cost_of_pairs(graph, assignment.pairs(), weights)


def commit(graph: BackhaulGraph, assignment: WavelengthAssignment, demand_units: int) -> None:
    """Allocate every route of ``assignment``; the graph is unchanged on failure."""
    done = []
    try:
        for r in assignment.routes:
            if r.wavelengths:
                graph.allocate_path(r.path, r.wavelengths, demand_units)
                done.append(r)
    except Exception:
        for r in reversed(done):
            graph.release_path(r.path, r.wavelengths, demand_units)
        raise


def _candidate_roots(graph: BackhaulGraph, cbs: CBSSpec, max_residual: Sequence[int],
                     roots: Iterable[int]) -> list[int]:
    """Roots that can possibly host the CBS; exact necessary conditions only.

    Every hop of an accepted route needs a wavelength with room for the
    demand, so root and members must share a component of the subgraph of
    such links.
    """
    need = cbs.demand_units
    adjacency = graph.adjacency
    start = cbs.members[0]
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for v, lid in adjacency[u]:
            if v not in seen and max_residual[lid] >= need:
                seen.add(v)
                stack.append(v)
    if any(m not in seen for m in cbs.members):
        return []
    return [r for r in roots if r in seen]


def place_cbs(graph: BackhaulGraph, cbs: CBSSpec, weights: CostWeights = CostWeights(), *,
              roots: Iterable[int] | None = None, exhaustive: bool = False,
              commit_result: bool = True) -> Placement | None:
    """Choose a controller and wavelength assignment for one CBS.

    Returns the minimum-cost placement (ties: lowest root id) and commits it
    to ``graph`` unless ``commit_result`` is False; returns None and leaves
    the graph untouched when no root works.

    With ``exhaustive`` every candidate root is expanded. Otherwise roots are
    visited in order of a cost lower bound and expansion stops once no
    remaining root can beat the incumbent; the selected placement is the same.
    """
    for m in cbs.members:
        if not 0 <= m < graph.num_vertices:
            raise ValueError(f"CBS {cbs.id} member {m} is not a vertex")
    if roots is None:
        roots = range(graph.num_vertices)
    roots = sorted(set(roots))
    max_residual = graph.max_residual_units()

    if exhaustive:
        trees = [max_path_bfs(graph, r, cbs, max_residual=max_residual) for r in roots]
        candidates = match_cbs(trees, cbs)
        assigned = [backtrack_and_assign(graph, t, cbs) for t in candidates]
        confirmed = [a for a in assigned if a is not None]
        best = None
        for a in confirmed:
            cost = tree_cost(graph, a, weights)
            if best is None or cost.n < best[0].n:
                best = (cost, a)
    else:
        best = _branch_and_bound(graph, cbs, weights, roots, max_residual)

    if best is None:
        return None
    cost, assignment = best
    if commit_result:
        commit(graph, assignment, cbs.demand_units)
    return Placement(cbs.id, assignment.root, assignment, cost)


class _PlainTree:
    """Unpruned BFS tree of one root: link path and one-way latency per vertex."""

    __slots__ = ("parent_link", "link_paths", "max_depth")

    def __init__(self, graph: BackhaulGraph, root: int):
        n = graph.num_vertices
        parent_link = [-1] * n
        link_paths: list[tuple[int, ...] | None] = [None] * n
        depth = {root: 0.0}
        link_paths[root] = ()
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for v, lid in graph.adjacency[u]:
                if v in depth:
                    continue
                depth[v] = depth[u] + graph.latencies[lid]
                parent_link[v] = lid
                link_paths[v] = link_paths[u] + (lid,)
                queue.append(v)
        self.parent_link = parent_link
        self.link_paths = link_paths
        self.max_depth = max(depth.values())


def _plain_forest(graph: BackhaulGraph) -> list[_PlainTree]:
    forest = graph._static.get("plain_forest")
    if forest is None:
        forest = [_PlainTree(graph, r) for r in range(graph.num_vertices)]
        graph._static["plain_forest"] = forest
    return forest


def _tree_link_paths(graph, root, cbs, max_residual, plain: _PlainTree):
    """Root-to-member link paths of the pruned BFS tree, or None if not all covered.

    When no discovery can be rejected (the whole plain tree fits the latency
    budget and every member's plain parent link has room) the pruned BFS
    visits vertices exactly like the plain one, so its cached paths are used.
    """
    need = cbs.demand_units
    if 2 * plain.max_depth <= cbs.rtt_budget and all(
        m == root or max_residual[plain.parent_link[m]] >= need for m in cbs.members
    ):
        return [plain.link_paths[m] for m in cbs.members]
    tree = max_path_bfs(graph, root, cbs, stop_when_covered=True, max_residual=max_residual)
    if any(m not in tree.parent for m in cbs.members):
        return None
    return [tree.link_path_to(m) for m in cbs.members]


def _branch_and_bound(graph, cbs, weights, roots, max_residual):
    hops = graph.hop_distances()
    forest = _plain_forest(graph)
    members = cbs.members
    bounded = []
    for r in _candidate_roots(graph, cbs, max_residual, roots):
        row = hops[r]
        if any(row[m] < 0 for m in members):
            continue
        # every used link carries >= 1 wavelength; the tree spans all members,
        # and vertices closer to the root than the nearest member are non-members
        others = [row[m] for m in members if m != r]
        lb_links = max(others) if others else 0
        if others:
            lb_links = max(lb_links, len(others) + min(others) - 1)
        bounded.append((weights.total(lb_links, 0, lb_links), r))
    bounded.sort()

    best = None  # (cost, root, link_paths, choices)
    for lb, r in bounded:
        if best is not None and (lb > best[0].n or (lb == best[0].n and r > best[1])):
            continue
        link_paths = _tree_link_paths(graph, r, cbs, max_residual, forest[r])
        if link_paths is None:
            continue
        fitted = _first_fit(graph, link_paths, cbs.demand_units)
        if fitted is None:
            continue
        cost = _cost_of_pairs(graph, fitted[1], weights)
        if best is None or cost.n < best[0].n or (cost.n == best[0].n and r < best[1]):
            best = (cost, r, link_paths, fitted[0])
    if best is None:
        return None
    cost, r, link_paths, choices = best
    return cost, _build_assignment(graph, r, members, link_paths, choices)


def run_heuristic(graph: BackhaulGraph, W: Sequence[CBSSpec],
                  thresholds: PrioritizationThresholds | None = PrioritizationThresholds(),
                  weights: CostWeights = CostWeights(), *,
                  roots: Iterable[int] | None = None,
                  exhaustive: bool = False) -> tuple[list[Placement], list[int]]:
    """Place every CBS in turn; hotspot CBSs first unless ``thresholds`` is None."""
    if thresholds is None:
        order = list(W)
    else:
        order = prioritize_cbs(W, graph.num_vertices, thresholds).ordered()
    if roots is not None:
        roots = sorted(set(roots))
    placements, infeasible = [], []
    for cbs in order:
        p = place_cbs(graph, cbs, weights, roots=roots, exhaustive=exhaustive)
        if p is None:
            infeasible.append(cbs.id)
        else:
            placements.append(p)
    return placements, infeasible


# ----------------------------------------------------------------------
# placement records

def _fmt(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def placement_lines(placements: Sequence[Placement], infeasible: Sequence[int] = ()) -> list[str]:
    lines = []
    for p in placements:
        c = p.cost
        lines.append(f"P {p.cbs_id} {p.controller} n={_fmt(c.n)} ng={c.n_g} na={c.n_a} nl={c.n_l}")
        for r in p.assignment.routes:
            toks = [str(w) for w in r.wavelengths] + [str(v) for v in r.path]
            lines.append(f"R {p.cbs_id} {r.member} " + " ".join(toks))
    for cid in infeasible:
        lines.append(f"X {cid}")
    return lines


@dataclass
class PlacementRecord:
    """A parsed ``P`` record with its ``R`` routes (paths, wavelengths)."""
    cbs_id: int
    controller: int
    n: float
    n_g: int
    n_a: int
    n_l: int
    routes: dict[int, tuple[tuple[int, ...], tuple[int, ...]]]


def parse_placement_lines(lines: Iterable[str]) -> tuple[list[PlacementRecord], list[int]]:
    records: dict[int, PlacementRecord] = {}
    order: list[int] = []
    infeasible = []
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        try:
            if tok[0] == "P":
                cid = int(tok[1])
                if cid in records:
                    raise ValueError(f"duplicate placement for CBS {cid}")
                kv = dict(t.split("=", 1) for t in tok[3:])
                records[cid] = PlacementRecord(cid, int(tok[2]), float(kv["n"]), int(kv["ng"]),
                                               int(kv["na"]), int(kv["nl"]), {})
                order.append(cid)
            elif tok[0] == "R":
                cid, member = int(tok[1]), int(tok[2])
                rest = [int(t) for t in tok[3:]]
                if len(rest) % 2 != 1:
                    raise ValueError("route needs h wavelengths followed by h+1 vertices")
                h = len(rest) // 2
                records[cid].routes[member] = (tuple(rest[h:]), tuple(rest[:h]))
            elif tok[0] == "X":
                infeasible.append(int(tok[1]))
            else:
                raise ValueError(f"unknown record type {tok[0]!r}")
        except (IndexError, KeyError, ValueError) as exc:
            raise ValueError(f"line {lineno}: {exc}") from exc
    return [records[c] for c in order], infeasible
