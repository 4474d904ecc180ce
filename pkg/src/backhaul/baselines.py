"""Comparison variants and an exhaustive oracle for small instances."""
from __future__ import annotations

import csv
import heapq
import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .placement import (
    Cost,
    CostWeights,
    Placement,
    Route,
    WavelengthAssignment,
    run_heuristic,
)
from .prioritization import PrioritizationThresholds
from .scenario import CBSSpec
from .topology import BackhaulGraph, to_gbps

ORACLE_MAX_VERTICES = 10
ORACLE_MAX_K = 3
ORACLE_MAX_MEMBERS = 4


class InstanceTooLarge(ValueError):
    pass


def central_vertex(graph: BackhaulGraph) -> int:
    """Vertex nearest the centroid of all BS positions (lowest id on ties)."""
    if graph.num_vertices == 0:
        raise ValueError("graph has no vertices")
    cx = sum(v.x for v in graph.vertices) / graph.num_vertices
    cy = sum(v.y for v in graph.vertices) / graph.num_vertices
    return min(graph.vertices, key=lambda v: (math.hypot(v.x - cx, v.y - cy), v.id)).id


def static_reconfiguration(
    graph: BackhaulGraph,
    W: Sequence[CBSSpec],
    fixed_root: int,
    thresholds: PrioritizationThresholds | None = PrioritizationThresholds(),
    weights: CostWeights = CostWeights(),
) -> tuple[list[Placement], list[int]]:
    """The heuristic with every CBS forced onto one controller vertex."""
    if not 0 <= fixed_root < graph.num_vertices:
        raise ValueError(f"fixed_root {fixed_root} is not a vertex")
    return run_heuristic(graph, W, thresholds, weights, roots=[fixed_root])


# ----------------------------------------------------------------------
# static backhaul: fixed controller, shortest paths, one wavelength, no admission

@dataclass
class OversubscriptionReport:
    capacity_units: int
    load: dict[tuple[int, int], int] = field(default_factory=dict)  # (link, wavelength) -> units
    delivered_fraction: dict[int, float] = field(default_factory=dict)
    undeliverable: list[tuple[int, int]] = field(default_factory=list)  # (cbs id, member)
    a_priori_feasibility: float = 1.0

    def excess_units(self, key: tuple[int, int]) -> int:
        return max(0, self.load[key] - self.capacity_units)

    @property
    def aggregate_excess(self) -> float:
        return to_gbps(sum(self.excess_units(k) for k in self.load))

    @property
    def oversubscribed_pairs(self) -> int:
        return sum(1 for k in self.load if self.excess_units(k) > 0)

    @property
    def offered_total(self) -> float:
        return to_gbps(sum(self.load.values()))

    @property
    def delivered_total(self) -> float:
        return to_gbps(sum(min(v, self.capacity_units) for v in self.load.values()))


def shortest_latency_paths(graph: BackhaulGraph, source: int) -> dict[int, tuple[int, ...]]:
    """Latency-shortest paths from ``source``; ties go to the lexicographically smallest path."""
    best: dict[int, tuple[int, ...]] = {}
    heap = [(0.0, (source,))]
    while heap:
        d, path = heapq.heappop(heap)
        v = path[-1]
        if v in best:
            continue
        best[v] = path
        for w, lid in graph.adjacency[v]:
            if w not in best:
                heapq.heappush(heap, (d + graph.latencies[lid], path + (w,)))
    return best


def static_backhaul(graph: BackhaulGraph, W: Sequence[CBSSpec], fixed_root: int,
                    static_wavelength: int = 0) -> OversubscriptionReport:
    if not 0 <= fixed_root < graph.num_vertices:
        raise ValueError(f"fixed_root {fixed_root} is not a vertex")
    if not 0 <= static_wavelength < graph.K:
        raise ValueError(f"static wavelength {static_wavelength} out of range")
    paths = shortest_latency_paths(graph, fixed_root)
    report = OversubscriptionReport(graph.capacity)
    cbs_pairs: dict[int, set[tuple[int, int]]] = {}
    cut: set[int] = set()
    for cbs in W:
        used = cbs_pairs.setdefault(cbs.id, set())
        for m in cbs.members:
            path = paths.get(m)
            if path is None:
                report.undeliverable.append((cbs.id, m))
                cut.add(cbs.id)
                continue
            for a, b in zip(path, path[1:]):
                key = (graph.link_id(a, b), static_wavelength)
                report.load[key] = report.load.get(key, 0) + cbs.demand_units
                used.add(key)
    for cbs in W:
        if cbs.id in cut:
            report.delivered_fraction[cbs.id] = 0.0
            continue
        share = 1.0
        for key in cbs_pairs[cbs.id]:
            load = report.load[key]
            if load > report.capacity_units:
                share = min(share, report.capacity_units / load)
        report.delivered_fraction[cbs.id] = share
    return report


def write_report_csv(graph: BackhaulGraph, report: OversubscriptionReport,
                     links_path: str | Path, cbs_path: str | Path) -> None:
    cap = to_gbps(report.capacity_units)
    with open(links_path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["link_u", "link_v", "wavelength", "offered_gbps", "capacity_gbps", "excess_gbps"])
        for (lid, w) in sorted(report.load):
            link = graph.links[lid]
            out.writerow([min(link.u, link.v), max(link.u, link.v), w,
                          f"{to_gbps(report.load[(lid, w)]):.4f}", f"{cap:.4f}",
                          f"{to_gbps(report.excess_units((lid, w))):.4f}"])
    with open(cbs_path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["cbs_id", "delivered_fraction"])
        for cid in sorted(report.delivered_fraction):
            out.writerow([cid, f"{report.delivered_fraction[cid]:.4f}"])


# ----------------------------------------------------------------------
# exhaustive oracle

def _simple_paths(graph: BackhaulGraph, root: int, target: int, max_hops: int):
    """Simple paths root -> target with at most ``max_hops`` links, in lexicographic order."""
    if root == target:
        yield (root,), ()
        return
    path, links, on_path = [root], [], {root}

    def extend():
        u = path[-1]
        for v, lid in graph.adjacency[u]:
            if v in on_path:
                continue
            if v == target:
                yield tuple(path) + (v,), tuple(links) + (lid,)
                continue
            if len(links) + 1 < max_hops:
                path.append(v)
                links.append(lid)
                on_path.add(v)
                yield from extend()
                on_path.discard(v)
                links.pop()
                path.pop()

    yield from extend()


def _route_paths(graph: BackhaulGraph, root: int, cbs: CBSSpec, member: int, max_hops: int):
    """Candidate paths for one member with per-hop usable wavelengths, shortest first."""
    need = cbs.demand_units
    cap = graph.capacity
    alloc = graph._alloc
    out = []
    for path, links in _simple_paths(graph, root, member, max_hops):
        if 2 * sum(graph.latencies[l] for l in links) > cbs.rtt_budget:
            continue
        per_hop = [[w for w in range(graph.K) if alloc[l][w] + need <= cap] for l in links]
        if all(per_hop):
            out.append((path, links, per_hop))
    out.sort(key=lambda o: (len(o[1]), o[0]))
    return out


def brute_force_feasible(graph: BackhaulGraph, cbs: CBSSpec, max_path_hops: int | None = None,
                         weights: CostWeights = CostWeights()) -> Placement | None:
    """Exhaustive search over controller, routes and per-hop wavelengths.

    Accepts any combination of simple paths (at most ``max_path_hops`` links)
    whose joint load fits every wavelength and whose round trips fit the
    budget. Returns the minimum-cost combination; ties go to the lowest root,
    then to the lexicographically smallest (path, wavelengths) per member in
    ascending member order. The graph is not modified.

    Branch and bound only discards partial combinations that provably cannot
    beat the incumbent under that ordering, so the result is exact.
    """
    n = graph.num_vertices
    if n > ORACLE_MAX_VERTICES or graph.K > ORACLE_MAX_K or len(cbs.members) > ORACLE_MAX_MEMBERS:
        raise InstanceTooLarge(
            f"oracle limited to |V|<={ORACLE_MAX_VERTICES}, K<={ORACLE_MAX_K}, "
            f"members<={ORACLE_MAX_MEMBERS}; got {n}, {graph.K}, {len(cbs.members)}"
        )
    if max_path_hops is None:
        max_path_hops = max(n - 1, 0)
    need, cap, alloc = cbs.demand_units, graph.capacity, graph._alloc
    members = cbs.members
    hops = graph.hop_distances()
    # incumbent: (n, root, routes) with routes a tuple of (path, labels, links)
    best: list = [None]

    def better(key_n, root, prefix) -> bool:
        """Could a combination starting with ``prefix`` still beat the incumbent?"""
        inc = best[0]
        if inc is None or key_n < inc[0]:
            return True
        if key_n > inc[0] or root > inc[1]:
            return False
        if root < inc[1]:
            return True
        inc_prefix = [(r[0], r[1]) for r in inc[2][:len(prefix)]]
        return [(p[0], p[1]) for p in prefix] < inc_prefix

    # visiting promising roots first tightens the bound sooner; ties use ids
    reachable = [r for r in range(n) if all(hops[r][m] >= 0 for m in members)]
    reachable.sort(key=lambda r: (sum(hops[r][m] for m in members), r))
    for root in reachable:
        options = [_route_paths(graph, root, cbs, m, max_path_hops) for m in members]
        if any(not o for o in options):
            continue
        load: dict[tuple[int, int], int] = {}
        links_used: dict[int, int] = {}
        chosen: list = []

        def cost_now() -> float:
            n_g = len(load)
            n_a = sum(1 for (l, w) in load if alloc[l][w] == 0)
            return weights.total(n_g, n_a, len(links_used))

        def search(i: int) -> None:
            if not better(cost_now(), root, chosen):
                return
            if i == len(members):
                best[0] = (cost_now(), root, tuple(chosen))
                return
            for path, links, per_hop in options[i]:
                # a simple path of h links alone costs at least the h links it uses
                if best[0] is not None and weights.total(len(links), 0, len(links)) > best[0][0]:
                    break
                for labels in itertools.product(*per_hop):
                    added = []
                    ok = True
                    for l, w in zip(links, labels):
                        key = (l, w)
                        new = load.get(key, 0) + need
                        if alloc[l][w] + new > cap:
                            ok = False
                            break
                        load[key] = new
                        links_used[l] = links_used.get(l, 0) + 1
                        added.append(key)
                    if ok:
                        chosen.append((path, labels, links))
                        search(i + 1)
                        chosen.pop()
                    for key in added:
                        load[key] -= need
                        if load[key] == 0:
                            del load[key]
                        links_used[key[0]] -= 1
                        if links_used[key[0]] == 0:
                            del links_used[key[0]]

        search(0)

    if best[0] is None:
        return None
    _, root, chosen = best[0]
    routes = tuple(Route(m, path, tuple(labels), tuple(links))
                   for m, (path, labels, links) in zip(members, chosen))
    assignment = WavelengthAssignment(root, routes)
    pairs = assignment.pairs()
    n_g = len(pairs)
    n_a = sum(1 for l, w in pairs if alloc[l][w] == 0)
    n_l = len({l for l, _ in pairs})
    return Placement(cbs.id, root, assignment, Cost(weights.total(n_g, n_a, n_l), n_g, n_a, n_l))
