"""Independent re-check of placement results against the raw topology.

Replays placements in commit order on a fresh copy of the initial graph using
only link endpoints, latencies and capacities; it does not call into the
placement search.
"""
from __future__ import annotations

from typing import Iterable, Sequence

from .placement import CostWeights, Placement, PlacementRecord
from .scenario import CBSSpec
from .topology import BackhaulGraph


def record_of(p: Placement) -> PlacementRecord:
    routes = {r.member: (tuple(r.path), tuple(r.wavelengths)) for r in p.assignment.routes}
    c = p.cost
    return PlacementRecord(p.cbs_id, p.controller, c.n, c.n_g, c.n_a, c.n_l, routes)


def validate_placements(
    initial: BackhaulGraph,
    W: Sequence[CBSSpec],
    placements: Iterable[Placement | PlacementRecord],
    infeasible: Iterable[int] = (),
    weights: CostWeights = CostWeights(),
    final: BackhaulGraph | None = None,
) -> list[str]:
    """Return a list of human-readable violations (empty when everything holds).

    ``initial`` is the graph state before the run; it is not modified. When
    ``final`` is given, its allocation table must equal the replayed one, so
    any state left behind by infeasible attempts is reported.
    """
    records = [record_of(p) if isinstance(p, Placement) else p for p in placements]
    infeasible = list(infeasible)
    by_id = {c.id: c for c in W}
    errors: list[str] = []

    placed_ids = [r.cbs_id for r in records]
    if len(set(placed_ids)) != len(placed_ids):
        errors.append("a CBS is placed more than once")
    if set(placed_ids) & set(infeasible):
        errors.append("a CBS is both placed and infeasible")
    if set(placed_ids) | set(infeasible) != set(by_id) or len(placed_ids) + len(infeasible) != len(by_id):
        errors.append("placements and infeasible ids do not partition the CBS set")

    n = initial.num_vertices
    cap = initial.capacity
    K = initial.K
    # replay table keyed by unordered vertex pair
    load: dict[tuple[int, int, int], int] = {}
    for lid, link in enumerate(initial.links):
        for w in range(K):
            a = initial._alloc[lid][w]
            if a:
                load[(min(link.u, link.v), max(link.u, link.v), w)] = a
    given_latency = {(min(l.u, l.v), max(l.u, l.v)): l.latency for l in initial.links}

    for rec in records:
        tag = f"CBS {rec.cbs_id}"
        cbs = by_id.get(rec.cbs_id)
        if cbs is None:
            errors.append(f"{tag}: unknown CBS")
            continue
        if not 0 <= rec.controller < n:
            errors.append(f"{tag}: controller {rec.controller} is not a vertex")
            continue
        if set(rec.routes) != set(cbs.members):
            errors.append(f"{tag}: routes do not cover exactly the members")
            continue

        parent_of: dict[int, int] = {}
        pairs: set[tuple[int, int, int]] = set()
        ok = True
        for member, (path, wls) in sorted(rec.routes.items()):
            if not path or path[0] != rec.controller or path[-1] != member:
                errors.append(f"{tag}: route for {member} does not run controller->member")
                ok = False
                continue
            if len(wls) != len(path) - 1:
                errors.append(f"{tag}: route for {member} has {len(wls)} wavelengths for {len(path) - 1} hops")
                ok = False
                continue
            if len(set(path)) != len(path):
                errors.append(f"{tag}: route for {member} revisits a vertex")
                ok = False
            one_way = 0.0
            for (a, b), w in zip(zip(path, path[1:]), wls):
                key = (min(a, b), max(a, b))
                if key not in given_latency:
                    errors.append(f"{tag}: route for {member} uses missing link {a}-{b}")
                    ok = False
                    break
                if not 0 <= w < K:
                    errors.append(f"{tag}: wavelength {w} out of range")
                    ok = False
                    break
                one_way += given_latency[key]
                if parent_of.setdefault(b, a) != a:
                    errors.append(f"{tag}: vertex {b} reached from two parents; routes are not a tree")
                    ok = False
                pairs.add(key + (w,))
            if 2 * one_way > cbs.rtt_budget:
                errors.append(f"{tag}: member {member} round trip {2 * one_way:.3e}s exceeds {cbs.rtt_budget:.3e}s")
                ok = False
        if not ok:
            continue

        n_g = len(pairs)
        n_a = sum(1 for p in pairs if load.get(p, 0) == 0)
        n_l = len({p[:2] for p in pairs})
        if (n_g, n_a, n_l) != (rec.n_g, rec.n_a, rec.n_l):
            errors.append(f"{tag}: reported counts {(rec.n_g, rec.n_a, rec.n_l)} != recomputed {(n_g, n_a, n_l)}")
        expected_n = weights.w_g * n_g + weights.w_a * n_a + weights.w_l * n_l
        if abs(rec.n - expected_n) > 1e-9 * max(1.0, abs(expected_n)):
            errors.append(f"{tag}: reported n={rec.n} but weighted sum is {expected_n}")

        for member, (path, wls) in rec.routes.items():
            for (a, b), w in zip(zip(path, path[1:]), wls):
                key = (min(a, b), max(a, b), w)
                load[key] = load.get(key, 0) + cbs.demand_units

    for key, units in sorted(load.items()):
        if units > cap:
            errors.append(f"link {key[0]}-{key[1]} wavelength {key[2]} carries {units}/{cap} units")

    if final is not None:
        for lid, link in enumerate(final.links):
            for w in range(K):
                want = load.get((min(link.u, link.v), max(link.u, link.v), w), 0)
                if final._alloc[lid][w] != want:
                    errors.append(
                        f"graph state on {link.u}-{link.v} wavelength {w} is {final._alloc[lid][w]}, replay gives {want}"
                    )
    return errors
