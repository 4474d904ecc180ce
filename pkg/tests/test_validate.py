import dataclasses

import pytest

from backhaul.placement import CostWeights, PlacementRecord, run_heuristic
from backhaul.scenario import ScenarioParams, generate_scenario
from backhaul.topology import BackhaulGraph, Vertex, allocate_path
from backhaul.validate import record_of, validate_placements
from conftest import cbs, line_graph


@pytest.fixture
def run():
    s = generate_scenario(ScenarioParams(grid_side=4, cbs_count=10, demand=1.25, seed=4))
    g = s.graph.copy()
    placements, infeasible = run_heuristic(g, s.cbs)
    assert placements
    return s, g, [record_of(p) for p in placements], infeasible


def multi_hop(records):
    return next(r for r in records if any(len(p) > 2 for p, _ in r.routes.values()))


def test_clean_run(run):
    s, g, records, infeasible = run
    assert validate_placements(s.graph, s.cbs, records, infeasible, final=g) == []


def test_partition_errors(run):
    s, g, records, infeasible = run
    errs = validate_placements(s.graph, s.cbs, records[1:], infeasible)
    assert any("partition" in e for e in errs)
    errs = validate_placements(s.graph, s.cbs, records + records[:1], infeasible)
    assert any("more than once" in e for e in errs)


def test_cost_mismatch(run):
    s, g, records, infeasible = run
    records[0] = dataclasses.replace(records[0], n=records[0].n + 1)
    errs = validate_placements(s.graph, s.cbs, records, infeasible)
    assert any("weighted sum" in e for e in errs)
    records[0] = dataclasses.replace(records[0], n_a=99)
    errs = validate_placements(s.graph, s.cbs, records, infeasible)
    assert any("recomputed" in e for e in errs)


def test_weights_matter(run):
    s, g, records, infeasible = run
    errs = validate_placements(s.graph, s.cbs, records, infeasible, CostWeights(2, 1, 1))
    assert any("weighted sum" in e for e in errs)


def test_rtt_violation(run):
    s, g, records, infeasible = run
    target = next(r for r in records if any(len(p) > 1 for p, _ in r.routes.values()))
    W = [dataclasses.replace(c, rtt_budget=1e-9) if c.id == target.cbs_id else c for c in s.cbs]
    errs = validate_placements(s.graph, W, records, infeasible)
    assert any("round trip" in e for e in errs)


def test_bad_wavelength_and_missing_link(run):
    s, g, records, infeasible = run
    rec = multi_hop(records)
    member, (path, wls) = next((m, pw) for m, pw in rec.routes.items() if len(pw[0]) > 2)
    rec.routes[member] = (path, (9,) + wls[1:])
    errs = validate_placements(s.graph, s.cbs, records, infeasible)
    assert any("out of range" in e for e in errs)
    rec.routes[member] = ((path[0], path[-1] + 100) + path[2:], wls)
    errs = validate_placements(s.graph, s.cbs, records, infeasible)
    assert errs


def test_not_a_tree():
    # two members whose paths split and rejoin: 0-1-3 and 0-2-3-4
    verts = [Vertex(i, 0, 0) for i in range(5)]
    g = BackhaulGraph(verts, [(0, 1, 1000.0), (0, 2, 1000.0), (1, 3, 1000.0), (2, 3, 1000.0),
                              (3, 4, 1000.0)])
    W = [cbs(0, [3, 4])]
    rec = PlacementRecord(0, 0, 15, 5, 5, 5, {3: ((0, 1, 3), (0, 0)), 4: ((0, 2, 3, 4), (0, 0, 0))})
    errs = validate_placements(g, W, [rec])
    assert any("not a tree" in e for e in errs)


def test_capacity_overflow():
    g = line_graph(3, K=1)
    W = [cbs(0, [0, 1], demand=2.5), cbs(1, [0, 1], demand=2.5)]
    recs = [PlacementRecord(i, 0, 3 - 2 * i, 1, 1 - i, 1, {0: ((0,), ()), 1: ((0, 1), (0,))})
            for i in range(2)]
    errs = validate_placements(g, W, recs)
    assert any("carries" in e for e in errs)


def test_atomicity_leak(run):
    s, g, records, infeasible = run
    allocate_path(g, [g.links[0].u, g.links[0].v], [g.K - 1], 0.625)
    errs = validate_placements(s.graph, s.cbs, records, infeasible, final=g)
    assert any("graph state" in e for e in errs)


def test_route_endpoints(run):
    s, g, records, infeasible = run
    rec = records[0]
    member = next(iter(rec.routes))
    path, wls = rec.routes[member]
    rec.routes[member] = (path[::-1] if len(path) > 1 else (path[0] + 1,), wls)
    errs = validate_placements(s.graph, s.cbs, records, infeasible)
    assert any("controller->member" in e for e in errs)


def test_initial_state_untouched(run):
    s, g, records, infeasible = run
    before = s.graph.allocation_snapshot()
    validate_placements(s.graph, s.cbs, records, infeasible, final=g)
    assert s.graph.allocation_snapshot() == before
