import math

import pytest

from backhaul.scenario import CBSSpec
from backhaul.topology import BackhaulGraph, Vertex


def line_graph(n, spacing=1000.0, K=4, capacity=2.5):
    verts = [Vertex(i, i * spacing, 0.0) for i in range(n)]
    links = [(i, i + 1, spacing) for i in range(n - 1)]
    return BackhaulGraph(verts, links, K=K, capacity_gbps=capacity)


def triangle(K=4, capacity=2.5):
    verts = [Vertex(0, 0.0, 0.0), Vertex(1, 1000.0, 0.0), Vertex(2, 500.0, 500.0 * math.sqrt(3))]
    links = [(0, 1, 1000.0), (0, 2, 1000.0), (1, 2, 1000.0)]
    return BackhaulGraph(verts, links, K=K, capacity_gbps=capacity)


def cbs(cid, members, demand=1.25, budget=5e-4):
    return CBSSpec(cid, tuple(members), demand, budget)


@pytest.fixture
def tri():
    return triangle()


def random_instance(seed, max_vertices=8, K=2, max_cbs=3, max_members=4):
    """Small random geometric instance with mixed demands and budgets."""
    import random

    rng = random.Random(seed)
    n = rng.randint(2, max_vertices)
    side = rng.choice([1500, 2500, 3500])
    verts = [Vertex(i, rng.uniform(0, side), rng.uniform(0, side)) for i in range(n)]
    links = []
    for a in range(n):
        for b in range(a + 1, n):
            d = math.hypot(verts[a].x - verts[b].x, verts[a].y - verts[b].y)
            if d <= 1500:
                links.append((a, b, d))
    g = BackhaulGraph(verts, links, K=K, capacity_gbps=2.5)
    W = []
    for c in range(rng.randint(1, max_cbs)):
        k = rng.randint(1, min(max_members, n))
        W.append(CBSSpec(c, tuple(rng.sample(range(n), k)), rng.choice([0.625, 1.25, 2.5]),
                         rng.choice([5e-4, 3e-5, 1.5e-5])))
    return g, W


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
