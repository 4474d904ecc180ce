"""Seeded generation of grid-based backhaul scenarios with CBS hotspots.

Random draws come from a single ``numpy.random.Generator`` seeded with
``ScenarioParams.seed`` and are consumed in a fixed order: BS jitter, hotspot
center, hotspot CBS centers, uniform CBS centers, CBS order shuffle.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .config import ConfigError, read_flat_config
from .topology import (
    BackhaulGraph,
    Vertex,
    format_number,
    graph_lines,
    link_latency,
    parse_graph_lines,
    to_gbps,
    to_units,
)

DEFAULT_RTT_BUDGET = 5e-4


@dataclass
class ScenarioParams:
    grid_side: int = 10
    mean_spacing: float = 1000.0
    jitter_sigma: float | None = None  # default mean_spacing / 8
    mesh_factor: float = 1.5
    K: int = 4
    wavelength_capacity: float = 2.5
    cbs_count: int = 10
    hotspot_fraction: float = 0.0
    hotspot_sigma: float | None = None  # default mean_spacing / 4
    cbs_radius_factor: float = 1.5
    demand: float = 1.25
    rtt_budget: float = DEFAULT_RTT_BUDGET
    seed: int = 0

    def __post_init__(self):
        if self.jitter_sigma is None:
            self.jitter_sigma = self.mean_spacing / 8
        if self.hotspot_sigma is None:
            self.hotspot_sigma = self.mean_spacing / 4
        if self.grid_side < 1:
            raise ValueError("grid_side must be >= 1")
        if not 0.0 <= self.hotspot_fraction <= 1.0:
            raise ValueError("hotspot_fraction must lie in [0, 1]")
        for name in ("mean_spacing", "mesh_factor", "wavelength_capacity",
                     "cbs_radius_factor", "demand", "rtt_budget"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.jitter_sigma < 0 or self.hotspot_sigma < 0:
            raise ValueError("standard deviations must be non-negative")
        if self.K < 1 or self.cbs_count < 0:
            raise ValueError("K must be >= 1 and cbs_count >= 0")
        to_units(self.demand)
        to_units(self.wavelength_capacity)

    @classmethod
    def from_mapping(cls, values: dict[str, str]) -> "ScenarioParams":
        kinds = {f.name: f.type for f in fields(cls)}
        kwargs = {}
        for key, raw in values.items():
            if key not in kinds:
                continue
            kind = kinds[key]
            try:
                if kind == "int":
                    kwargs[key] = int(raw)
                else:
                    kwargs[key] = float(raw)
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {raw!r}") from exc
        try:
            return cls(**kwargs)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_file(cls, path: str | Path) -> "ScenarioParams":
        values = read_flat_config(path)
        unknown = set(values) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigError(f"unknown scenario keys: {', '.join(sorted(unknown))}")
        return cls.from_mapping(values)

    def as_lines(self) -> list[str]:
        return [f"{f.name} = {getattr(self, f.name)}" for f in fields(self)]


@dataclass(frozen=True)
class CBSSpec:
    """A desired coordinated base-station set."""

    id: int
    members: tuple[int, ...]
    demand_per_bs: float
    rtt_budget: float
    is_hotspot_generated: bool = False
    demand_units: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        members = tuple(sorted(set(int(m) for m in self.members)))
        if not members:
            raise ValueError(f"CBS {self.id} has no members")
        if self.rtt_budget <= 0:
            raise ValueError(f"CBS {self.id}: rtt_budget must be positive")
        units = to_units(self.demand_per_bs)
        if units <= 0:
            raise ValueError(f"CBS {self.id}: demand must be positive")
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "demand_units", units)
        object.__setattr__(self, "demand_per_bs", to_gbps(units))


def place_base_stations(params: ScenarioParams, rng: np.random.Generator | None = None) -> list[Vertex]:
    if rng is None:
        rng = np.random.default_rng(params.seed)
    g, s = params.grid_side, params.mean_spacing
    jitter = rng.normal(0.0, params.jitter_sigma, size=(g * g, 2))
    vertices = []
    for i in range(g):
        for j in range(g):
            vid = i * g + j
            dx, dy = jitter[vid]
            vertices.append(Vertex(vid, i * s + float(dx), j * s + float(dy)))
    return vertices


def generate_mesh(vertices: Sequence[Vertex], params: ScenarioParams) -> BackhaulGraph:
    """Link every pair of BSs at most ``mesh_factor * mean_spacing`` apart."""
    reach = params.mesh_factor * params.mean_spacing
    links = []
    for a in range(len(vertices)):
        va = vertices[a]
        for b in range(a + 1, len(vertices)):
            vb = vertices[b]
            d = math.hypot(va.x - vb.x, va.y - vb.y)
            if d <= reach:
                links.append((a, b, d, link_latency(d)))
    return BackhaulGraph(vertices, links, K=params.K, capacity_gbps=params.wavelength_capacity)


def _members_within(xy: np.ndarray, center: np.ndarray, radius: float) -> tuple[int, ...]:
    d = np.hypot(xy[:, 0] - center[0], xy[:, 1] - center[1])
    return tuple(int(i) for i in np.flatnonzero(d <= radius))


def generate_cbs_set(
    graph: BackhaulGraph, params: ScenarioParams, rng: np.random.Generator | None = None
) -> list[CBSSpec]:
    if graph.num_vertices == 0:
        raise ValueError("graph has no vertices")
    if rng is None:
        rng = np.random.default_rng(params.seed)
    xy = np.array([[v.x, v.y] for v in graph.vertices], dtype=float)
    low, high = xy.min(axis=0), xy.max(axis=0)
    radius = params.cbs_radius_factor * params.mean_spacing
    hotspot = rng.uniform(low, high)

    n_hot = int(round(params.hotspot_fraction * params.cbs_count))
    drawn: list[tuple[tuple[int, ...], bool]] = []
    for k in range(params.cbs_count):
        is_hot = k < n_hot
        while True:
            if is_hot:
                center = rng.normal(hotspot, params.hotspot_sigma)
            else:
                center = rng.uniform(low, high)
            members = _members_within(xy, center, radius)
            if members:
                break
        drawn.append((members, is_hot))

    order = rng.permutation(len(drawn)) if drawn else []
    return [
        CBSSpec(i, drawn[k][0], params.demand, params.rtt_budget, drawn[k][1])
        for i, k in enumerate(order)
    ]


@dataclass
class Scenario:
    graph: BackhaulGraph
    cbs: list[CBSSpec]
    params: ScenarioParams | None = None

    def digest(self) -> str:
        """Short content hash of the topology and the CBS list."""
        h = hashlib.sha256()
        for line in scenario_lines(self):
            h.update(line.encode())
            h.update(b"\n")
        return h.hexdigest()[:16]


def generate_scenario(params: ScenarioParams) -> Scenario:
    rng = np.random.default_rng(params.seed)
    vertices = place_base_stations(params, rng)
    graph = generate_mesh(vertices, params)
    cbs = generate_cbs_set(graph, params, rng)
    return Scenario(graph, cbs, params)


# ----------------------------------------------------------------------
# scenario text format: topology records plus
# "C <cbs_id> <demand> <rtt_budget> <member ids...>"

def scenario_lines(scenario: Scenario) -> list[str]:
    lines = graph_lines(scenario.graph)
    for c in scenario.cbs:
        members = " ".join(str(m) for m in c.members)
        lines.append(f"C {c.id} {format_number(c.demand_per_bs)} {repr(float(c.rtt_budget))} {members}")
    return lines


def scenario_text(scenario: Scenario) -> str:
    header = []
    if scenario.params is not None:
        header = ["# " + line for line in scenario.params.as_lines()]
    return "\n".join(header + scenario_lines(scenario)) + "\n"


def write_scenario(scenario: Scenario, path: str | Path) -> None:
    Path(path).write_text(scenario_text(scenario))


def parse_scenario_lines(lines: Iterable[str]) -> Scenario:
    graph, other = parse_graph_lines(lines)
    cbs = []
    seen = set()
    for tok in other:
        if tok[0] != "C":
            raise ValueError(f"unknown record type {tok[0]!r}")
        if len(tok) < 5:
            raise ValueError("expected C <cbs_id> <demand> <rtt_budget> <member ids...>")
        cid = int(tok[1])
        if cid in seen:
            raise ValueError(f"duplicate CBS id {cid}")
        seen.add(cid)
        members = tuple(int(t) for t in tok[4:])
        for m in members:
            if not 0 <= m < graph.num_vertices:
                raise ValueError(f"CBS {cid} references unknown vertex {m}")
        cbs.append(CBSSpec(cid, members, tok[2], float(tok[3])))
    return Scenario(graph, cbs)


def read_scenario(path: str | Path) -> Scenario:
    return parse_scenario_lines(Path(path).read_text().splitlines())
