"""Annotated backhaul graph with per-link WDM wavelength bookkeeping.

Capacities and demands are kept as integers in units of 1/16 Gb/s so that
admission checks are exact. Latencies are float seconds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

SPEED_OF_LIGHT = 299_792_458.0  # m/s
REFRACTIVE_FACTOR = 1.45
UNITS_PER_GBPS = 16

DEFAULT_K = 4
DEFAULT_CAPACITY_GBPS = 2.5


class CapacityError(Exception):
    """Raised when an allocation would exceed a wavelength's capacity."""

    def __init__(self, message: str, hop: tuple[int, int] | None = None):
        super().__init__(message)
        self.hop = hop


def to_units(gbps) -> int:
    """Convert a Gb/s value to integer 1/16 Gb/s units, refusing inexact values."""
    value = Fraction(gbps) if not isinstance(gbps, str) else Fraction(gbps.strip())
    scaled = value * UNITS_PER_GBPS
    if scaled.denominator != 1:
        raise ValueError(f"{gbps} Gb/s is not a multiple of 1/{UNITS_PER_GBPS} Gb/s")
    return int(scaled)


def to_gbps(units: int) -> float:
    return units / UNITS_PER_GBPS


def link_latency(length: float) -> float:
    """One-way propagation latency in seconds of a fiber of ``length`` meters."""
    if length < 0:
        raise ValueError(f"link length must be >= 0, got {length}")
    return length * REFRACTIVE_FACTOR / SPEED_OF_LIGHT


@dataclass(frozen=True)
class Vertex:
    id: int
    x: float
    y: float

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class Link:
    id: int
    u: int
    v: int
    length: float
    latency: float

    @property
    def endpoints(self) -> tuple[int, int]:
        return (self.u, self.v)

    def other(self, vertex: int) -> int:
        return self.v if vertex == self.u else self.u


@dataclass(frozen=True)
class WavelengthState:
    index: int
    capacity: float
    allocated: float

    @property
    def active(self) -> bool:
        return self.allocated > 0


class BackhaulGraph:
    """Undirected graph of base stations and fiber links.

    Topology (vertices, links, adjacency) is immutable after construction and
    shared between copies; only the allocation table is per instance.
    """

    def __init__(
        self,
        vertices: Sequence[Vertex],
        links: Iterable[tuple[int, int, float] | tuple[int, int, float, float]],
        K: int = DEFAULT_K,
        capacity_gbps=DEFAULT_CAPACITY_GBPS,
    ):
        if K < 1:
            raise ValueError("K must be >= 1")
        self.vertices: tuple[Vertex, ...] = tuple(vertices)
        for i, vert in enumerate(self.vertices):
            if vert.id != i:
                raise ValueError(f"vertex ids must be contiguous from 0; got {vert.id} at position {i}")
        n = len(self.vertices)
        self.K = K
        self.capacity = to_units(capacity_gbps)
        if self.capacity <= 0:
            raise ValueError("wavelength capacity must be positive")

        built: list[Link] = []
        self._link_index: dict[tuple[int, int], int] = {}
        for spec in links:
            u, v, length = int(spec[0]), int(spec[1]), float(spec[2])
            latency = float(spec[3]) if len(spec) > 3 else link_latency(length)
            if u == v:
                raise ValueError(f"self-loop on vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"link ({u}, {v}) references an unknown vertex")
            if length <= 0:
                raise ValueError(f"link ({u}, {v}) must have positive length")
            if latency < 0:
                raise ValueError(f"link ({u}, {v}) has negative latency")
            key = (min(u, v), max(u, v))
            if key in self._link_index:
                raise ValueError(f"duplicate link {key}")
            self._link_index[key] = len(built)
            built.append(Link(len(built), u, v, length, latency))
        self.links: tuple[Link, ...] = tuple(built)

        adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for link in self.links:
            adj[link.u].append((link.v, link.id))
            adj[link.v].append((link.u, link.id))
        # ascending neighbor id: BFS exploration order depends on it
        self.adjacency: tuple[tuple[tuple[int, int], ...], ...] = tuple(
            tuple(sorted(a)) for a in adj
        )
        self.latencies: tuple[float, ...] = tuple(l.latency for l in self.links)
        self._alloc: list[list[int]] = [[0] * K for _ in self.links]
        # topology-derived caches, shared by copies
        self._static: dict = {}

    # ------------------------------------------------------------------
    # structure

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_links(self) -> int:
        return len(self.links)

    def link_id(self, u: int, v: int) -> int:
        try:
            return self._link_index[(min(u, v), max(u, v))]
        except KeyError:
            raise ValueError(f"no link between {u} and {v}") from None

    def has_link(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self._link_index

    def hop_distances(self) -> list[list[int]]:
        """All-pairs unweighted hop counts; -1 marks unreachable pairs. Cached."""
        if "hops" not in self._static:
            n = self.num_vertices
            table = []
            for src in range(n):
                dist = [-1] * n
                dist[src] = 0
                frontier = [src]
                while frontier:
                    nxt = []
                    for u in frontier:
                        for v, _ in self.adjacency[u]:
                            if dist[v] < 0:
                                dist[v] = dist[u] + 1
                                nxt.append(v)
                    frontier = nxt
                table.append(dist)
            self._static["hops"] = table
        return self._static["hops"]

    def copy(self) -> "BackhaulGraph":
        clone = object.__new__(BackhaulGraph)
        clone.__dict__.update(self.__dict__)
        clone._alloc = [row[:] for row in self._alloc]
        return clone

    # ------------------------------------------------------------------
    # capacity state

    def _check_wavelength(self, w: int) -> None:
        if not 0 <= w < self.K:
            raise ValueError(f"wavelength index {w} out of range [0, {self.K})")

    def allocated_units(self, link_id: int, w: int) -> int:
        self._check_wavelength(w)
        return self._alloc[link_id][w]

    def residual_units(self, link_id: int, w: int) -> int:
        self._check_wavelength(w)
        return self.capacity - self._alloc[link_id][w]

    def residual(self, link_id: int, w: int) -> float:
        """Free capacity in Gb/s of wavelength ``w`` on a link."""
        return to_gbps(self.residual_units(link_id, w))

    def max_residual_units(self) -> list[int]:
        cap = self.capacity
        return [cap - min(row) for row in self._alloc]

    def is_active(self, link_id: int, w: int) -> bool:
        return self._alloc[link_id][w] > 0

    def wavelengths(self, link_id: int) -> tuple[WavelengthState, ...]:
        cap = to_gbps(self.capacity)
        return tuple(
            WavelengthState(w, cap, to_gbps(a)) for w, a in enumerate(self._alloc[link_id])
        )

    def allocation_snapshot(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(row) for row in self._alloc)

    def active_pairs(self) -> int:
        return sum(1 for row in self._alloc for a in row if a > 0)

    def active_per_link(self) -> list[int]:
        return [sum(1 for a in row if a > 0) for row in self._alloc]

    def _path_hops(self, path: Sequence[int], assignment: Sequence[int]) -> list[tuple[int, int]]:
        if len(assignment) != max(len(path) - 1, 0):
            raise ValueError("assignment needs exactly one wavelength per hop")
        hops = []
        for (a, b), w in zip(zip(path, path[1:]), assignment):
            self._check_wavelength(w)
            hops.append((self.link_id(a, b), w))
        return hops

    def allocate_path(self, path: Sequence[int], assignment: Sequence[int], demand) -> None:
        """Add ``demand`` Gb/s on every (hop, wavelength) of ``path``; all or nothing."""
        units = demand if isinstance(demand, int) else to_units(demand)
        if units < 0:
            raise ValueError("demand must be non-negative")
        hops = self._path_hops(path, assignment)
        load: dict[tuple[int, int], int] = {}
        for i, key in enumerate(hops):
            load[key] = load.get(key, 0) + units
            lid, w = key
            if self._alloc[lid][w] + load[key] > self.capacity:
                raise CapacityError(
                    f"insufficient residual on hop {path[i]}-{path[i + 1]} wavelength {w}",
                    hop=(path[i], path[i + 1]),
                )
        for lid, w in hops:
            self._alloc[lid][w] += units

    def release_path(self, path: Sequence[int], assignment: Sequence[int], demand) -> None:
        """Inverse of :meth:`allocate_path`."""
        units = demand if isinstance(demand, int) else to_units(demand)
        hops = self._path_hops(path, assignment)
        load: dict[tuple[int, int], int] = {}
        for lid, w in hops:
            load[(lid, w)] = load.get((lid, w), 0) + units
            if self._alloc[lid][w] < load[(lid, w)]:
                raise ValueError("release exceeds current allocation")
        for lid, w in hops:
            self._alloc[lid][w] -= units

    def release_all(self) -> None:
        for row in self._alloc:
            for w in range(self.K):
                row[w] = 0


def residual(graph: BackhaulGraph, link_id: int, w: int) -> float:
    return graph.residual(link_id, w)


def allocate_path(graph: BackhaulGraph, path, assignment, demand) -> None:
    graph.allocate_path(path, assignment, demand)


def release_all(graph: BackhaulGraph) -> None:
    graph.release_all()


# ----------------------------------------------------------------------
# text format: "V <id> <x> <y>", "E <u> <v> <length_m> [latency_s]",
# optional "W <K> <capacity_gbps>", '#' comments

def format_number(x: float) -> str:
    if float(x).is_integer():
        return str(int(x))
    return repr(float(x))


def graph_lines(graph: BackhaulGraph) -> list[str]:
    lines = [f"W {graph.K} {format_number(to_gbps(graph.capacity))}"]
    for vert in graph.vertices:
        lines.append(f"V {vert.id} {repr(float(vert.x))} {repr(float(vert.y))}")
    for link in graph.links:
        lines.append(f"E {link.u} {link.v} {repr(link.length)} {repr(link.latency)}")
    return lines


def parse_graph_lines(lines: Iterable[str]) -> tuple[BackhaulGraph, list[list[str]]]:
    """Parse topology records; returns the graph and any unrecognised records."""
    vertices: dict[int, Vertex] = {}
    edges = []
    K, capacity = DEFAULT_K, DEFAULT_CAPACITY_GBPS
    other: list[list[str]] = []
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        try:
            if tok[0] == "V":
                vid = int(tok[1])
                if vid in vertices:
                    raise ValueError(f"duplicate vertex {vid}")
                vertices[vid] = Vertex(vid, float(tok[2]), float(tok[3]))
            elif tok[0] == "E":
                if len(tok) not in (4, 5):
                    raise ValueError("expected E <id1> <id2> <length_m> [latency_s]")
                edges.append(tuple([int(tok[1]), int(tok[2])] + [float(t) for t in tok[3:]]))
            elif tok[0] == "W":
                K, capacity = int(tok[1]), tok[2]
            else:
                other.append(tok)
        except (IndexError, ValueError) as exc:
            raise ValueError(f"line {lineno}: {exc}") from exc
    ordered = [vertices[i] for i in sorted(vertices)]
    return BackhaulGraph(ordered, edges, K=K, capacity_gbps=capacity), other


def write_graph(graph: BackhaulGraph, path: str | Path) -> None:
    Path(path).write_text("\n".join(graph_lines(graph)) + "\n")


def read_graph(path: str | Path) -> BackhaulGraph:
    graph, _ = parse_graph_lines(Path(path).read_text().splitlines())
    return graph


def euclidean(a: Vertex, b: Vertex) -> float:
    return math.hypot(a.x - b.x, a.y - b.y)
