"""Split desired CBSs into hotspot and normal classes before placement."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .scenario import CBSSpec


@dataclass(frozen=True)
class PrioritizationThresholds:
    t_v: float = 0.1
    t_h: float = 0.9

    def __post_init__(self):
        if self.t_v < 0:
            raise ValueError("t_v must be >= 0")
        if not 0.0 <= self.t_h <= 1.0:
            raise ValueError("t_h must lie in [0, 1]")


@dataclass(frozen=True)
class PrioritizedWork:
    hotspot: tuple[CBSSpec, ...]
    normal: tuple[CBSSpec, ...]

    def ordered(self) -> list[CBSSpec]:
        return list(self.hotspot) + list(self.normal)


def vertex_presence_counts(W: Sequence[CBSSpec], vertex_count: int) -> list[int]:
    """Number of CBSs each vertex belongs to."""
    counts = [0] * vertex_count
    for cbs in W:
        for v in cbs.members:
            counts[v] += 1
    return counts


def hotspot_vertices(counts: Sequence[int], cbs_total: int, t_v: float) -> set[int]:
    limit = cbs_total * t_v
    return {v for v, h in enumerate(counts) if h > limit}


def prioritize(W: Sequence[CBSSpec], V_h: set[int], t_h: float) -> PrioritizedWork:
    hot, normal = [], []
    for cbs in W:
        inside = sum(1 for v in cbs.members if v in V_h)
        (hot if inside / len(cbs.members) >= t_h else normal).append(cbs)
    return PrioritizedWork(tuple(hot), tuple(normal))


def prioritize_cbs(
    W: Sequence[CBSSpec], vertex_count: int, thresholds: PrioritizationThresholds
) -> PrioritizedWork:
    counts = vertex_presence_counts(W, vertex_count)
    V_h = hotspot_vertices(counts, len(W), thresholds.t_v)
    return prioritize(W, V_h, thresholds.t_h)
