"""Metric extraction and seeded parameter sweeps with CSV output.

Replication ``r`` of every sweep point uses scenario seed ``base_seed + r``;
numpy's ``default_rng`` expands it through ``SeedSequence``. All variants at a
sweep point run on copies of the same generated scenario.
"""
from __future__ import annotations

import csv
import dataclasses
import time
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from statistics import fmean
from typing import Iterable, Sequence

from . import __version__
from .baselines import central_vertex, static_backhaul, static_reconfiguration
from .config import ConfigError, parse_bool, parse_list, read_flat_config
from .placement import CostWeights, Placement, run_heuristic
from .prioritization import PrioritizationThresholds
from .scenario import CBSSpec, Scenario, ScenarioParams, generate_scenario
from .topology import BackhaulGraph

VARIANTS = ("prioritized", "unprioritized", "static_reconfiguration", "static_backhaul")

CSV_HEADER = [
    "seed", "cbs_count", "demand_gbps", "h", "variant", "prioritized", "feasibility",
    "wl_total", "wl_per_link_mean", "wl_per_link_max", "runtime_s",
]


@dataclass(frozen=True)
class MetricsRow:
    seed: int = 0
    cbs_count: int = 0
    demand: float = 0.0
    h: float = 0.0
    variant: str = "prioritized"
    prioritized: bool = True
    feasibility: float = 1.0
    wavelengths_total: int = 0
    wavelengths_per_link_mean: float = 0.0
    wavelengths_per_link_max: int = 0
    runtime: float = 0.0
    placed: int = 0
    desired: int = 0
    scenario_hash: str = ""

    def csv_fields(self) -> list[str]:
        return [
            str(self.seed), str(self.cbs_count), f"{self.demand:.4f}", f"{self.h:.4f}",
            self.variant, "1" if self.prioritized else "0", f"{self.feasibility:.4f}",
            str(self.wavelengths_total), f"{self.wavelengths_per_link_mean:.4f}",
            str(self.wavelengths_per_link_max), f"{self.runtime:.3f}",
        ]


def evaluate(graph: BackhaulGraph, W: Sequence[CBSSpec], placements: Sequence[Placement],
             infeasible: Sequence[int]) -> MetricsRow:
    """Feasibility and wavelength usage after a run, read from the graph's activity flags."""
    if len(placements) + len(infeasible) != len(W):
        raise ValueError("placements and infeasible ids must partition W")
    per_link = graph.active_per_link()
    total = sum(per_link)
    return MetricsRow(
        feasibility=len(placements) / len(W) if W else 1.0,
        wavelengths_total=total,
        wavelengths_per_link_mean=total / len(per_link) if per_link else 0.0,
        wavelengths_per_link_max=max(per_link, default=0),
        placed=len(placements),
        desired=len(W),
    )


@dataclass
class ExperimentConfig:
    scenario: ScenarioParams = field(default_factory=ScenarioParams)
    cbs_counts: list[int] = field(default_factory=lambda: list(range(10, 101, 10)))
    demands: list[float] = field(default_factory=lambda: [0.625, 1.25, 2.5])
    hotspot_fractions: list[float] = field(default_factory=lambda: [0.0])
    variants: list[str] = field(default_factory=lambda: ["prioritized", "unprioritized"])
    replications: int = 20
    base_seed: int = 1
    output: Path | None = None
    thresholds: PrioritizationThresholds = field(default_factory=PrioritizationThresholds)
    weights: CostWeights = field(default_factory=CostWeights)
    fixed_root: int | None = None
    static_wavelength: int = 0
    timing: bool = True

    SWEEP_KEYS = ("cbs_counts", "demands", "hotspot_fractions", "variants", "replications",
                  "base_seed", "output", "t_v", "t_h", "w_g", "w_a", "w_l", "fixed_root",
                  "static_wavelength", "timing")

    def __post_init__(self):
        if not (self.cbs_counts and self.demands and self.hotspot_fractions and self.variants):
            raise ConfigError("sweep lists must be non-empty")
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        bad = [v for v in self.variants if v not in VARIANTS]
        if bad:
            raise ConfigError(f"unknown variants: {', '.join(bad)}; choose from {', '.join(VARIANTS)}")
        if self.output is not None:
            self.output = Path(self.output)

    @classmethod
    def from_mapping(cls, values: dict[str, str]) -> "ExperimentConfig":
        scenario_keys = {f.name for f in fields(ScenarioParams)}
        unknown = set(values) - scenario_keys - set(cls.SWEEP_KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        kw: dict = {"scenario": ScenarioParams.from_mapping(values)}
        try:
            if "cbs_counts" in values:
                kw["cbs_counts"] = parse_list(values["cbs_counts"], int)
            if "demands" in values:
                kw["demands"] = parse_list(values["demands"], float)
            if "hotspot_fractions" in values:
                kw["hotspot_fractions"] = parse_list(values["hotspot_fractions"], float)
            if "variants" in values:
                kw["variants"] = parse_list(values["variants"])
            for key in ("replications", "base_seed", "static_wavelength"):
                if key in values:
                    kw[key] = int(values[key])
            if values.get("fixed_root", "").strip() not in ("", "auto"):
                kw["fixed_root"] = int(values["fixed_root"])
            if "output" in values:
                kw["output"] = Path(values["output"])
            if "timing" in values:
                kw["timing"] = parse_bool(values["timing"])
            th = PrioritizationThresholds()
            kw["thresholds"] = PrioritizationThresholds(
                float(values.get("t_v", th.t_v)), float(values.get("t_h", th.t_h)))
            kw["weights"] = CostWeights(*(float(values.get(k, 1.0)) for k in ("w_g", "w_a", "w_l")))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return cls(**kw)

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        return cls.from_mapping(read_flat_config(path))

    def points(self) -> list[tuple[float, float, int]]:
        """Sweep points as (h, demand, cbs_count) in output order."""
        return [(h, d, n) for h in self.hotspot_fractions for d in self.demands for n in self.cbs_counts]

    def resolved_lines(self) -> list[str]:
        lines = self.scenario.as_lines()
        lines += [
            f"cbs_counts = {','.join(map(str, self.cbs_counts))}",
            f"demands = {','.join(map(str, self.demands))}",
            f"hotspot_fractions = {','.join(map(str, self.hotspot_fractions))}",
            f"variants = {','.join(self.variants)}",
            f"replications = {self.replications}",
            f"base_seed = {self.base_seed}",
            f"t_v = {self.thresholds.t_v}",
            f"t_h = {self.thresholds.t_h}",
            f"w_g = {self.weights.w_g}",
            f"w_a = {self.weights.w_a}",
            f"w_l = {self.weights.w_l}",
            f"fixed_root = {'auto' if self.fixed_root is None else self.fixed_root}",
            f"static_wavelength = {self.static_wavelength}",
            f"timing = {str(self.timing).lower()}",
        ]
        return lines


def run_variant(scenario: Scenario, variant: str, config: ExperimentConfig) -> MetricsRow:
    """Run one variant on a private copy of ``scenario.graph``."""
    graph = scenario.graph.copy()
    W = scenario.cbs
    root = config.fixed_root if config.fixed_root is not None else central_vertex(graph)
    start = time.perf_counter()
    if variant == "static_backhaul":
        report = static_backhaul(graph, W, root, config.static_wavelength)
        elapsed = time.perf_counter() - start
        per_link: dict[int, int] = defaultdict(int)
        for lid, _ in report.load:
            per_link[lid] += 1
        total = len(report.load)
        row = MetricsRow(
            feasibility=report.a_priori_feasibility,
            wavelengths_total=total,
            wavelengths_per_link_mean=total / graph.num_links if graph.num_links else 0.0,
            wavelengths_per_link_max=max(per_link.values(), default=0),
            placed=len(W), desired=len(W),
        )
    else:
        if variant == "prioritized":
            placements, infeasible = run_heuristic(graph, W, config.thresholds, config.weights)
        elif variant == "unprioritized":
            placements, infeasible = run_heuristic(graph, W, None, config.weights)
        elif variant == "static_reconfiguration":
            placements, infeasible = static_reconfiguration(graph, W, root, config.thresholds, config.weights)
        else:
            raise ValueError(f"unknown variant {variant!r}")
        elapsed = time.perf_counter() - start
        row = evaluate(graph, W, placements, infeasible)
    return dataclasses.replace(
        row, variant=variant, prioritized=variant in ("prioritized", "static_reconfiguration"),
        runtime=elapsed if config.timing else 0.0,
    )


def _run_point(args) -> list[MetricsRow]:
    config, (h, demand, cbs_count), rep = args
    seed = config.base_seed + rep
    params = dataclasses.replace(config.scenario, cbs_count=cbs_count, demand=demand,
                                 hotspot_fraction=h, seed=seed)
    scenario = generate_scenario(params)
    digest = scenario.digest()
    rows = []
    for variant in config.variants:
        row = run_variant(scenario, variant, config)
        rows.append(dataclasses.replace(row, seed=seed, cbs_count=cbs_count, demand=demand, h=h,
                                        scenario_hash=digest))
    return rows


def run_sweep(config: ExperimentConfig, jobs: int = 1) -> list[MetricsRow]:
    """Run every (sweep point, replication, variant); rows come back in that order."""
    if config.output is not None:
        _check_writable(config.output)
    tasks = [(config, point, rep) for point in config.points() for rep in range(config.replications)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_run_point, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        chunks = [_run_point(t) for t in tasks]
    rows = [row for chunk in chunks for row in chunk]
    if config.output is not None:
        emit_csv(rows, config.output)
        write_meta(config, rows, meta_path(config.output))
    return rows


def _check_writable(path: Path) -> None:
    path = Path(path)
    try:
        with open(path, "a"):
            pass
    except OSError as exc:
        raise OSError(f"cannot write output {path}: {exc.strerror or exc}") from exc


def meta_path(csv_path: Path) -> Path:
    return Path(csv_path).with_suffix(".meta")


def emit_csv(rows: Iterable[MetricsRow], path: str | Path) -> None:
    path = Path(path)
    try:
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(CSV_HEADER)
            for row in rows:
                out.writerow(row.csv_fields())
    except OSError as exc:
        raise OSError(f"cannot write CSV {path}: {exc.strerror or exc}") from exc


def read_csv(path: str | Path) -> list[MetricsRow]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return [
            MetricsRow(
                seed=int(r["seed"]), cbs_count=int(r["cbs_count"]), demand=float(r["demand_gbps"]),
                h=float(r["h"]), variant=r["variant"], prioritized=r["prioritized"] == "1",
                feasibility=float(r["feasibility"]), wavelengths_total=int(r["wl_total"]),
                wavelengths_per_link_mean=float(r["wl_per_link_mean"]),
                wavelengths_per_link_max=int(r["wl_per_link_max"]), runtime=float(r["runtime_s"]),
            )
            for r in reader
        ]


def write_meta(config: ExperimentConfig, rows: Sequence[MetricsRow], path: str | Path) -> None:
    lines = [f"artifact_version = {__version__}"] + config.resolved_lines()
    seen = set()
    for r in rows:
        key = (r.seed, r.cbs_count, r.demand, r.h)
        if key not in seen:
            seen.add(key)
            lines.append(f"# scenario seed={r.seed} cbs_count={r.cbs_count} demand={r.demand} "
                         f"h={r.h} hash={r.scenario_hash}")
    Path(path).write_text("\n".join(lines) + "\n")


def summarize(rows: Iterable[MetricsRow]) -> dict[tuple, dict[str, float]]:
    """Means per (h, demand, cbs_count, variant)."""
    groups: dict[tuple, list[MetricsRow]] = defaultdict(list)
    for r in rows:
        groups[(r.h, r.demand, r.cbs_count, r.variant)].append(r)
    return {
        key: {
            "feasibility": fmean(r.feasibility for r in grp),
            "wl_total": fmean(r.wavelengths_total for r in grp),
            "wl_per_link_mean": fmean(r.wavelengths_per_link_mean for r in grp),
            "n": len(grp),
        }
        for key, grp in groups.items()
    }
