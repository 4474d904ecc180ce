"""Command line entry point: generate, place, sweep, oracle-check, validate."""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

from .baselines import (
    brute_force_feasible,
    central_vertex,
    static_backhaul,
    static_reconfiguration,
    write_report_csv,
)
from .experiments import VARIANTS, ExperimentConfig, run_sweep
from .placement import (
    CostWeights,
    parse_placement_lines,
    place_cbs,
    placement_lines,
    run_heuristic,
)
from .prioritization import PrioritizationThresholds, prioritize_cbs
from .scenario import ScenarioParams, generate_scenario, read_scenario, scenario_text, write_scenario
from .validate import validate_placements

log = logging.getLogger("backhaul")

CONFIG_HELP = """\
scenario config keys (key = value): grid_side, mean_spacing, jitter_sigma,
  mesh_factor, K, wavelength_capacity, cbs_count, hotspot_fraction,
  hotspot_sigma, cbs_radius_factor, demand, rtt_budget, seed
sweep config adds: cbs_counts, demands, hotspot_fractions (comma lists),
  variants (prioritized,unprioritized,static_reconfiguration,static_backhaul),
  replications, base_seed, output, t_v, t_h, w_g, w_a, w_l,
  fixed_root (vertex id or auto), static_wavelength, timing (true/false)
"""


class UsageError(Exception):
    pass


def _pair(text: str, n: int, name: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"{name} must be {n} comma-separated numbers") from None
    if len(vals) != n:
        raise argparse.ArgumentTypeError(f"{name} must be {n} comma-separated numbers")
    return vals


def _weights(text: str) -> CostWeights:
    try:
        return CostWeights(*_pair(text, 3, "--weights"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _thresholds(text: str) -> PrioritizationThresholds:
    try:
        return PrioritizationThresholds(*_pair(text, 2, "--thresholds"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="backhaul",
        description="BBU/LC placement and wavelength allocation for coordinated BS sets.",
        epilog=CONFIG_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    algo = argparse.ArgumentParser(add_help=False)
    algo.add_argument("--weights", type=_weights, default=None, metavar="WG,WA,WL",
                      help="cost weights (default 1,1,1)")
    algo.add_argument("--thresholds", type=_thresholds, default=None,
                      metavar="TV,TH", help="prioritization thresholds (default 0.1,0.9)")

    p = sub.add_parser("generate", help="generate a scenario file from a config",
                       epilog=CONFIG_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--config", required=True, help="scenario config file")
    p.add_argument("--out", help="scenario output file (default: stdout)")
    p.add_argument("--seed", type=int, help="override the config seed")

    p = sub.add_parser("place", parents=[algo], help="place every CBS of a scenario")
    p.add_argument("--scenario", required=True, help="scenario file")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--variant", choices=VARIANTS, default="prioritized")
    p.add_argument("--fixed-root", type=int, help="controller vertex for static variants (default: nearest centroid)")
    p.add_argument("--strict", action="store_true", help="exit 1 if any CBS is infeasible")

    p = sub.add_parser("sweep", parents=[algo], help="run an experiment sweep into CSV",
                       epilog=CONFIG_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--config", required=True, help="experiment config file")
    p.add_argument("--out", help="CSV output (overrides config 'output')")
    p.add_argument("--seed", type=int, help="override base_seed")
    p.add_argument("--variant", action="append", choices=VARIANTS,
                   help="restrict to these variants (repeatable)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")

    p = sub.add_parser("oracle-check", parents=[algo],
                       help="compare each heuristic placement with the exhaustive oracle")
    p.add_argument("--scenario", required=True, help="small scenario file")
    p.add_argument("--out", help="report output (default: stdout)")
    p.add_argument("--max-hops", type=int, help="oracle path length bound (default |V|-1)")
    p.add_argument("--strict", action="store_true", help="exit 1 if any CBS is infeasible")

    p = sub.add_parser("validate", parents=[algo], help="check placement records against a scenario")
    p.add_argument("--scenario", required=True, help="scenario file")
    p.add_argument("--placements", required=True, help="placement records file")
    p.add_argument("--strict", action="store_true", help="exit 1 if any CBS is infeasible")
    return parser


def _emit(lines: list[str], out: str | None) -> None:
    text = "\n".join(lines) + ("\n" if lines else "")
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_generate(args) -> int:
    params = ScenarioParams.from_file(args.config)
    if args.seed is not None:
        params = dataclasses.replace(params, seed=args.seed)
    scenario = generate_scenario(params)
    if args.out:
        write_scenario(scenario, args.out)
    else:
        sys.stdout.write(scenario_text(scenario))
    log.info("generated %d BSs, %d links, %d CBSs", scenario.graph.num_vertices,
             scenario.graph.num_links, len(scenario.cbs))
    return 0


def cmd_place(args) -> int:
    scenario = read_scenario(args.scenario)
    graph, W = scenario.graph, scenario.cbs
    root = args.fixed_root if args.fixed_root is not None else central_vertex(graph)
    if args.variant == "static_backhaul":
        report = static_backhaul(graph, W, root)
        out = Path(args.out) if args.out else None
        if out is None:
            raise UsageError("static_backhaul writes CSV files; pass --out")
        write_report_csv(graph, report, out, out.with_suffix(".cbs.csv"))
        log.info("aggregate excess %.4f Gb/s on %d pairs", report.aggregate_excess,
                 report.oversubscribed_pairs)
        return 0
    if args.variant == "prioritized":
        placements, infeasible = run_heuristic(graph, W, args.thresholds, args.weights)
    elif args.variant == "unprioritized":
        placements, infeasible = run_heuristic(graph, W, None, args.weights)
    else:
        placements, infeasible = static_reconfiguration(graph, W, root, args.thresholds, args.weights)
    _emit(placement_lines(placements, infeasible), args.out)
    log.info("placed %d of %d CBSs", len(placements), len(W))
    return 1 if args.strict and infeasible else 0


def cmd_sweep(args) -> int:
    config = ExperimentConfig.from_file(args.config)
    if args.out:
        config.output = Path(args.out)
    if args.seed is not None:
        config.base_seed = args.seed
    if args.variant:
        config.variants = list(dict.fromkeys(args.variant))
    if args.weights is not None:
        config.weights = args.weights
    if args.thresholds is not None:
        config.thresholds = args.thresholds
    if config.output is None:
        raise UsageError("no output path: set 'output' in the config or pass --out")
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    rows = run_sweep(config, jobs=args.jobs)
    log.info("wrote %d rows to %s", len(rows), config.output)
    return 0


def cmd_oracle_check(args) -> int:
    scenario = read_scenario(args.scenario)
    graph, W = scenario.graph, scenario.cbs
    order = prioritize_cbs(W, graph.num_vertices, args.thresholds).ordered()
    lines, violations, infeasible = [], 0, 0
    for cbs in order:
        oracle = brute_force_feasible(graph, cbs, args.max_hops, args.weights)
        placed = place_cbs(graph, cbs, args.weights)
        if placed is None:
            infeasible += 1
            status = "oracle-feasible" if oracle else "oracle-infeasible"
            lines.append(f"CBS {cbs.id}: heuristic infeasible, {status}")
            continue
        if oracle is None:
            violations += 1
            lines.append(f"CBS {cbs.id}: VIOLATION heuristic n={placed.cost.n} but oracle infeasible")
        elif oracle.cost.n > placed.cost.n:
            violations += 1
            lines.append(f"CBS {cbs.id}: VIOLATION oracle n={oracle.cost.n} > heuristic n={placed.cost.n}")
        else:
            lines.append(f"CBS {cbs.id}: ok heuristic n={placed.cost.n} controller={placed.controller}, "
                         f"oracle n={oracle.cost.n} controller={oracle.controller}")
    lines.append(f"summary: {len(W)} CBSs, {len(W) - infeasible} placed, {violations} violations")
    _emit(lines, args.out)
    if violations:
        return 1
    return 1 if args.strict and infeasible else 0


def cmd_validate(args) -> int:
    scenario = read_scenario(args.scenario)
    records, infeasible = parse_placement_lines(Path(args.placements).read_text().splitlines())
    errors = validate_placements(scenario.graph, scenario.cbs, records, infeasible, args.weights)
    for e in errors:
        print(e, file=sys.stderr)
    print("PASS" if not errors else f"FAIL ({len(errors)} violations)")
    if errors:
        return 1
    return 1 if args.strict and infeasible else 0


COMMANDS = {
    "generate": cmd_generate,
    "place": cmd_place,
    "sweep": cmd_sweep,
    "oracle-check": cmd_oracle_check,
    "validate": cmd_validate,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    if args.command != "generate":
        # config values win in sweeps unless the flag is given
        if args.command != "sweep":
            args.weights = args.weights or CostWeights()
            args.thresholds = args.thresholds or PrioritizationThresholds()
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
