#!/usr/bin/env python3
"""
Command-line entry point for the routing game analyses.

Subcommands:
    solve     equilibrium at one demand
    sweep     breakpoints and the full equilibrium cost curve
    final     closed form of the last (unbounded) piece
    braess    Braess's paradox detectors at one demand
    measures  J and W path measures for a removal set

Exit codes: 0 ok, 1 usage, 2 invalid input, 3 solver failure.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import pandas as pd

# Add src to path so we can import our modules
sys.path.append(str(Path(__file__).resolve().parent / "src"))

from braess_analyzer import BraessAnalyzer, SubsetCapExceededError  # noqa: E402
from convex_solvers import SolverError  # noqa: E402
from demand_sweep_analyzer import DemandSweepAnalyzer, MaxBreakpointsError  # noqa: E402
from network_processor import (  # noqa: E402
    NetworkParseError,
    NetworkProcessor,
    PathCostModel,
    RoutingGameError,
)
from report_writer import (  # noqa: E402
    breakpoint_table,
    bp_reports_table,
    emit_bp_reports_csv,
    emit_breakpoint_csv,
    emit_curve_csv,
    emit_measures_csv,
    render_svg,
    render_text_report,
    save_results,
    save_svg,
    scan_table,
    series_from_curve,
)
from run_config import RunConfig, load_config  # noqa: E402

logger = logging.getLogger("run_analysis")

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2, 3


class UsageArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that exits with the usage code instead of argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_path_set(text: str, labels: Sequence[str]) -> List[int]:
    """
    Parse a comma-separated path list: 'p3', '3' and full labels
    like 'e1-e5-e4' are accepted. Returns 0-based indices.
    """
    indices = []
    for token in (t.strip() for t in text.split(",")):
        if not token:
            continue
        if token in labels:
            indices.append(labels.index(token))
            continue
        number = token[1:] if token.lower().startswith("p") else token
        if not number.isdigit() or not 1 <= int(number) <= len(labels):
            raise NetworkParseError(f"Unknown path '{token}' (paths are p1..p{len(labels)})", field="--remove")
        indices.append(int(number) - 1)
    return sorted(set(indices))


def load_candidates(path: str, labels: Sequence[str]) -> List[List[int]]:
    """Candidate removal sets from JSON: a list of path lists, or {"candidates": [...]}."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise NetworkParseError(f"Cannot read candidates file {path}: {e}", field="--candidates") from e
    if isinstance(data, dict):
        data = data.get("candidates", [])
    if not isinstance(data, list):
        raise NetworkParseError("Candidates must be a list of path lists", field="--candidates")
    return [parse_path_set(",".join(str(p) for p in entry), labels) for entry in data]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--network", required=True, help="Network JSON file or bundled network name")
    common.add_argument("--config", help="YAML run configuration (default: config/default.yaml)")
    common.add_argument("--out", help="Output directory (overrides the configuration)")
    common.add_argument("--format", action="append", dest="formats",
                        help="Output format: csv, svg, text, json (repeatable)")
    common.add_argument("--tol-kkt", type=float, dest="kkt_tol")
    common.add_argument("--tol-feas", type=float, dest="feas_tol")
    common.add_argument("--tol-class", type=float, dest="class_tol")
    common.add_argument("--tol-gap", type=float, dest="gap_tol")
    common.add_argument("--cap-paths", type=int, dest="path_cap")
    common.add_argument("--cap-breakpoints", type=int, dest="breakpoint_cap")
    common.add_argument("--cap-subsets", type=int, dest="subset_scan_cap")
    common.add_argument("--no-progress", action="store_true", help="Disable progress bars")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", action="store_true", help="Debug logging")
    verbosity.add_argument("--quiet", action="store_true", help="Warnings and errors only")

    parser = UsageArgumentParser(description="Wardrop equilibrium and Braess's paradox analysis")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=UsageArgumentParser)

    solve = sub.add_parser("solve", parents=[common], help="Equilibrium at one demand")
    solve.add_argument("--demand", type=float, required=True)
    solve.add_argument("--remove", help="Paths to remove, e.g. p3 or p3,p4")

    sweep = sub.add_parser("sweep", parents=[common], help="Breakpoints and equilibrium cost curve")
    sweep.add_argument("--dmax", type=float, help="Largest demand to tabulate")
    sweep.add_argument("--remove", help="Paths to remove before tracing")

    final = sub.add_parser("final", parents=[common], help="Final-interval closed form")
    final.add_argument("--remove", help="Paths to remove")

    braess = sub.add_parser("braess", parents=[common], help="Braess's paradox checks at one demand")
    braess.add_argument("--demand", type=float, required=True)
    braess.add_argument("--candidates", help="JSON file of candidate removal sets")
    braess.add_argument("--scan-max", type=int, default=0,
                        help="Scan removal sets up to this size for unnecessary sets")
    braess.add_argument("--no-default-candidates", action="store_true",
                        help="Only use the candidates file (plus the base game self-check)")

    measures = sub.add_parser("measures", parents=[common], help="J and W measures for a removal set")
    measures.add_argument("--remove", required=True, help="Paths to remove")
    measures.add_argument("--dmax", type=float, required=True)
    measures.add_argument("--points", type=int, default=50, help="Grid points for the measure curves")
    return parser


def configure_logging(args) -> None:
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def build_config(args) -> RunConfig:
    config = load_config(args.config)
    return config.with_overrides(
        kkt_tol=args.kkt_tol,
        feas_tol=args.feas_tol,
        class_tol=args.class_tol,
        gap_tol=args.gap_tol,
        path_cap=args.path_cap,
        breakpoint_cap=args.breakpoint_cap,
        subset_scan_cap=args.subset_scan_cap,
        output_dir=args.out,
        formats=args.formats,
        show_progress=False if (args.no_progress or args.quiet) else None,
    )


class AnalysisRun:
    """Shared state of one command: configuration, network, model and outputs."""

    def __init__(self, args, config: RunConfig):
        self.args = args
        self.config = config
        self.processor = NetworkProcessor(str(Path(__file__).resolve().parent / "data" / "networks"),
                                          path_cap=config.path_cap)
        self.network = self.processor.load_network(args.network)
        self.model: PathCostModel = self.processor.build_model(self.network)
        self.labels = [f"p{p + 1}" for p in range(self.model.n)]
        self.path_names = self.model.path_labels()
        self.tolerances = config.solver_tolerances()
        self.output_dir = Path(config.output_dir)
        self.written: List[str] = []

    def braess_analyzer(self) -> BraessAnalyzer:
        return BraessAnalyzer(
            self.model,
            self.tolerances,
            gap_tol=self.config.gap_tol,
            subset_scan_cap=self.config.subset_scan_cap,
            scan_grid_points=self.config.scan_grid_points,
            breakpoint_cap=self.config.breakpoint_cap,
            merge_tol=self.config.breakpoint_merge_tol,
            show_progress=self.config.show_progress,
        )

    def removed(self) -> List[int]:
        text = getattr(self.args, "remove", None)
        return parse_path_set(text, self.labels) if text else []

    def sweep_analyzer(self) -> DemandSweepAnalyzer:
        removed = self.removed()
        model = self.model.with_excluded(removed) if removed else self.model
        return DemandSweepAnalyzer(model, self.tolerances, self.config.breakpoint_cap,
                                   self.config.breakpoint_merge_tol)

    def wants(self, fmt: str) -> bool:
        return fmt in self.config.formats

    def path(self, suffix: str) -> Path:
        return self.output_dir / f"{self.network.name}_{suffix}"

    def emit_text(self, text: str, suffix: str) -> None:
        print(text)
        if self.wants("text"):
            target = self.path(suffix)
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(text, encoding="utf-8")
            self.written.append(str(target))

    def path_legend(self) -> str:
        return "\n".join(f"  {label}: {name}" for label, name in zip(self.labels, self.path_names))


def cmd_solve(run: AnalysisRun) -> None:
    analyzer = run.sweep_analyzer().equilibrium
    snapshot = analyzer.compute_we(run.args.demand)
    summary = snapshot.to_dict(run.labels)
    print(f"Paths of '{run.network.name}':\n{run.path_legend()}")
    run.emit_text(render_text_report("solve", snapshot=summary, network=run.network.name),
                  f"solve_D{run.args.demand:g}.txt")
    if run.wants("csv"):
        row = {"D": snapshot.demand, "lambda_we": snapshot.we_cost, "V": snapshot.beckmann_value}
        row.update({f"f_{label}": float(snapshot.flow[p]) for p, label in enumerate(run.labels)})
        row.update({f"lambda_{label}": float(snapshot.cost_vector[p]) for p, label in enumerate(run.labels)})
        target = run.path(f"solve_D{run.args.demand:g}.csv")
        target.parent.mkdir(parents=True, exist_ok=True)
        pd.DataFrame([row]).to_csv(target, index=False, lineterminator="\n")
        run.written.append(str(target))
    if run.wants("json"):
        run.written.append(save_results(summary, f"{run.network.name}_solve_D{run.args.demand:g}.json",
                                        run.output_dir))


def cmd_sweep(run: AnalysisRun) -> None:
    curve = run.sweep_analyzer().trace_curve()
    demand_max = run.args.dmax
    if demand_max is None:
        demand_max = curve.last_breakpoint + max(1.0, curve.last_breakpoint)

    table = breakpoint_table(curve, run.labels)
    breakpoints = [f"{d:.10g}" for d in curve.breakpoints]
    run.emit_text(render_text_report("sweep", network=run.network.name, breakpoints=breakpoints,
                                     intervals=table.to_dict("records")), "sweep.txt")
    if run.wants("csv"):
        target = run.path("breakpoints.csv")
        emit_breakpoint_csv(curve, target, run.labels)
        run.written.append(str(target))
        target = run.path("curve.csv")
        emit_curve_csv(curve, target, run.labels, run.config.samples_per_interval, demand_max,
                       show_progress=run.config.show_progress)
        run.written.append(str(target))
    if run.wants("svg"):
        series = [series_from_curve(curve, "WE cost", demand_max, run.config.samples_per_interval)]
        svg = render_svg(series, [d for d in curve.finite_breakpoints if d <= demand_max],
                         title=f"Equilibrium cost: {run.network.name}")
        run.written.append(save_svg(svg, run.path("curve.svg")))
    if run.wants("json"):
        run.written.append(save_results({"breakpoints": curve.breakpoints, "intervals": table.to_dict("records")},
                                        f"{run.network.name}_sweep.json", run.output_dir))


def cmd_final(run: AnalysisRun) -> None:
    final = run.sweep_analyzer().final_interval()
    summary = final.to_dict(run.labels)
    run.emit_text(render_text_report("final", network=run.network.name, final=summary), "final.txt")
    if run.wants("json") or run.wants("csv"):
        run.written.append(save_results(summary, f"{run.network.name}_final.json", run.output_dir))


def cmd_braess(run: AnalysisRun) -> None:
    analyzer = run.braess_analyzer()
    demand = run.args.demand
    curve = analyzer.curve()

    candidates = []
    if run.args.candidates:
        candidates.extend(load_candidates(run.args.candidates, run.labels))
    if not run.args.no_default_candidates:
        candidates.extend(sorted(c) for c in analyzer.default_candidates())
    unique = []
    for candidate in candidates:
        if candidate not in unique:
            unique.append(candidate)

    reports = []
    reports.extend(analyzer.detect_slope_increase(curve))
    reports.append(analyzer.detect_flow_losing(demand))
    reports.extend(analyzer.extension_gap(unique, demand))
    scans = analyzer.scan_unnecessary(demand, run.args.scan_max) if run.args.scan_max > 0 else []

    rows = bp_reports_table(reports, run.labels).to_dict("records")
    scan_rows = scan_table(scans, run.labels).to_dict("records")
    run.emit_text(render_text_report("braess", network=run.network.name, demand=demand,
                                     reports=rows, scans=scan_rows), f"braess_D{demand:g}.txt")
    if run.wants("csv"):
        target = run.path(f"braess_D{demand:g}.csv")
        emit_bp_reports_csv(reports, target, run.labels)
        run.written.append(str(target))
    if run.wants("json"):
        run.written.append(save_results({"reports": rows, "scans": scan_rows},
                                        f"{run.network.name}_braess_D{demand:g}.json", run.output_dir))


def cmd_measures(run: AnalysisRun) -> None:
    analyzer = run.braess_analyzer()
    game = analyzer.game(run.removed())
    demand_max = run.args.dmax
    J = analyzer.measure_J(game, demand_max)
    W = analyzer.measure_W(game, demand_max)
    bound = analyzer.bp_demand_bound(game)
    label = game.label(run.labels)
    run.emit_text(render_text_report("measures", network=run.network.name, removed=label,
                                     J=J, W=W, demand=demand_max, bound=bound), "measures.txt")
    measures = analyzer.measure_curves(game, demand_max, run.args.points)
    if run.wants("csv"):
        target = run.path("measures.csv")
        emit_measures_csv(measures, target)
        run.written.append(str(target))
    if run.wants("svg"):
        base, modified = analyzer.curve(), analyzer.curve(game.removed)
        series = [series_from_curve(base, "WE cost", demand_max),
                  series_from_curve(modified, f"WE cost without {label}", demand_max)]
        breakpoints = sorted(set(base.finite_breakpoints) | set(modified.finite_breakpoints))
        svg = render_svg(series, [d for d in breakpoints if d <= demand_max],
                         title=f"Removing {label}: {run.network.name}")
        run.written.append(save_svg(svg, run.path("measures.svg")))


COMMANDS = {
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "final": cmd_final,
    "braess": cmd_braess,
    "measures": cmd_measures,
}

SOLVER_ERRORS = (SolverError, MaxBreakpointsError, SubsetCapExceededError)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args)

    try:
        config = build_config(args)
        run = AnalysisRun(args, config)
        COMMANDS[args.command](run)
    except SOLVER_ERRORS as e:
        logger.error(f"Solver failure: {e}")
        return EXIT_SOLVER
    except (RoutingGameError, ValueError) as e:
        logger.error(f"Invalid input: {e}")
        return EXIT_INPUT

    for path in run.written:
        print(f"Saved: {path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
