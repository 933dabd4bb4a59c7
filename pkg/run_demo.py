#!/usr/bin/env python3
"""
Demo Script for Routing Game Analysis

Runs every analysis on the bundled networks: equilibrium curves, final
intervals, Braess's paradox checks and the J/W measures. Results are
printed and saved under reports/demo/.
"""

import logging
import sys
from pathlib import Path

# Add src to path so we can import our modules
sys.path.append(str(Path(__file__).resolve().parent / "src"))

from braess_analyzer import BraessAnalyzer  # noqa: E402
from network_processor import NetworkProcessor, RoutingGameError  # noqa: E402
from report_writer import (  # noqa: E402
    breakpoint_table,
    bp_reports_table,
    emit_breakpoint_csv,
    render_svg,
    render_text_report,
    save_results,
    save_svg,
    scan_table,
    series_from_curve,
)
from run_config import load_config  # noqa: E402

ROOT = Path(__file__).resolve().parent
OUTPUT_DIR = ROOT / "reports" / "demo"

# Demands at which each network's BP checks are run, with removal sets for the measures
DEMO_CASES = {
    "wheatstone": {"demand": 1.5, "remove": [2], "dmax": 3.0, "scan_demand": None},
    "merged": {"demand": 1.5, "remove": [3], "dmax": 3.0, "scan_demand": None},
    "parallel_path": {"demand": 1.5, "remove": [2], "dmax": 3.0, "scan_demand": None},
    "parallel_path_smooth": {"demand": 1.0, "remove": [2], "dmax": 3.0, "scan_demand": None},
    "seven_edge": {"demand": 3.7, "remove": [2], "dmax": 8.0, "scan_demand": 3.7},
    "single_edge": {"demand": 1.0, "remove": [], "dmax": 2.0, "scan_demand": None},
}


def analyze_network(processor, config, name, case):
    """
    Run all analyses for one bundled network.

    Returns:
        dict: JSON-ready summary
    """
    network = processor.load_network(name)
    model = processor.build_model(network)
    labels = [f"p{p + 1}" for p in range(model.n)]
    analyzer = BraessAnalyzer(model, config.solver_tolerances(), gap_tol=config.gap_tol,
                              subset_scan_cap=config.subset_scan_cap,
                              scan_grid_points=config.scan_grid_points,
                              breakpoint_cap=config.breakpoint_cap,
                              merge_tol=config.breakpoint_merge_tol)

    curve = analyzer.curve()
    table = breakpoint_table(curve, labels)
    print(render_text_report("sweep", network=name, breakpoints=[f"{d:.10g}" for d in curve.breakpoints],
                             intervals=table.to_dict("records")))
    emit_breakpoint_csv(curve, OUTPUT_DIR / f"{name}_breakpoints.csv", labels)

    final = analyzer.sweep().final_interval().to_dict(labels)
    print(render_text_report("final", network=name, final=final))

    demand = case["demand"]
    reports = analyzer.detect_slope_increase(curve)
    reports.append(analyzer.detect_flow_losing(demand))
    reports.extend(analyzer.extension_gap(analyzer.default_candidates(), demand))
    scans = analyzer.scan_unnecessary(case["scan_demand"], 1) if case["scan_demand"] else []
    report_rows = bp_reports_table(reports, labels).to_dict("records")
    scan_rows = scan_table(scans, labels).to_dict("records")
    print(render_text_report("braess", network=name, demand=demand, reports=report_rows, scans=scan_rows))

    summary = {
        "network": name,
        "paths": dict(zip(labels, model.path_labels())),
        "breakpoints": list(curve.breakpoints),
        "final_interval": final,
        "bp_reports": report_rows,
        "unnecessary_scans": scan_rows,
    }

    series = [series_from_curve(curve, "WE cost", case["dmax"])]
    breakpoints = set(curve.finite_breakpoints)
    if case["remove"]:
        game = analyzer.game(case["remove"])
        J = analyzer.measure_J(game, case["dmax"])
        W = analyzer.measure_W(game, case["dmax"])
        bound = analyzer.bp_demand_bound(game)
        print(render_text_report("measures", network=name, removed=game.label(labels),
                                 J=J, W=W, demand=case["dmax"], bound=bound))
        summary["measures"] = {"removed": game.label(labels), "J": J, "W": W, "bp_demand_bound": bound}
        modified = analyzer.curve(game.removed)
        series.append(series_from_curve(modified, f"WE cost without {game.label(labels)}", case["dmax"]))
        breakpoints |= set(modified.finite_breakpoints)

    svg = render_svg(series, [d for d in breakpoints if d <= case["dmax"]], title=f"Equilibrium cost: {name}")
    save_svg(svg, OUTPUT_DIR / f"{name}_curve.svg")
    return summary


def main():
    """
    Run the complete routing game demo on the bundled networks.
    """
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")

    print("🚀 Routing Game Analysis - DEMO MODE")
    print("=" * 60)

    config = load_config(ROOT / "config" / "default.yaml").with_overrides(show_progress=False)
    processor = NetworkProcessor(str(ROOT / "data" / "networks"), path_cap=config.path_cap)

    results = {}
    failures = []
    for name, case in DEMO_CASES.items():
        print(f"\n📊 Analyzing {name}...")
        try:
            results[name] = analyze_network(processor, config, name, case)
        except RoutingGameError as e:
            print(f"❌ {name} failed: {e}")
            failures.append(name)

    saved = save_results(results, "demo_summary.json", OUTPUT_DIR)
    print("\n" + "=" * 60)
    print(f"💾 Demo results saved to: {saved}")
    if failures:
        print(f"❌ Failed networks: {', '.join(failures)}")
        return 3
    print("✅ Demo completed successfully!")
    return 0


if __name__ == "__main__":
    sys.exit(main())
