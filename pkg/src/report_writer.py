"""
Report Writer Module

Turns analysis results into files: CSV tables (pandas), deterministic SVG
plots (matplotlib), JSON summaries and plain-text reports (jinja2).
"""

import io
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, TextIO, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402
from jinja2 import DictLoader, Environment, StrictUndefined  # noqa: E402
from tqdm import tqdm  # noqa: E402

from braess_analyzer import BPReport, UnnecessarySetScan  # noqa: E402
from demand_sweep_analyzer import PiecewiseAffineCurve  # noqa: E402

logger = logging.getLogger(__name__)

Sink = Union[str, Path, TextIO]


def _fmt_set(paths, labels: Sequence[str]) -> str:
    return "{" + ", ".join(labels[p] for p in sorted(paths)) + "}"


def _write_frame(frame: pd.DataFrame, sink: Sink) -> None:
    if isinstance(sink, (str, Path)):
        Path(sink).parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(sink, index=False, lineterminator="\n")
        logger.info(f"Wrote {len(frame)} rows to {sink}")
    else:
        frame.to_csv(sink, index=False, lineterminator="\n")


def breakpoint_table(curve: PiecewiseAffineCurve, labels: Sequence[str]) -> pd.DataFrame:
    """One row per affine piece: range, slope, intercept, sets and per-path cost slopes."""
    rows = []
    for interval in curve.intervals:
        row = {
            "interval_index": interval.index,
            "start": interval.start,
            "end": interval.end,
            "slope": interval.slope,
            "intercept": interval.intercept,
            "we_cost_at_start": interval.start_we_cost,
            "active_set": _fmt_set(interval.active_set, labels),
            "used_set": _fmt_set(interval.used_set, labels),
        }
        for p, label in enumerate(labels):
            row[f"dC_{label}"] = float(interval.cost_slope[p])
        rows.append(row)
    return pd.DataFrame(rows)


def curve_samples_table(curve: PiecewiseAffineCurve, labels: Sequence[str],
                        points_per_interval: int = 20, demand_max: Optional[float] = None,
                        demands: Optional[Sequence[float]] = None, show_progress: bool = False) -> pd.DataFrame:
    """
    Equilibrium cost and path costs tabulated at breakpoints plus interior
    samples (or at the given ``demands``), sorted by demand.

    Args:
        curve (PiecewiseAffineCurve): Traced curve
        labels: Path names used in the column headers
        points_per_interval (int): Interior samples per piece
        demand_max (float): Last demand tabulated (default past the last breakpoint)
        demands: Explicit demands instead of the automatic grid
        show_progress (bool): tqdm progress bar over the rows

    Returns:
        pd.DataFrame: columns D, lambda_we, one lambda_<path> per path and interval_index
    """
    columns = ["D", "lambda_we"] + [f"lambda_{label}" for label in labels] + ["interval_index"]
    if demands is None:
        points = curve.samples(points_per_interval, demand_max)
    else:
        points = [(float(d), curve.interval_index(d)) for d in sorted(set(demands))]
    rows = []
    for demand, index in tqdm(points, desc="Curve samples", disable=not show_progress):
        interval = curve.intervals[index]
        costs = interval.cost_vector(demand)
        rows.append([demand, interval.we_cost(demand)] + [float(c) for c in costs] + [index])
    return pd.DataFrame(rows, columns=columns)


def emit_curve_csv(curve: PiecewiseAffineCurve, sink: Sink, labels: Sequence[str],
                   points_per_interval: int = 20, demand_max: Optional[float] = None,
                   demands: Optional[Sequence[float]] = None, show_progress: bool = False) -> None:
    table = curve_samples_table(curve, labels, points_per_interval, demand_max, demands, show_progress)
    _write_frame(table, sink)


def emit_breakpoint_csv(curve: PiecewiseAffineCurve, sink: Sink, labels: Sequence[str]) -> None:
    _write_frame(breakpoint_table(curve, labels), sink)


def bp_reports_table(reports: Sequence[BPReport], labels: Sequence[str]) -> pd.DataFrame:
    base_columns = ["demand_low", "demand_high", "verdict", "condition", "candidate", "witness", "cost_gap"]
    rows = []
    for report in reports:
        row = report.to_dict(labels)
        # Nested details go into single JSON cells
        row = {k: (json.dumps(v) if isinstance(v, (list, dict)) else v) for k, v in row.items()}
        rows.append(row)
    frame = pd.DataFrame(rows)
    if frame.empty:
        return pd.DataFrame(columns=base_columns)
    # Fixed columns first, detail columns after in name order
    extra = sorted(c for c in frame.columns if c not in base_columns)
    return frame[base_columns + extra]


def emit_bp_reports_csv(reports: Sequence[BPReport], sink: Sink, labels: Sequence[str]) -> None:
    _write_frame(bp_reports_table(reports, labels), sink)


def scan_table(scans: Sequence[UnnecessarySetScan], labels: Sequence[str]) -> pd.DataFrame:
    rows = []
    for scan in scans:
        rows.append({
            "removed": _fmt_set(scan.removed, labels),
            "classification": scan.classification,
            "bp_windows": "; ".join(f"({lo:.6g}, {hi:.6g})" for lo, hi in scan.bp_windows),
            "unnecessary_from": scan.unnecessary_interval[0],
            "unnecessary_to": scan.unnecessary_interval[1],
            "necessary_again_above": scan.necessary_again_above,
        })
    return pd.DataFrame(rows, columns=["removed", "classification", "bp_windows", "unnecessary_from",
                                       "unnecessary_to", "necessary_again_above"])


def emit_measures_csv(measures: pd.DataFrame, sink: Sink) -> None:
    _write_frame(measures, sink)


@dataclass(frozen=True)
class CurveSeries:
    label: str
    demands: Sequence[float]
    values: Sequence[float]


def series_from_curve(curve: PiecewiseAffineCurve, label: str, demand_max: float,
                      points_per_interval: int = 20) -> CurveSeries:
    points = [d for d, _ in curve.samples(points_per_interval, demand_max)]
    return CurveSeries(label, points, [curve.evaluate(d) for d in points])


def render_svg(series: Sequence[CurveSeries], breakpoints: Sequence[float] = (),
               title: str = "", xlabel: str = "demand D", ylabel: str = "cost") -> str:
    """
    Render labeled polylines to an SVG document. Output is byte-for-byte
    reproducible for the same input.
    """
    if not series:
        raise ValueError("render_svg needs at least one series")

    # Fixed hash salt and no date keep the SVG bytes stable
    with plt.rc_context({"svg.hashsalt": "routing-game-analysis", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6.4, 4.0), dpi=100)
        try:
            for s in series:
                ax.plot(np.asarray(s.demands, dtype=float), np.asarray(s.values, dtype=float),
                        label=s.label, linewidth=1.5)
            # Breakpoints as the only x ticks
            ticks = sorted({round(float(b), 10) for b in breakpoints if np.isfinite(b)})
            if ticks:
                ax.set_xticks(ticks)
                ax.set_xticklabels([f"{t:g}" for t in ticks])
            ax.set_xlabel(xlabel)
            ax.set_ylabel(ylabel)
            if title:
                ax.set_title(title)
            ax.grid(True, linewidth=0.3)
            ax.legend(loc="best")
            buffer = io.StringIO()
            fig.savefig(buffer, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)
    return buffer.getvalue()


def save_svg(document: str, path: Union[str, Path]) -> str:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(document, encoding="utf-8")
    logger.info(f"SVG saved to {path}")
    return str(path)


def save_results(results: Dict, filename: str, output_dir: Union[str, Path] = "reports") -> str:
    """
    Save analysis results to a JSON file.

    Returns:
        str: Path to saved file
    """
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    filepath = output_dir / filename
    with open(filepath, "w", encoding="utf-8") as f:
        json.dump(results, f, indent=2, default=str)
    logger.info(f"Results saved to {filepath}")
    return str(filepath)


TEMPLATES = {
    "solve": """\
{{ rule }}
EQUILIBRIUM AT D = {{ "%g"|format(snapshot.demand) }} ({{ network }})
{{ rule }}
  WE cost:          {{ "%.10g"|format(snapshot.we_cost) }}
  Beckmann value:   {{ "%.10g"|format(snapshot.beckmann_value) }}
  Active set:       {{ snapshot.active_set|join(", ") }}
  Used set:         {{ snapshot.used_set|join(", ") or "(none)" }}
{% if snapshot.removed %}  Removed paths:    {{ snapshot.removed|join(", ") }}
{% endif %}
  {{ "%-24s"|format("path") }} {{ "%14s"|format("flow") }} {{ "%14s"|format("cost") }}
{% for label, flow in snapshot.flow.items() %}  {{ "%-24s"|format(label) }} {{ "%14.8g"|format(flow) }} {{ "%14.8g"|format(snapshot.cost_vector[label]) }}
{% endfor %}{{ rule }}
""",
    "sweep": """\
{{ rule }}
EQUILIBRIUM COST CURVE ({{ network }})
{{ rule }}
  Breakpoints: {{ breakpoints|join(", ") }}
{% for row in intervals %}
  [{{ "%g"|format(row.start) }}, {{ "%g"|format(row.end) }}): cost = {{ "%.8g"|format(row.slope) }}*D + {{ "%.8g"|format(row.intercept) }}
      active {{ row.active_set }}, used {{ row.used_set }}
{% endfor %}{{ rule }}
""",
    "final": """\
{{ rule }}
FINAL INTERVAL ({{ network }})
{{ rule }}
  WE cost for D >= {{ "%.10g"|format(final.last_breakpoint) }}: {{ "%.10g"|format(final.slope) }}*D + {{ "%.10g"|format(final.intercept) }}
  Final active set: {{ final.active_set|join(", ") }}
  Cost slopes:
{% for label, value in final.cost_slope.items() %}    {{ "%-24s"|format(label) }} {{ "%.10g"|format(value) }}
{% endfor %}{{ rule }}
""",
    "braess": """\
{{ rule }}
BRAESS'S PARADOX CHECKS AT D = {{ "%g"|format(demand) }} ({{ network }})
{{ rule }}
{% for report in reports %}  [{{ report.verdict }}] {{ report.condition }}{% if report.candidate %} candidate {{ "{" }}{{ report.candidate }}{{ "}" }}{% endif %} on [{{ "%.6g"|format(report.demand_low) }}, {{ "%.6g"|format(report.demand_high) }}]{% if report.witness %}; remove {{ "{" }}{{ report.witness }}{{ "}" }}{% endif %}{% if report.cost_gap is not none %}; gap {{ "%.6g"|format(report.cost_gap) }}{% endif %}
{% endfor %}{% if scans %}
  Removal sets unnecessary at D:
{% for scan in scans %}    {{ scan.removed }}: {{ scan.classification }}{% if scan.bp_windows %} windows {{ scan.bp_windows }}{% endif %}; unnecessary on [{{ "%.6g"|format(scan.unnecessary_from) }}, {{ "%.6g"|format(scan.unnecessary_to) }}]{% if scan.necessary_again_above is not none %}, necessary again above {{ "%.6g"|format(scan.necessary_again_above) }}{% endif %}
{% endfor %}{% endif %}
  BP_detected is a sufficient finding; no_evidence does not rule BP out.
{{ rule }}
""",
    "measures": """\
{{ rule }}
PATH MEASURES FOR REMOVING {{ removed }} ({{ network }})
{{ rule }}
  J(D) = {{ "%.10g"|format(J) }}   (>= 0)
  W(D) = {{ "%.10g"|format(W) }}   (<= 0)
  at D = {{ "%g"|format(demand) }}; BP demand bound {{ "%.6g"|format(bound) }}
{{ rule }}
""",
}

_environment = Environment(loader=DictLoader(TEMPLATES), undefined=StrictUndefined,
                           keep_trailing_newline=True)


def render_text_report(template_name: str, **context) -> str:
    """Render one of the built-in text report templates."""
    context.setdefault("rule", "=" * 60)
    return _environment.get_template(template_name).render(**context)
