"""
Braess Analyzer Module

Detects Braess's paradox: demands at which removing a set of paths strictly
lowers the equilibrium cost. Detectors range from cheap sufficient checks
(slope increase, paths losing flow) to comparisons against the affine pieces
of modified games, which reveal every occurrence when the right removal set
is among the candidates. Also computes the path-value measures J and W.
"""

import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from math import comb
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from convex_solvers import SolverError, SolverTolerances, solve_lp
from demand_sweep_analyzer import (
    DEFAULT_BREAKPOINT_CAP,
    MERGE_TOL,
    DemandSweepAnalyzer,
    PiecewiseAffineCurve,
)
from equilibrium_analyzer import EquilibriumSnapshot, WEPolytope, validate_demand
from network_processor import NoPathsLeftError, PathCostModel, RoutingGameError

logger = logging.getLogger(__name__)

GAP_TOL = 1e-6


class SubsetCapExceededError(RoutingGameError):
    """Subset enumeration would exceed the configured cap."""


class BPVerdict(Enum):
    BP_DETECTED = "BP_detected"
    NO_EVIDENCE = "no_evidence"


class BPCondition(Enum):
    SLOPE_INCREASE = "slope_increase"
    FLOW_LOSING = "flow_losing"
    EXTENSION_GAP = "extension_gap"
    EXPLICIT_MODIFIED_GAME = "explicit_modified_game"


@dataclass(frozen=True)
class ModifiedGame:
    """The base game with the flow on ``removed`` paths forced to zero."""

    base: PathCostModel
    removed: FrozenSet[int]

    def __post_init__(self):
        removed = frozenset(int(p) for p in self.removed)
        object.__setattr__(self, "removed", removed)
        if not removed:
            raise ValueError("A modified game must remove at least one path")
        if any(p < 0 or p >= self.base.n for p in removed):
            raise ValueError(f"Removed paths {sorted(p + 1 for p in removed)} out of range")
        if not set(self.base.allowed) - removed:
            raise NoPathsLeftError(f"Removing {sorted(p + 1 for p in removed)} leaves no path")

    @property
    def retained(self) -> FrozenSet[int]:
        return frozenset(self.base.allowed) - self.removed

    @property
    def model(self) -> PathCostModel:
        return self.base.with_excluded(self.removed)

    def label(self, labels: Optional[Sequence[str]] = None) -> str:
        labels = labels or [f"p{p + 1}" for p in range(self.base.n)]
        return "{" + ",".join(labels[p] for p in sorted(self.removed)) + "}"


@dataclass(frozen=True)
class AffineExtension:
    """One affine piece of a (modified) game's equilibrium cost extended to all demands."""

    removed: FrozenSet[int]
    index: int
    intercept: float
    slope: float
    start: float
    valid_until: float

    def __call__(self, demand: float) -> float:
        return float(self.intercept + self.slope * demand)

    def applies_at(self, demand: float) -> bool:
        """The extension bounds some game's equilibrium cost at demands up to the piece end."""
        return demand <= self.valid_until


@dataclass(frozen=True)
class UpperBoundWitness:
    """A removal set whose equilibrium cost at ``demand`` is at most ``bound``."""

    removed: FrozenSet[int]
    demand: float
    we_cost: float
    bound: float


@dataclass(frozen=True)
class BPReport:
    """Outcome of one detector at one demand or demand interval."""

    demand_low: float
    demand_high: float
    verdict: BPVerdict
    condition: BPCondition
    witness: Optional[FrozenSet[int]] = None
    cost_gap: Optional[float] = None
    candidate: Optional[FrozenSet[int]] = None
    details: Dict = field(default_factory=dict)

    @property
    def detected(self) -> bool:
        return self.verdict is BPVerdict.BP_DETECTED

    def to_dict(self, labels: Optional[Sequence[str]] = None) -> Dict:
        def names(paths):
            if paths is None:
                return None
            if labels is None:
                return ",".join(f"p{p + 1}" for p in sorted(paths))
            return ",".join(labels[p] for p in sorted(paths))

        return {
            "demand_low": self.demand_low,
            "demand_high": self.demand_high,
            "verdict": self.verdict.value,
            "condition": self.condition.value,
            "candidate": names(self.candidate),
            "witness": names(self.witness),
            "cost_gap": self.cost_gap,
            **{f"detail_{key}": value for key, value in self.details.items()},
        }


@dataclass(frozen=True)
class VRelation:
    base_value: float
    modified_value: float
    equal: bool


@dataclass(frozen=True)
class UnnecessarySetScan:
    """Classification of one removal set that is unnecessary at the scanned demand."""

    removed: FrozenSet[int]
    classification: str
    bp_windows: Tuple[Tuple[float, float], ...]
    unnecessary_interval: Tuple[float, float]
    necessary_again_above: Optional[float]

    UNNECESSARY_THROUGHOUT = "unnecessary_throughout"
    BP_WINDOW = "bp_window"
    INCONCLUSIVE = "inconclusive"


def difference_windows(upper: PiecewiseAffineCurve, lower: PiecewiseAffineCurve,
                       demand_max: float, gap_tol: float = GAP_TOL) -> List[Tuple[float, float]]:
    """
    Maximal demand intervals in [0, demand_max] on which ``upper`` exceeds
    ``lower`` by more than the gap tolerance. Both curves are affine between
    their merged breakpoints, so the windows are exact.
    """
    points = {0.0, float(demand_max)}
    for curve in (upper, lower):
        points.update(d for d in curve.finite_breakpoints if 0.0 < d < demand_max)
    points = sorted(points)

    windows: List[Tuple[float, float]] = []
    for a, b in zip(points[:-1], points[1:]):
        if b <= a:
            continue
        da = upper.evaluate(a) - lower.evaluate(a)
        db = upper.evaluate(b) - lower.evaluate(b)
        threshold = gap_tol * (1 + max(abs(upper.evaluate(a)), abs(upper.evaluate(b))))
        if da <= threshold and db <= threshold:
            continue
        lo, hi = a, b
        if da <= threshold:
            lo = a + (threshold - da) * (b - a) / (db - da)
        elif db <= threshold:
            hi = a + (threshold - da) * (b - a) / (db - da)
        if windows and abs(windows[-1][1] - lo) <= 1e-12 * (1 + lo):
            windows[-1] = (windows[-1][0], hi)
        else:
            windows.append((lo, hi))
    return windows


class BraessAnalyzer:
    """
    Main class for Braess's paradox detection on one base game.

    Sweeps of modified games are cached by removal set, so repeated
    detectors on the same game reuse traced curves.
    """

    def __init__(self, model: PathCostModel, tolerances: Optional[SolverTolerances] = None,
                 gap_tol: float = GAP_TOL, subset_scan_cap: int = 4096,
                 scan_grid_points: int = 200, breakpoint_cap: int = DEFAULT_BREAKPOINT_CAP,
                 merge_tol: float = MERGE_TOL, show_progress: bool = False):
        """
        Initialize the BraessAnalyzer.

        Args:
            model (PathCostModel): Base game
            tolerances (SolverTolerances): Solver and classification tolerances
            gap_tol (float): Relative margin for declaring a strict cost decrease
            subset_scan_cap (int): Maximum number of removal sets enumerated by a scan
            scan_grid_points (int): Grid resolution for necessity scans
            breakpoint_cap (int): Passed to every curve trace
            merge_tol (float): Relative gap below which breakpoints are merged
            show_progress (bool): Show tqdm progress bars over long loops
        """
        self.model = model
        self.tol = tolerances or SolverTolerances()
        self.gap_tol = gap_tol
        self.subset_scan_cap = subset_scan_cap
        self.scan_grid_points = scan_grid_points
        self.breakpoint_cap = breakpoint_cap
        self.merge_tol = merge_tol
        self.show_progress = show_progress
        self._sweeps: Dict[FrozenSet[int], DemandSweepAnalyzer] = {}
        self._we_polytopes: Dict[float, WEPolytope] = {}

    # ------------------------------------------------------------------
    # Modified games
    # ------------------------------------------------------------------

    def game(self, removed: Iterable[int]) -> ModifiedGame:
        """
        Build the modified game without ``removed``.

        Args:
            removed: Path indices to forbid

        Returns:
            ModifiedGame: validated removal of at least one, but not every, path
        """
        return ModifiedGame(self.model, frozenset(removed))

    def sweep(self, removed: Iterable[int] = ()) -> DemandSweepAnalyzer:
        """
        Demand sweep of the game without ``removed``, created once per removal set.

        Args:
            removed: Path indices to forbid (empty for the base game)

        Returns:
            DemandSweepAnalyzer: cached analyzer sharing this analyzer's tolerances
        """
        removed = frozenset(removed)
        if removed not in self._sweeps:
            model = self.model.with_excluded(removed) if removed else self.model
            self._sweeps[removed] = DemandSweepAnalyzer(model, self.tol, self.breakpoint_cap, self.merge_tol)
        return self._sweeps[removed]

    def curve(self, removed: Iterable[int] = ()) -> PiecewiseAffineCurve:
        return self.sweep(removed).trace_curve()

    def base_solve(self, demand: float) -> EquilibriumSnapshot:
        """
        Equilibrium snapshot of the base game.

        Args:
            demand (float): Total demand

        Returns:
            EquilibriumSnapshot: flows, costs and sets at ``demand``
        """
        return self.sweep().equilibrium.compute_we(demand)

    def modified_solve(self, game: ModifiedGame, demand: float) -> EquilibriumSnapshot:
        """Equilibrium snapshot of the modified game."""
        return self.sweep(game.removed).equilibrium.compute_we(demand)

    def check_v_relations(self, game: ModifiedGame, demand: float) -> VRelation:
        """
        Compare the Beckmann values of the base and modified games. Removing
        paths can only raise the potential; equality holds exactly when the
        removed set is unnecessary.
        """
        base_value = self.base_solve(demand).beckmann_value
        modified_value = self.modified_solve(game, demand).beckmann_value
        slack = self.tol.class_tol * (1 + abs(base_value))
        if base_value > modified_value + slack:
            logger.error(f"Potential of modified game {sorted(game.removed)} below base game at D={demand}: "
                         f"{modified_value} < {base_value}")
            raise SolverError("Modified game potential below base potential")
        return VRelation(base_value, modified_value, abs(modified_value - base_value) <= slack)

    # ------------------------------------------------------------------
    # Affine extensions and the explicit upper-bound game
    # ------------------------------------------------------------------

    def affine_extensions(self, removed: Iterable[int] = ()) -> List[AffineExtension]:
        removed = frozenset(removed)
        curve = self.curve(removed)
        return [
            AffineExtension(removed, interval.index, *curve.affine_extension(interval.index),
                            interval.start, interval.end)
            for interval in curve.intervals
        ]

    def upper_bound_game(self, removed: Iterable[int], index: int, demand: float) -> UpperBoundWitness:
        """
        Construct a removal set whose equilibrium cost at ``demand`` is at most
        the affine extension of piece ``index`` of the game without ``removed``.

        Repeatedly restricts the game to the used set of the current piece;
        the restricted game follows the extension on a piece reaching further
        down, and when that piece still starts above ``demand`` the search
        continues from the piece just below it.
        """
        removed = frozenset(removed)
        curve = self.curve(removed)
        interval = curve.intervals[index]
        if demand > interval.end:
            raise ValueError(f"Extension of piece {index} only applies up to D={interval.end}")
        bound = interval.intercept + interval.slope * demand

        everything = frozenset(range(self.model.n))
        for _ in range(self.model.n * (len(curve.intervals) + 1) + 1):
            restricted = everything - interval.used_set
            restricted_curve = self.curve(restricted)
            upper = interval.end if np.isfinite(interval.end) else interval.start + 2.0
            midpoint = 0.5 * (interval.start + upper)
            j = restricted_curve.interval_index(midpoint)
            piece = restricted_curve.intervals[j]
            if piece.start <= 0.0 or demand >= piece.start or j == 0:
                we_cost = restricted_curve.evaluate(demand)
                logger.debug(f"Upper-bound game at D={demand}: remove {sorted(restricted)}, cost {we_cost:.6g}")
                return UpperBoundWitness(restricted, demand, we_cost, bound)
            curve, interval = restricted_curve, restricted_curve.intervals[j - 1]

        raise SolverError("Upper-bound game search did not terminate")

    # ------------------------------------------------------------------
    # Detectors
    # ------------------------------------------------------------------

    def detect_slope_increase(self, curve: Optional[PiecewiseAffineCurve] = None) -> List[BPReport]:
        """One report per breakpoint at which the equilibrium cost gets steeper."""
        curve = curve or self.curve()
        reports = []
        for i in range(1, len(curve.intervals)):
            before, after = curve.intervals[i - 1], curve.intervals[i]
            if before.slope < after.slope - self.tol.class_tol * (1 + abs(after.slope)):
                midpoint = 0.5 * (before.start + after.start)
                witness = self.upper_bound_game(curve.excluded, i, midpoint)
                gap = curve.evaluate(midpoint) - witness.we_cost
                reports.append(BPReport(
                    demand_low=before.start,
                    demand_high=after.start,
                    verdict=BPVerdict.BP_DETECTED,
                    condition=BPCondition.SLOPE_INCREASE,
                    witness=witness.removed,
                    cost_gap=float(gap),
                    details={"breakpoint": after.start, "slope_before": before.slope,
                             "slope_after": after.slope, "witness_demand": midpoint},
                ))
                logger.info(f"Slope increases at D={after.start:.6g} ({before.slope:.6g} -> {after.slope:.6g}): "
                            f"BP on [{before.start:.6g}, {after.start:.6g})")
        return reports

    def detect_flow_losing(self, snapshot) -> BPReport:
        """
        BP at the snapshot's demand when no direction of increase keeps every
        path flow nonnegative. Accepts a snapshot or a demand.
        """
        if not isinstance(snapshot, EquilibriumSnapshot):
            snapshot = self.base_solve(snapshot)
        direction = self.sweep(snapshot.excluded).directions_of_increase(snapshot)
        poly = direction.solution.nonnegative(range(self.model.n))
        report = solve_lp(poly, np.zeros(self.model.n), tolerances=self.tol)
        losing = not report.is_optimal
        details = {
            "cost_direction": np.round(direction.cost_direction, 12).tolist(),
            "representative_direction": np.round(direction.representative, 12).tolist(),
        }
        return BPReport(
            demand_low=snapshot.demand,
            demand_high=snapshot.demand,
            verdict=BPVerdict.BP_DETECTED if losing else BPVerdict.NO_EVIDENCE,
            condition=BPCondition.FLOW_LOSING,
            details=details,
        )

    def extension_gap(self, candidates: Sequence[Iterable[int]], demand: float) -> List[BPReport]:
        """
        Compare the equilibrium cost at ``demand`` with the affine extensions
        of the base game (always) and of each candidate modified game.

        Each extension that still applies at ``demand`` bounds the equilibrium
        cost of some modified game from above, so an extension below the
        equilibrium cost reveals BP. The removal set achieving it is rebuilt
        explicitly and reported as the witness.
        """
        demand = validate_demand(demand)
        we_cost = self.base_solve(demand).we_cost
        reports = [self._extension_report(frozenset(), demand, we_cost)]
        for candidate in tqdm(list(candidates), desc="Candidates", disable=not self.show_progress):
            candidate = frozenset(candidate)
            try:
                self.game(candidate)
                reports.append(self._extension_report(candidate, demand, we_cost))
            except RoutingGameError as e:
                logger.warning(f"Candidate {sorted(p + 1 for p in candidate)} failed: {e}")
                reports.append(BPReport(demand, demand, BPVerdict.NO_EVIDENCE, BPCondition.EXTENSION_GAP,
                                        candidate=candidate, details={"error": str(e)}))
            except ValueError as e:
                logger.warning(f"Candidate {sorted(p + 1 for p in candidate)} rejected: {e}")
        return reports

    def _extension_report(self, candidate: FrozenSet[int], demand: float, we_cost: float) -> BPReport:
        extensions = [e for e in self.affine_extensions(candidate) if e.applies_at(demand)]
        best = min(extensions, key=lambda e: (e(demand), -e.index))
        gap = we_cost - best(demand)
        detected = gap > self.gap_tol * (1 + abs(we_cost))
        details = {"extension_index": best.index, "extension_value": best(demand),
                   "extension_slope": best.slope, "extension_intercept": best.intercept}
        witness = None
        if detected:
            explicit = self.upper_bound_game(candidate, best.index, demand)
            details["witness_cost"] = explicit.we_cost
            if explicit.removed and explicit.we_cost < we_cost - self.gap_tol * (1 + abs(we_cost)):
                witness = explicit.removed
            else:
                witness = candidate or None
        return BPReport(
            demand_low=demand,
            demand_high=demand,
            verdict=BPVerdict.BP_DETECTED if detected else BPVerdict.NO_EVIDENCE,
            condition=BPCondition.EXTENSION_GAP,
            witness=witness,
            cost_gap=float(gap),
            candidate=candidate,
            details=details,
        )

    def explicit_comparison(self, game: ModifiedGame, demand: float) -> BPReport:
        """Direct comparison of base and modified equilibrium costs at one demand."""
        we_cost = self.base_solve(demand).we_cost
        modified_cost = self.modified_solve(game, demand).we_cost
        gap = we_cost - modified_cost
        detected = gap > self.gap_tol * (1 + abs(we_cost))
        return BPReport(demand, demand,
                        BPVerdict.BP_DETECTED if detected else BPVerdict.NO_EVIDENCE,
                        BPCondition.EXPLICIT_MODIFIED_GAME,
                        witness=game.removed if detected else None,
                        cost_gap=float(gap), candidate=game.removed)

    def default_candidates(self) -> List[FrozenSet[int]]:
        """All single paths plus the complement of every traced used set."""
        allowed = frozenset(self.model.allowed)
        candidates = [frozenset([p]) for p in sorted(allowed)]
        for interval in self.curve().intervals:
            complement = allowed - interval.used_set
            if complement and complement != allowed and complement not in candidates:
                candidates.append(complement)
        return [c for c in candidates if allowed - c]

    def scan_unnecessary(self, demand: float, max_subset_size: int) -> List[UnnecessarySetScan]:
        """
        Enumerate removal sets up to ``max_subset_size`` paths that are
        unnecessary at ``demand`` and classify what happens at lower demand:
        either the set stays unnecessary all the way down, or removing it
        strictly lowers the equilibrium cost on some window below ``demand``.
        """
        demand = validate_demand(demand)
        allowed = list(self.model.allowed)
        sizes = range(1, min(max_subset_size, len(allowed) - 1) + 1)
        total = sum(comb(len(allowed), k) for k in sizes)
        if total > self.subset_scan_cap:
            raise SubsetCapExceededError(
                f"{total} removal sets of size <= {max_subset_size} exceed the cap {self.subset_scan_cap}"
            )

        equilibrium = self.sweep().equilibrium
        wep = self._we_polytope_at(demand)
        subsets = [frozenset(s) for k in sizes for s in itertools.combinations(allowed, k)]
        results = []
        for removed in tqdm(subsets, desc="Removal sets", disable=not self.show_progress):
            if equilibrium.is_necessary(wep, removed):
                continue
            try:
                results.append(self._classify_unnecessary(removed, demand))
            except RoutingGameError as e:
                logger.warning(f"Scan of {sorted(p + 1 for p in removed)} inconclusive: {e}")
                results.append(UnnecessarySetScan(removed, UnnecessarySetScan.INCONCLUSIVE, (),
                                                  (demand, demand), None))
        logger.info(f"{len(results)} of {len(subsets)} removal sets unnecessary at D={demand:g}")
        return results

    def _classify_unnecessary(self, removed: FrozenSet[int], demand: float) -> UnnecessarySetScan:
        base, modified = self.curve(), self.curve(removed)
        windows = tuple(difference_windows(base, modified, demand, self.gap_tol))
        classification = (UnnecessarySetScan.BP_WINDOW if windows
                          else UnnecessarySetScan.UNNECESSARY_THROUGHOUT)

        # Breakpoints of both games sit on the grid
        upper = max(2.0 * demand, base.last_breakpoint + 1.0, modified.last_breakpoint + 1.0)
        grid = set(np.linspace(0.0, upper, self.scan_grid_points).tolist())
        for curve in (base, modified):
            for a, b in zip(curve.breakpoints[:-1], curve.breakpoints[1:]):
                grid.add(a)
                if np.isfinite(b):
                    grid.add(0.5 * (a + b))
        grid.add(demand)
        grid = sorted(d for d in grid if d <= upper)

        equilibrium = self.sweep().equilibrium

        def unnecessary(d: float) -> bool:
            return not equilibrium.is_necessary(self._we_polytope_at(d), removed)

        position = grid.index(demand)
        lo = hi = position
        while lo > 0 and unnecessary(grid[lo - 1]):
            lo -= 1
        while hi < len(grid) - 1 and unnecessary(grid[hi + 1]):
            hi += 1
        necessary_again = grid[hi + 1] if hi < len(grid) - 1 else None
        return UnnecessarySetScan(removed, classification, windows, (grid[lo], grid[hi]), necessary_again)

    def _we_polytope_at(self, demand: float) -> WEPolytope:
        """Equilibrium polytope of the base game, cached by demand."""
        if demand not in self._we_polytopes:
            equilibrium = self.sweep().equilibrium
            self._we_polytopes[demand] = equilibrium.we_polytope(equilibrium.compute_we(demand))
        return self._we_polytopes[demand]

    def benefit_windows(self, game: ModifiedGame, demand: float) -> List[Tuple[float, float]]:
        """Windows in [0, demand] on which the removed paths strictly help (base cheaper)."""
        return difference_windows(self.curve(game.removed), self.curve(), demand, self.gap_tol)

    def bp_windows(self, game: ModifiedGame, demand: float) -> List[Tuple[float, float]]:
        """Windows in [0, demand] on which removing the paths strictly lowers the cost."""
        return difference_windows(self.curve(), self.curve(game.removed), demand, self.gap_tol)

    def bp_demand_bound(self, game: ModifiedGame) -> float:
        """
        Demand beyond which removing ``game.removed`` never lowers the
        equilibrium cost, from the final affine forms of both games.
        """
        base = self.sweep().final_interval()
        modified = self.sweep(game.removed).final_interval()
        start = max(base.last_breakpoint, modified.last_breakpoint)
        slope_gap = modified.slope - base.slope
        intercept_gap = modified.intercept - base.intercept
        scale = 1 + abs(base.slope) + abs(base.intercept)

        if abs(slope_gap) <= self.tol.class_tol * scale:
            if intercept_gap >= -self.gap_tol * scale:
                return float(start)
            logger.warning("Modified game stays cheaper on the whole final interval")
            return float("inf")
        if slope_gap < 0:
            logger.warning("Modified game's final slope is smaller than the base slope")
            return float("inf")
        crossing = -intercept_gap / slope_gap
        return float(max(crossing, start))

    # ------------------------------------------------------------------
    # Measures
    # ------------------------------------------------------------------

    def _integrate_difference(self, game: ModifiedGame, demand: float, weighted: bool) -> float:
        base, modified = self.curve(), self.curve(game.removed)
        points = {0.0, float(demand)}
        for curve in (base, modified):
            points.update(d for d in curve.finite_breakpoints if 0.0 < d < demand)
        points = sorted(points)

        total = 0.0
        for a, b in zip(points[:-1], points[1:]):
            da = modified.evaluate(a) - base.evaluate(a)
            db = modified.evaluate(b) - base.evaluate(b)
            if b <= a:
                continue
            if not weighted:
                total += 0.5 * (da + db) * (b - a)
            else:
                q = (db - da) / (b - a)
                p = da - q * a
                total += p * (b * b - a * a) / 2.0 + q * (b ** 3 - a ** 3) / 3.0
        return float(total)

    def measure_J(self, game: ModifiedGame, demand: float) -> float:
        """Integral over [0, demand] of the cost increase caused by removing the paths."""
        demand = validate_demand(demand)
        value = self._integrate_difference(game, demand, weighted=False)
        relation = self.check_v_relations(game, demand)
        direct = relation.modified_value - relation.base_value
        if abs(value - direct) > 1e-8 * (1 + abs(relation.base_value)):
            logger.warning(f"J({demand}) = {value:.12g} differs from potential gap {direct:.12g}")
        return value

    def measure_W(self, game: ModifiedGame, demand: float) -> float:
        """Demand-weighted integral over [0, demand] of the cost increase caused by removal."""
        demand = validate_demand(demand)
        return self._integrate_difference(game, demand, weighted=True)

    def measure_curves(self, game: ModifiedGame, demand_max: float, points: int = 50) -> pd.DataFrame:
        """J and W tabulated on a grid that includes every breakpoint below demand_max."""
        grid = set(np.linspace(0.0, demand_max, points).tolist())
        for curve in (self.curve(), self.curve(game.removed)):
            grid.update(d for d in curve.finite_breakpoints if d <= demand_max)
        rows = []
        for d in sorted(grid):
            rows.append({
                "D": d,
                "lambda_we": self.curve().evaluate(d),
                "lambda_we_modified": self.curve(game.removed).evaluate(d),
                "J": self._integrate_difference(game, d, weighted=False),
                "W": self._integrate_difference(game, d, weighted=True),
            })
        return pd.DataFrame(rows, columns=["D", "lambda_we", "lambda_we_modified", "J", "W"])
