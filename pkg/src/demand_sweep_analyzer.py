"""
Demand Sweep Analyzer Module

Follows the equilibrium of a game as demand grows from zero. Between
breakpoints every equilibrium quantity is affine in the demand; this module
computes the directions in which equilibrium flows move, the exact
breakpoints, and the closed form of the final unbounded interval.
"""

import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Tuple

import numpy as np

from convex_solvers import (
    Polyhedron,
    SolveStatus,
    SolverError,
    SolverTolerances,
    solve_lp,
    solve_qp,
    solve_vi,
)
from equilibrium_analyzer import EquilibriumAnalyzer, EquilibriumSnapshot, validate_demand
from network_processor import InvalidDemandError, PathCostModel, RoutingGameError

logger = logging.getLogger(__name__)

DEFAULT_BREAKPOINT_CAP = 10000
MERGE_TOL = 1e-8
FALLBACK_FLOW_SCALE = 10.0
FALLBACK_RETRIES = 6


class MaxBreakpointsError(RoutingGameError):
    """The curve trace found more breakpoints than the configured cap."""


def fallback_flow_bound(model: PathCostModel, reference_demand: float = 1.0) -> float:
    """
    First lower bound tried on carried flows when the final active-set
    program is unbounded. Grows with the demand and with the spread of
    free-flow costs over the smallest positive path curvature.
    """
    allowed = list(model.allowed)
    curvature = np.diag(model.A)[allowed]
    positive = curvature[curvature > 0]
    smallest = float(positive.min()) if positive.size else 1.0
    spread = float(np.ptp(model.beta[allowed]))
    return FALLBACK_FLOW_SCALE * (1 + reference_demand) * (1 + spread / smallest)


@dataclass(frozen=True, eq=False)
class DirectionPolytope:
    """
    Directions in which equilibrium flows move when demand increases
    (``sign`` = +1) or decreases (``sign`` = -1) from ``demand``.
    """

    base: Polyhedron
    solution: Polyhedron
    cost_direction: np.ndarray
    representative: np.ndarray
    sign: int
    demand: float
    active_set: FrozenSet[int]
    used_set: FrozenSet[int]

    @property
    def slope(self) -> float:
        """One-sided derivative of the equilibrium cost (right for +1, left for -1)."""
        smallest = min(self.cost_direction[p] for p in self.active_set)
        return float(smallest if self.sign > 0 else -smallest)


@dataclass(frozen=True, eq=False)
class CurveInterval:
    """One affine piece [start, end) of the equilibrium cost curve."""

    index: int
    start: float
    end: float
    slope: float
    cost_slope: np.ndarray
    active_set: FrozenSet[int]
    used_set: FrozenSet[int]
    start_cost_vector: np.ndarray
    start_we_cost: float

    @property
    def is_final(self) -> bool:
        return not np.isfinite(self.end)

    def we_cost(self, demand: float) -> float:
        return float(self.start_we_cost + (demand - self.start) * self.slope)

    def cost_vector(self, demand: float) -> np.ndarray:
        return self.start_cost_vector + (demand - self.start) * self.cost_slope

    @property
    def intercept(self) -> float:
        return float(self.start_we_cost - self.start * self.slope)


@dataclass(frozen=True, eq=False)
class PiecewiseAffineCurve:
    """
    Equilibrium cost curve from demand zero, as a list of affine pieces.

    A trace cut short by ``demand_max`` is not ``complete``; it still carries
    the closed form of the unbounded last piece in ``final_data``.
    """

    intervals: Tuple[CurveInterval, ...]
    complete: bool
    excluded: FrozenSet[int] = frozenset()
    final_data: Optional["FinalIntervalData"] = None

    @property
    def breakpoints(self) -> Tuple[float, ...]:
        points = [interval.start for interval in self.intervals]
        points.append(self.intervals[-1].end)
        return tuple(points)

    @property
    def finite_breakpoints(self) -> Tuple[float, ...]:
        return tuple(d for d in self.breakpoints if np.isfinite(d))

    @property
    def last_breakpoint(self) -> float:
        return self.intervals[-1].start

    @property
    def final(self) -> CurveInterval:
        return self.intervals[-1]

    @property
    def slopes(self) -> Tuple[float, ...]:
        return tuple(interval.slope for interval in self.intervals)

    def interval_index(self, demand: float) -> int:
        """Index of the piece containing ``demand`` (pieces are [start, end))."""
        if demand < 0:
            raise InvalidDemandError(f"Negative demand {demand}")
        for interval in self.intervals:
            if demand < interval.end:
                return interval.index
        if self.complete:
            return self.intervals[-1].index
        if demand == self.intervals[-1].end:
            return self.intervals[-1].index
        raise ValueError(f"Demand {demand} lies beyond the traced range (up to {self.intervals[-1].end})")

    def affine_extension(self, index: int) -> Tuple[float, float]:
        """Intercept and slope of piece ``index`` extended to every demand."""
        interval = self.intervals[index]
        return interval.intercept, interval.slope

    def evaluate(self, demand: float) -> float:
        """Equilibrium cost at ``demand``."""
        return self.intervals[self.interval_index(demand)].we_cost(demand)

    def cost_vector(self, demand: float) -> np.ndarray:
        return self.intervals[self.interval_index(demand)].cost_vector(demand)

    def potential(self, demand: float) -> float:
        """Integral of the equilibrium cost over [0, demand] (the Beckmann value)."""
        total = 0.0
        for interval in self.intervals:
            if demand <= interval.start:
                break
            upper = min(demand, interval.end)
            total += 0.5 * (interval.we_cost(interval.start) + interval.we_cost(upper)) * (upper - interval.start)
        return float(total)

    def samples(self, points_per_interval: int = 20, demand_max: Optional[float] = None) -> List[Tuple[float, int]]:
        """
        Demands at which to tabulate the curve: every breakpoint plus evenly
        spaced interior points, sorted and without repeats.
        """
        if demand_max is None:
            demand_max = self.last_breakpoint + max(1.0, self.last_breakpoint)
        points = []
        for interval in self.intervals:
            if interval.start > demand_max:
                break
            upper = min(interval.end, demand_max)
            grid = np.linspace(interval.start, upper, points_per_interval + 2)
            if upper == interval.end and upper < demand_max:
                grid = grid[:-1]
            points.extend((float(d), interval.index) for d in grid)
        unique = []
        for demand, index in points:
            if not unique or demand > unique[-1][0]:
                unique.append((demand, index))
        return unique


@dataclass(frozen=True, eq=False)
class FinalIntervalData:
    """Closed form of the equilibrium beyond the last breakpoint."""

    cost_slope: np.ndarray
    slope: float
    intercept: float
    active_set: FrozenSet[int]
    last_breakpoint: float
    direction: np.ndarray
    breakpoint_flow: np.ndarray

    def we_cost(self, demand: float) -> float:
        return float(self.slope * demand + self.intercept)

    def to_dict(self, labels: Optional[List[str]] = None) -> Dict:
        n = len(self.cost_slope)
        labels = labels or [f"p{p + 1}" for p in range(n)]
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "last_breakpoint": self.last_breakpoint,
            "active_set": [labels[p] for p in sorted(self.active_set)],
            "cost_slope": {labels[p]: float(self.cost_slope[p]) for p in range(n)},
            "direction": {labels[p]: float(self.direction[p]) for p in range(n)},
            "breakpoint_flow": {labels[p]: float(self.breakpoint_flow[p]) for p in range(n)},
        }


@dataclass(frozen=True)
class _Continuation:
    cost_slope: np.ndarray
    slope: float
    active_set: FrozenSet[int]
    end: float


class DemandSweepAnalyzer:
    """
    Class to trace equilibrium costs and flows over the whole demand range.
    """

    def __init__(self, model: PathCostModel, tolerances: Optional[SolverTolerances] = None,
                 breakpoint_cap: int = DEFAULT_BREAKPOINT_CAP, merge_tol: float = MERGE_TOL):
        """
        Initialize the DemandSweepAnalyzer.

        Args:
            model (PathCostModel): Cost model (possibly with removed paths)
            tolerances (SolverTolerances): Solver and classification tolerances
            breakpoint_cap (int): Maximum number of pieces before giving up
            merge_tol (float): Relative gap below which two breakpoints coincide
        """
        self.model = model
        self.tol = tolerances or SolverTolerances()
        self.breakpoint_cap = breakpoint_cap
        self.merge_tol = merge_tol
        self.equilibrium = EquilibriumAnalyzer(model, self.tol)
        self._curve: Optional[PiecewiseAffineCurve] = None
        self._final: Optional[FinalIntervalData] = None

    # ------------------------------------------------------------------
    # Directions of increase and decrease
    # ------------------------------------------------------------------

    def _direction_base(self, snapshot: EquilibriumSnapshot, total: float) -> Polyhedron:
        n = self.model.n
        off_active = [p for p in range(n) if p not in snapshot.active_set]
        unused_active = sorted(snapshot.active_set - snapshot.used_set)
        poly = Polyhedron.build(n, np.ones((1, n)), [total])
        return poly.fix_zero(off_active).nonnegative(unused_active)

    def _directions(self, snapshot: EquilibriumSnapshot, sign: int) -> DirectionPolytope:
        base = self._direction_base(snapshot, float(sign))
        try:
            report = solve_vi(base, self.model.A, np.zeros(self.model.n), self.tol)
            report.require_optimal(f"direction problem at D={snapshot.demand}")
        except SolverError as e:
            logger.error(f"Direction computation failed at D={snapshot.demand}: {e}")
            raise
        representative = report.x
        cost_direction = self.model.A @ representative
        solution = base.with_equalities(self.model.A, cost_direction)
        return DirectionPolytope(
            base=base,
            solution=solution,
            cost_direction=cost_direction,
            representative=representative,
            sign=sign,
            demand=snapshot.demand,
            active_set=snapshot.active_set,
            used_set=snapshot.used_set,
        )

    def directions_of_increase(self, snapshot: EquilibriumSnapshot) -> DirectionPolytope:
        """Directions along which equilibrium flows evolve as demand grows from the snapshot."""
        return self._directions(snapshot, +1)

    def directions_of_decrease(self, snapshot: EquilibriumSnapshot) -> DirectionPolytope:
        """Directions along which equilibrium flows evolve as demand shrinks from the snapshot."""
        if snapshot.demand <= 0:
            raise InvalidDemandError("Demand cannot decrease from zero")
        return self._directions(snapshot, -1)

    def slope_right(self, demand: float) -> float:
        return self.directions_of_increase(self.equilibrium.compute_we(demand)).slope

    def slope_left(self, demand: float) -> float:
        return self.directions_of_decrease(self.equilibrium.compute_we(demand)).slope

    # ------------------------------------------------------------------
    # Breakpoint continuation
    # ------------------------------------------------------------------

    def _next_breakpoint(self, snapshot: EquilibriumSnapshot, active: FrozenSet[int],
                         cost_slope: np.ndarray, slope: float) -> Optional[float]:
        """
        Largest demand T up to which the pieces started at the snapshot stay
        valid: maximize T over (f, T) with f supported on ``active``, active
        costs following their affine trend and all other costs above the
        equilibrium cost trend. Returns inf when unbounded and None when the
        program is infeasible.
        """
        n = self.model.n
        A, beta = self.model.A, self.model.beta
        D, lam_vec, lam = snapshot.demand, snapshot.cost_vector, snapshot.we_cost
        dim = n + 1

        eq_rows, eq_rhs = [], []
        row = np.ones(dim)
        row[n] = -1.0
        eq_rows.append(row)
        eq_rhs.append(0.0)
        for p in range(n):
            if p in active:
                row = np.zeros(dim)
                row[:n] = A[p]
                row[n] = -cost_slope[p]
                eq_rows.append(row)
                eq_rhs.append(lam_vec[p] - beta[p] - D * cost_slope[p])
            else:
                row = np.zeros(dim)
                row[p] = 1.0
                eq_rows.append(row)
                eq_rhs.append(0.0)

        ineq_rows, ineq_rhs = [], []
        for p in sorted(active):
            row = np.zeros(dim)
            row[p] = 1.0
            ineq_rows.append(row)
            ineq_rhs.append(0.0)
        row = np.zeros(dim)
        row[n] = 1.0
        ineq_rows.append(row)
        ineq_rhs.append(D)
        for r in self.model.allowed:
            if r in active:
                continue
            row = np.zeros(dim)
            row[:n] = A[r]
            row[n] = -slope
            ineq_rows.append(row)
            ineq_rhs.append(lam - beta[r] - D * slope)

        poly = Polyhedron.build(dim, np.array(eq_rows), eq_rhs, np.array(ineq_rows), ineq_rhs)
        objective = np.zeros(dim)
        objective[n] = 1.0
        report = solve_lp(poly, objective, sense="max", tolerances=self.tol)
        if report.status is SolveStatus.UNBOUNDED:
            return np.inf
        if report.status is SolveStatus.INFEASIBLE:
            return None
        return float(report.x[n])

    def _continue_from(self, snapshot: EquilibriumSnapshot) -> Optional[_Continuation]:
        direction = self.directions_of_increase(snapshot)
        cost_slope = direction.cost_direction
        slope = direction.slope
        threshold = self.tol.class_tol * (1 + np.abs(cost_slope).max(initial=0.0))
        active = frozenset(p for p in snapshot.active_set if cost_slope[p] - slope <= threshold)
        end = self._next_breakpoint(snapshot, active, cost_slope, slope)
        if end is None:
            return None
        return _Continuation(cost_slope, slope, active, end)

    def trace_curve(self, demand_max: float = np.inf) -> PiecewiseAffineCurve:
        """
        Compute every breakpoint and affine piece of the equilibrium cost.

        Args:
            demand_max (float): Stop after the piece containing this demand
                (the default traces up to the final unbounded piece)

        Returns:
            PiecewiseAffineCurve: pieces with slopes, cost slopes and sets; a
            trace stopped early also holds ``final_interval()`` as ``final_data``
        """
        if demand_max == np.inf and self._curve is not None:
            return self._curve
        logger.info(f"Tracing equilibrium curve ({self.model.n} paths, "
                    f"{len(self.model.excluded)} removed)")

        snapshot = self.equilibrium.compute_we(0.0)
        start = 0.0
        intervals: List[CurveInterval] = []
        complete = False

        while True:
            if len(intervals) >= self.breakpoint_cap:
                logger.error(f"Breakpoint cap {self.breakpoint_cap} reached at D={start}")
                raise MaxBreakpointsError(f"More than {self.breakpoint_cap} breakpoints")

            piece = self._continue_from(snapshot)
            if piece is None or piece.end - start < self.merge_tol * (1 + start):
                lookahead_demand = start + max(1e-6 * (1 + start), 100 * self.merge_tol * (1 + start))
                logger.warning(f"Coincident breakpoints near D={start:.10g}; continuing from D={lookahead_demand:.10g}")
                lookahead = self.equilibrium.compute_we(lookahead_demand)
                piece = self._continue_from(lookahead)
                if piece is None:
                    raise SolverError(f"Breakpoint program infeasible near D={start}")
                piece = _Continuation(piece.cost_slope, piece.slope, piece.active_set,
                                      max(piece.end, lookahead_demand))

            end = piece.end
            interior = start + 0.5 * (end - start) if np.isfinite(end) else start + max(1.0, start)
            interior_snapshot = self.equilibrium.compute_we(interior)
            active = piece.active_set
            if interior_snapshot.active_set != active:
                logger.warning(f"Active set on ({start:.6g}, {end:.6g}) is {sorted(interior_snapshot.active_set)}, "
                               f"breakpoint classification gave {sorted(active)}")
                active = interior_snapshot.active_set

            intervals.append(CurveInterval(
                index=len(intervals),
                start=start,
                end=end,
                slope=piece.slope,
                cost_slope=piece.cost_slope,
                active_set=active,
                used_set=interior_snapshot.used_set,
                start_cost_vector=snapshot.cost_vector,
                start_we_cost=snapshot.we_cost,
            ))

            if not np.isfinite(end):
                complete = True
                break
            logger.info(f"Found breakpoint D={end:.10g}")
            if end > demand_max:
                break
            snapshot = self.equilibrium.compute_we(end)
            start = end

        final_data = None
        if not complete:
            try:
                final_data = self.final_interval()
            except SolverError as e:
                logger.warning(f"Final interval unavailable for the partial trace: {e}")
        curve = PiecewiseAffineCurve(tuple(intervals), complete, self.model.excluded, final_data)
        if complete:
            self._curve = curve
        logger.info(f"Traced {len(intervals)} pieces, breakpoints {[round(d, 10) for d in curve.finite_breakpoints]}")
        return curve

    # ------------------------------------------------------------------
    # Final interval
    # ------------------------------------------------------------------

    def final_interval(self) -> FinalIntervalData:
        """
        Closed-form quantities of the unbounded last piece: cost slopes, the
        slope and intercept of the equilibrium cost, its active set and the
        last breakpoint, each from one dedicated LP/QP.
        """
        if self._final is not None:
            return self._final
        model = self.model
        n, A, beta = model.n, model.A, model.beta
        allowed = model.allowed
        excluded = sorted(model.excluded)
        tol = self.tol.class_tol

        unit_simplex = Polyhedron.simplex(n, 1.0, zero=excluded, nonnegative=allowed)
        vi_report = solve_vi(unit_simplex, A, np.zeros(n), self.tol).require_optimal("final cost slope")
        cost_slope = A @ vi_report.x
        slope = float(min(cost_slope[p] for p in allowed))

        offset_report = solve_lp(unit_simplex.with_equalities(A, cost_slope), beta,
                                 tolerances=self.tol).require_optimal("final intercept")
        direction = offset_report.x
        intercept = float(offset_report.objective)

        threshold = tol * (1 + abs(slope))
        carried = [p for p in allowed if direction[p] > tol]
        steeper = [p for p in allowed if direction[p] <= tol and cost_slope[p] - slope > threshold]
        level = [p for p in allowed if direction[p] <= tol and cost_slope[p] - slope <= threshold]

        active = self._final_active_set(carried, steeper, level, cost_slope, slope, intercept)
        last_breakpoint, breakpoint_flow = self._last_breakpoint(active)

        self._final = FinalIntervalData(
            cost_slope=cost_slope,
            slope=slope,
            intercept=intercept,
            active_set=active,
            last_breakpoint=last_breakpoint,
            direction=direction,
            breakpoint_flow=breakpoint_flow,
        )
        logger.info(f"Final interval: cost {slope:.6g}*D + {intercept:.6g} from D={last_breakpoint:.6g}, "
                    f"active {sorted(p + 1 for p in active)}")
        return self._final

    def _final_active_set(self, carried, steeper, level, cost_slope, slope, intercept,
                          reference_demand: float = 1.0) -> FrozenSet[int]:
        """
        Classify the final active set from a QP at a reference demand:
        paths carried by the final direction keep cost slope*D + intercept
        (their flow is unrestricted in sign), steeper paths carry nothing and
        level paths stay nonnegative with cost at least slope*D + intercept.
        """
        model = self.model
        n, A, beta = model.n, model.A, model.beta
        target = slope * reference_demand + intercept

        poly = Polyhedron.build(n, np.ones((1, n)), [reference_demand])
        poly = poly.fix_zero(sorted(set(steeper) | model.excluded))
        poly = poly.nonnegative(level)
        if carried:
            poly = poly.with_equalities(A[carried], target - beta[carried])
        if level:
            poly = poly.with_inequalities(A[level], target - beta[level])

        report = solve_qp(poly, 2.0 * A, beta, self.tol)
        if report.status is SolveStatus.UNBOUNDED and carried:
            # Costs are constant along the unbounded ray, so any feasible bound works
            rows = np.eye(n)[carried]
            bound = fallback_flow_bound(model, reference_demand)
            for _ in range(FALLBACK_RETRIES):
                logger.warning(f"Final active-set program unbounded; retrying with flows bounded below by -{bound:g}")
                report = solve_qp(poly.with_inequalities(rows, -bound * np.ones(len(carried))),
                                  2.0 * A, beta, self.tol)
                if report.status is not SolveStatus.INFEASIBLE:
                    break
                bound *= FALLBACK_FLOW_SCALE
        report.require_optimal("final active set")

        costs = model.path_costs(report.x)
        threshold = self.tol.class_tol * (1 + abs(target))
        slope_threshold = self.tol.class_tol * (1 + abs(slope))
        return frozenset(
            p for p in model.allowed
            if abs(cost_slope[p] - slope) <= slope_threshold and abs(costs[p] - target) <= threshold
        )

    def _last_breakpoint(self, active: FrozenSet[int]) -> Tuple[float, np.ndarray]:
        """Smallest demand at which exactly the final active paths are cheapest."""
        model = self.model
        n, A, beta = model.n, model.A, model.beta
        rows, rhs = [], []
        for p in sorted(active):
            for r in model.allowed:
                if r == p:
                    continue
                rows.append(A[r] - A[p])
                rhs.append(beta[p] - beta[r])
        off_active = [p for p in range(n) if p not in active]
        poly = Polyhedron.build(n).fix_zero(off_active).nonnegative(sorted(active))
        if rows:
            poly = poly.with_inequalities(np.array(rows), rhs)
        report = solve_lp(poly, np.ones(n), tolerances=self.tol).require_optimal("last breakpoint")
        flow = np.maximum(report.x, 0.0)
        return float(flow.sum()), flow
