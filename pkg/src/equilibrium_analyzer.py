"""
Equilibrium Analyzer Module

Computes Wardrop equilibria of a path cost model at one demand: the
representative flow from the Beckmann program, the equilibrium cost vector,
the active and used path sets, the polytope of all equilibria and the
necessary-set test.
"""

import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, Optional, Sequence

import numpy as np

from convex_solvers import (
    Polyhedron,
    SolverError,
    SolverTolerances,
    solve_lp,
    solve_qp,
)
from network_processor import InvalidDemandError, PathCostModel

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class EquilibriumSnapshot:
    """Everything known about the equilibria of one game at one demand."""

    demand: float
    flow: np.ndarray
    cost_vector: np.ndarray
    we_cost: float
    active_set: FrozenSet[int]
    used_set: FrozenSet[int]
    beckmann_value: float
    excluded: FrozenSet[int] = frozenset()

    def to_dict(self, labels: Optional[Sequence[str]] = None) -> Dict:
        n = len(self.flow)
        labels = list(labels) if labels is not None else [f"p{p + 1}" for p in range(n)]
        return {
            "demand": self.demand,
            "we_cost": self.we_cost,
            "beckmann_value": self.beckmann_value,
            "flow": {labels[p]: float(self.flow[p]) for p in range(n)},
            "cost_vector": {labels[p]: float(self.cost_vector[p]) for p in range(n)},
            "active_set": [labels[p] for p in sorted(self.active_set)],
            "used_set": [labels[p] for p in sorted(self.used_set)],
            "removed": [labels[p] for p in sorted(self.excluded)],
        }


@dataclass(frozen=True, eq=False)
class WEPolytope:
    """The set of all equilibria at one demand, as a polyhedron over path flows."""

    polyhedron: Polyhedron
    demand: float
    reference_flow: np.ndarray
    active_set: FrozenSet[int]


def validate_demand(demand: float) -> float:
    demand = float(demand)
    if not np.isfinite(demand) or demand < 0:
        raise InvalidDemandError(f"Demand must be a finite nonnegative number, got {demand}")
    return demand


class EquilibriumAnalyzer:
    """
    Main class for computing Wardrop equilibria of a (possibly modified) game.
    """

    def __init__(self, model: PathCostModel, tolerances: Optional[SolverTolerances] = None):
        """
        Initialize the EquilibriumAnalyzer.

        Args:
            model (PathCostModel): Cost model; its ``excluded`` paths carry no flow
            tolerances (SolverTolerances): Solver and classification tolerances
        """
        self.model = model
        self.tol = tolerances or SolverTolerances()

    def feasible_polyhedron(self, demand: float) -> Polyhedron:
        """Feasible flows of total ``demand`` with removed paths forced to zero."""
        return Polyhedron.simplex(self.model.n, demand, zero=self.model.excluded,
                                  nonnegative=self.model.allowed)

    def active_set(self, cost_vector: np.ndarray) -> FrozenSet[int]:
        """
        Paths whose cost is within the classification tolerance of the cheapest.

        Args:
            cost_vector (np.ndarray): Path costs at some flow

        Returns:
            FrozenSet[int]: indices of cheapest allowed paths
        """
        allowed = self.model.allowed
        we_cost = min(cost_vector[p] for p in allowed)
        threshold = self.tol.class_tol * (1 + abs(we_cost))
        return frozenset(p for p in allowed if cost_vector[p] - we_cost <= threshold)

    def compute_we(self, demand: float, seed: Optional[int] = None) -> EquilibriumSnapshot:
        """
        Compute the equilibrium snapshot at ``demand`` from the Beckmann program.

        Args:
            demand (float): Total origin-destination demand
            seed (int): When given, the path order is shuffled before solving,
                which may return a different equilibrium flow with the same costs

        Returns:
            EquilibriumSnapshot: flow, costs, active/used sets and potential
        """
        demand = validate_demand(demand)
        flow = self._beckmann_flow(demand, seed)

        # Costs are unique across equilibria even when flows are not
        cost_vector = self.model.path_costs(flow)
        allowed = self.model.allowed
        we_cost = float(min(cost_vector[p] for p in allowed))
        active = self.active_set(cost_vector)

        snapshot = EquilibriumSnapshot(
            demand=demand,
            flow=flow,
            cost_vector=cost_vector,
            we_cost=we_cost,
            active_set=active,
            used_set=frozenset(),
            beckmann_value=self.model.beckmann(flow),
            excluded=self.model.excluded,
        )
        # The used set needs the whole polytope, not just this flow
        used = self.used_set(self.we_polytope(snapshot))
        if not used <= active:
            logger.warning(f"Used set {sorted(used)} not inside active set {sorted(active)} at D={demand}")
            used = used & active
        logger.debug(f"WE at D={demand:g}: cost {we_cost:.6g}, active {sorted(active)}, used {sorted(used)}")
        return EquilibriumSnapshot(
            demand=demand,
            flow=flow,
            cost_vector=cost_vector,
            we_cost=we_cost,
            active_set=active,
            used_set=used,
            beckmann_value=snapshot.beckmann_value,
            excluded=self.model.excluded,
        )

    def _beckmann_flow(self, demand: float, seed: Optional[int]) -> np.ndarray:
        n = self.model.n
        if demand == 0.0:
            return np.zeros(n)

        # Shuffled path order, undone when reading the solution back
        order = np.arange(n)
        if seed is not None:
            order = np.random.default_rng(seed).permutation(n)
        position = np.empty(n, dtype=int)
        position[order] = np.arange(n)

        A = self.model.A[np.ix_(order, order)]
        beta = self.model.beta[order]
        excluded = [int(position[p]) for p in self.model.excluded]
        allowed = [int(position[p]) for p in self.model.allowed]
        poly = Polyhedron.simplex(n, demand, zero=excluded, nonnegative=allowed)

        try:
            report = solve_qp(poly, A, beta, self.tol).require_optimal(f"Beckmann program at D={demand}")
        except SolverError as e:
            logger.error(f"Equilibrium solve failed at D={demand}: {e}")
            raise

        # Clip solver noise and restore the exact total
        flow = np.maximum(report.x[position], 0.0)
        flow[list(self.model.excluded)] = 0.0
        total = flow.sum()
        if total > 0:
            flow *= demand / total
        return flow

    def we_polytope(self, snapshot: EquilibriumSnapshot) -> WEPolytope:
        """
        {f feasible : f = 0 off the active set, A f = A f^D}.
        """
        n = self.model.n
        off_active = [p for p in range(n) if p not in snapshot.active_set]
        poly = Polyhedron.simplex(n, snapshot.demand, zero=off_active, nonnegative=sorted(snapshot.active_set))
        # Every equilibrium has the same path costs
        poly = poly.with_equalities(self.model.A, self.model.A @ snapshot.flow)
        return WEPolytope(poly, snapshot.demand, snapshot.flow, snapshot.active_set)

    def we_polytope_by_edge_costs(self, snapshot: EquilibriumSnapshot) -> WEPolytope:
        """Feasible flows whose edge costs equal those of the reference equilibrium."""
        weighted = self.model.Q @ self.model.B
        poly = self.feasible_polyhedron(snapshot.demand)
        poly = poly.with_equalities(weighted, weighted @ snapshot.flow)
        return WEPolytope(poly, snapshot.demand, snapshot.flow, frozenset(self.model.allowed))

    def used_set(self, wep: WEPolytope) -> FrozenSet[int]:
        """Paths that carry positive flow in at least one equilibrium (one LP per path)."""
        threshold = self.tol.class_tol * (1 + wep.demand)
        used = set()
        for p in sorted(wep.active_set):
            if wep.reference_flow[p] > threshold:
                used.add(p)
                continue
            objective = np.zeros(wep.polyhedron.dim)
            objective[p] = 1.0
            report = solve_lp(wep.polyhedron, objective, sense="max", tolerances=self.tol)
            if not report.is_optimal:
                logger.warning(f"Used-set LP for path {p + 1} returned {report.status.value}")
                continue
            if report.objective > threshold:
                used.add(p)
        return frozenset(used)

    def is_necessary(self, wep: WEPolytope, removed: Iterable[int]) -> bool:
        """True when every equilibrium puts positive total flow on ``removed``."""
        removed = sorted(set(removed))
        if not removed:
            raise ValueError("is_necessary needs a non-empty path set")
        objective = np.zeros(wep.polyhedron.dim)
        objective[removed] = 1.0
        report = solve_lp(wep.polyhedron, objective, sense="min", tolerances=self.tol)
        if not report.is_optimal:
            logger.warning(f"Necessary-set LP returned {report.status.value}; treating set as necessary")
            return True
        return report.objective > self.tol.class_tol * (1 + wep.demand)

    def wardrop_gap(self, flow: Sequence[float]) -> float:
        """Largest excess cost of a path carrying flow over the cheapest allowed path."""
        flow = np.asarray(flow, dtype=float)
        costs = self.model.path_costs(flow)
        cheapest = min(costs[p] for p in self.model.allowed)
        carrying = [p for p in self.model.allowed if flow[p] > self.tol.class_tol]
        if not carrying:
            return 0.0
        return float(max(costs[p] - cheapest for p in carrying))

    def check_we(self, flow: Sequence[float], demand: float) -> bool:
        """Verify feasibility and the Wardrop condition for a path flow."""
        flow = np.asarray(flow, dtype=float)
        tol = self.tol.class_tol
        if flow.min(initial=0.0) < -tol * (1 + demand):
            return False
        if abs(flow.sum() - demand) > tol * (1 + demand):
            return False
        if any(abs(flow[p]) > tol for p in self.model.excluded):
            return False
        # Feasible, so only the Wardrop condition remains
        costs = self.model.path_costs(flow)
        return self.wardrop_gap(flow) <= tol * (1 + abs(costs.min()))


def compute_we(model: PathCostModel, demand: float,
               tolerances: Optional[SolverTolerances] = None) -> EquilibriumSnapshot:
    return EquilibriumAnalyzer(model, tolerances).compute_we(demand)
