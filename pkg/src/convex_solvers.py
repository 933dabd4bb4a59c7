"""
Convex Solver Module

Small dense solvers used by the equilibrium and sweep analyzers:

- ``solve_lp``: two-phase primal simplex with Bland's rule
- ``solve_qp``: primal active-set method for convex quadratics, seeded by a
  phase-1 LP
- ``solve_vi``: affine variational inequality with symmetric PSD matrix,
  solved as the equivalent QP

All solvers work on a ``Polyhedron`` {x : E x = e, G x >= h}.
"""

import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from network_processor import DimensionMismatchError, RoutingGameError

logger = logging.getLogger(__name__)


class SolverError(RoutingGameError):
    """Base class for solver failures."""


class InfeasibleProblemError(SolverError):
    pass


class UnboundedProblemError(SolverError):
    pass


class MaxIterationsError(SolverError):
    pass


class SolveStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class SolverTolerances:
    """Numerical tolerances shared by every solver and analyzer."""

    kkt_tol: float = 1e-9
    feas_tol: float = 1e-9
    class_tol: float = 1e-7
    pivot_tol: float = 1e-11
    curvature_tol: float = 1e-10
    max_iterations: int = 10000


@dataclass(frozen=True, eq=False)
class Polyhedron:
    """
    Polyhedron {x in R^dim : eq_matrix x = eq_rhs, ineq_matrix x >= ineq_rhs}.

    May be empty; emptiness is detected by the solvers.
    """

    dim: int
    eq_matrix: np.ndarray
    eq_rhs: np.ndarray
    ineq_matrix: np.ndarray
    ineq_rhs: np.ndarray

    def __post_init__(self):
        if self.eq_matrix.shape != (len(self.eq_rhs), self.dim):
            raise DimensionMismatchError(
                f"Equality block {self.eq_matrix.shape} does not match rhs {len(self.eq_rhs)} / dim {self.dim}"
            )
        if self.ineq_matrix.shape != (len(self.ineq_rhs), self.dim):
            raise DimensionMismatchError(
                f"Inequality block {self.ineq_matrix.shape} does not match rhs {len(self.ineq_rhs)} / dim {self.dim}"
            )

    @classmethod
    def build(cls, dim: int, eq_matrix=None, eq_rhs=None, ineq_matrix=None, ineq_rhs=None) -> "Polyhedron":
        def block(matrix, rhs):
            if matrix is None:
                return np.zeros((0, dim)), np.zeros(0)
            matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
            if matrix.size == 0:
                matrix = matrix.reshape(0, dim)
            return matrix, np.asarray(rhs, dtype=float).reshape(-1)

        E, e = block(eq_matrix, eq_rhs)
        G, h = block(ineq_matrix, ineq_rhs)
        return cls(dim, E, e, G, h)

    @classmethod
    def simplex(cls, dim: int, total: float, zero: Sequence[int] = (),
                nonnegative: Optional[Sequence[int]] = None) -> "Polyhedron":
        """{x : sum x = total, x_i = 0 for i in zero, x_i >= 0 for i in nonnegative}."""
        if nonnegative is None:
            nonnegative = range(dim)
        poly = cls.build(dim, np.ones((1, dim)), [total])
        return poly.fix_zero(zero).nonnegative(nonnegative)

    @property
    def num_eq(self) -> int:
        return len(self.eq_rhs)

    @property
    def num_ineq(self) -> int:
        return len(self.ineq_rhs)

    def with_equalities(self, matrix, rhs) -> "Polyhedron":
        matrix = np.atleast_2d(np.asarray(matrix, dtype=float)).reshape(-1, self.dim)
        return Polyhedron(self.dim, np.vstack([self.eq_matrix, matrix]),
                          np.concatenate([self.eq_rhs, np.asarray(rhs, dtype=float).reshape(-1)]),
                          self.ineq_matrix, self.ineq_rhs)

    def with_inequalities(self, matrix, rhs) -> "Polyhedron":
        matrix = np.atleast_2d(np.asarray(matrix, dtype=float)).reshape(-1, self.dim)
        return Polyhedron(self.dim, self.eq_matrix, self.eq_rhs,
                          np.vstack([self.ineq_matrix, matrix]),
                          np.concatenate([self.ineq_rhs, np.asarray(rhs, dtype=float).reshape(-1)]))

    def fix_zero(self, indices: Sequence[int]) -> "Polyhedron":
        indices = sorted(set(indices))
        if not indices:
            return self
        return self.with_equalities(np.eye(self.dim)[indices], np.zeros(len(indices)))

    def nonnegative(self, indices: Sequence[int]) -> "Polyhedron":
        indices = sorted(set(indices))
        if not indices:
            return self
        return self.with_inequalities(np.eye(self.dim)[indices], np.zeros(len(indices)))

    def contains(self, x: Sequence[float], tol: float = 1e-9) -> bool:
        x = np.asarray(x, dtype=float)
        eq_ok = np.all(np.abs(self.eq_matrix @ x - self.eq_rhs) <= tol * (1 + np.abs(self.eq_rhs)))
        ineq_ok = np.all(self.ineq_matrix @ x - self.ineq_rhs >= -tol * (1 + np.abs(self.ineq_rhs)))
        return bool(eq_ok and ineq_ok)


@dataclass(frozen=True, eq=False)
class SolveReport:
    """Outcome of one LP/QP/VI solve."""

    status: SolveStatus
    x: Optional[np.ndarray] = None
    objective: Optional[float] = None
    active_constraints: Tuple[int, ...] = ()
    iterations: int = 0
    dual_eq: Optional[np.ndarray] = None
    dual_ineq: Optional[np.ndarray] = None
    message: str = ""

    @property
    def is_optimal(self) -> bool:
        return self.status is SolveStatus.OPTIMAL

    def require_optimal(self, context: str = "") -> "SolveReport":
        """Return self, or raise the SolverError matching the status."""
        if self.status is SolveStatus.OPTIMAL:
            return self
        prefix = f"{context}: " if context else ""
        if self.status is SolveStatus.INFEASIBLE:
            raise InfeasibleProblemError(f"{prefix}problem is infeasible {self.message}".strip())
        raise UnboundedProblemError(f"{prefix}problem is unbounded {self.message}".strip())


def _active_indices(poly: Polyhedron, x: np.ndarray, tol: float) -> Tuple[int, ...]:
    if poly.num_ineq == 0:
        return ()
    slack = poly.ineq_matrix @ x - poly.ineq_rhs
    return tuple(int(i) for i in np.flatnonzero(np.abs(slack) <= tol * (1 + np.abs(poly.ineq_rhs))))


class SimplexSolver:
    """
    Dense two-phase primal simplex with Bland's anti-cycling rule.

    The polyhedron is brought to standard form: inequality rows that are plain
    sign bounds x_j >= 0 become nonnegative variables, every other variable is
    split into a difference of two nonnegative ones, and the remaining
    inequality rows receive surplus variables.
    """

    def __init__(self, tolerances: Optional[SolverTolerances] = None):
        self.tol = tolerances or SolverTolerances()

    def solve(self, poly: Polyhedron, c: Sequence[float], sense: str = "min") -> SolveReport:
        c = np.asarray(c, dtype=float).reshape(-1)
        if c.shape != (poly.dim,):
            raise DimensionMismatchError(f"Objective of length {len(c)} for a {poly.dim}-dimensional polyhedron")
        if sense not in ("min", "max"):
            raise ValueError(f"Unknown sense '{sense}'")
        cost = -c if sense == "max" else c

        std = _StandardForm(poly)
        A, b, c_std = std.A, std.b, std.objective(cost)
        m, N = A.shape

        # Phase 1 tableau: [A | I | b]
        tableau = np.zeros((m + 1, N + m + 1))
        tableau[:m, :N] = A
        tableau[:m, N:N + m] = np.eye(m)
        tableau[:m, -1] = b
        tableau[m, :N] = -A.sum(axis=0)
        tableau[m, -1] = -b.sum()
        basis = list(range(N, N + m))

        status, iterations = self._iterate(tableau, basis, N + m)
        phase1_value = -tableau[m, -1]
        if phase1_value > self.tol.feas_tol * (1 + np.abs(b).sum()):
            logger.debug(f"Phase 1 ended with infeasibility {phase1_value:.3e}")
            return SolveReport(SolveStatus.INFEASIBLE, iterations=iterations)

        tableau, basis, rows = self._drive_out_artificials(tableau, basis, N)
        iterations_total = iterations

        # Phase 2 objective row
        m2 = len(basis)
        tableau = np.hstack([tableau[:, :N], tableau[:, -1:]])
        tableau[m2, :] = 0.0
        tableau[m2, :N] = c_std
        tableau[m2, -1] = 0.0
        for i, j in enumerate(basis):
            tableau[m2, :] -= c_std[j] * tableau[i, :]

        status, iterations = self._iterate(tableau, basis, N)
        iterations_total += iterations
        if status is SolveStatus.UNBOUNDED:
            return SolveReport(SolveStatus.UNBOUNDED, iterations=iterations_total)

        y = np.zeros(N)
        y_basis = tableau[:m2, -1].copy()
        basis_matrix = A[np.ix_(rows, basis)] if m2 else np.zeros((0, 0))
        if m2:
            try:
                polished = np.linalg.solve(basis_matrix, b[rows])
                if np.all(np.abs(polished - y_basis) <= 1e-6 * (1 + np.abs(y_basis))):
                    y_basis = polished
            except np.linalg.LinAlgError:
                logger.debug("Basis matrix singular during polishing; keeping tableau values")
        y[basis] = np.maximum(y_basis, 0.0)
        x = std.recover(y)

        dual_eq, dual_ineq = std.duals(cost, basis, rows, basis_matrix)
        logger.debug(f"Simplex finished after {iterations_total} pivots")
        return SolveReport(
            SolveStatus.OPTIMAL,
            x=x,
            objective=float(c @ x),
            active_constraints=_active_indices(poly, x, self.tol.feas_tol),
            iterations=iterations_total,
            dual_eq=dual_eq,
            dual_ineq=dual_ineq,
        )

    def _iterate(self, tableau: np.ndarray, basis: List[int], num_cols: int) -> Tuple[SolveStatus, int]:
        m = len(basis)
        for iteration in range(self.tol.max_iterations):
            reduced = tableau[m, :num_cols]
            scale = 1.0 + np.abs(reduced).max(initial=0.0)
            candidates = np.flatnonzero(reduced < -self.tol.kkt_tol * scale)
            if candidates.size == 0:
                return SolveStatus.OPTIMAL, iteration
            entering = int(candidates[0])

            column = tableau[:m, entering]
            rows = np.flatnonzero(column > self.tol.pivot_tol)
            if rows.size == 0:
                return SolveStatus.UNBOUNDED, iteration
            ratios = tableau[rows, -1] / column[rows]
            best = ratios.min()
            ties = rows[ratios <= best + self.tol.pivot_tol * (1 + abs(best))]
            leaving_row = int(min(ties, key=lambda r: basis[r]))
            self._pivot(tableau, leaving_row, entering)
            basis[leaving_row] = entering

        logger.error(f"Simplex hit the iteration limit ({self.tol.max_iterations})")
        raise MaxIterationsError(f"Simplex exceeded {self.tol.max_iterations} iterations")

    @staticmethod
    def _pivot(tableau: np.ndarray, row: int, col: int) -> None:
        tableau[row, :] /= tableau[row, col]
        pivot_row = tableau[row, :]
        for i in range(tableau.shape[0]):
            if i != row and tableau[i, col] != 0.0:
                tableau[i, :] -= tableau[i, col] * pivot_row

    def _drive_out_artificials(self, tableau: np.ndarray, basis: List[int], N: int):
        m = len(basis)
        keep = []
        for i in range(m):
            if basis[i] < N:
                keep.append(i)
                continue
            row = tableau[i, :N]
            candidates = np.flatnonzero(np.abs(row) > self.tol.pivot_tol * 1e3)
            if candidates.size:
                self._pivot(tableau, i, int(candidates[0]))
                basis[i] = int(candidates[0])
                keep.append(i)
            else:
                logger.debug(f"Dropping redundant equality row {i}")
        tableau = tableau[keep + [m], :]
        basis = [basis[i] for i in keep]
        return tableau, basis, keep


class _StandardForm:
    """Conversion of a Polyhedron to {y >= 0 : A y = b, b >= 0}."""

    def __init__(self, poly: Polyhedron):
        self.poly = poly
        n = poly.dim
        G, h = poly.ineq_matrix, poly.ineq_rhs

        self.bound_rows = {}
        general_rows = []
        for i in range(poly.num_ineq):
            nonzero = np.flatnonzero(G[i])
            if len(nonzero) == 1 and G[i, nonzero[0]] > 0 and h[i] == 0.0:
                self.bound_rows.setdefault(int(nonzero[0]), []).append(i)
            else:
                general_rows.append(i)
        self.general_rows = general_rows

        columns = []
        self.plus = np.zeros(n, dtype=int)
        self.minus = -np.ones(n, dtype=int)
        for j in range(n):
            self.plus[j] = len(columns)
            columns.append((j, 1.0))
            if j not in self.bound_rows:
                self.minus[j] = len(columns)
                columns.append((j, -1.0))
        self.num_structural = len(columns)

        expand = np.zeros((n, self.num_structural))
        for col, (j, sign) in enumerate(columns):
            expand[j, col] = sign
        self.expand = expand

        E, e = poly.eq_matrix, poly.eq_rhs
        Gg, hg = G[general_rows], h[general_rows]
        num_surplus = len(general_rows)
        A = np.zeros((len(e) + num_surplus, self.num_structural + num_surplus))
        A[:len(e), :self.num_structural] = E @ expand
        A[len(e):, :self.num_structural] = Gg @ expand
        A[len(e):, self.num_structural:] = -np.eye(num_surplus)
        b = np.concatenate([e, hg])

        self.row_sign = np.where(b < 0, -1.0, 1.0)
        self.A = A * self.row_sign[:, None]
        self.b = b * self.row_sign

    def objective(self, cost: np.ndarray) -> np.ndarray:
        c = np.zeros(self.A.shape[1])
        c[:self.num_structural] = cost @ self.expand
        return c

    def recover(self, y: np.ndarray) -> np.ndarray:
        return self.expand @ y[:self.num_structural]

    def duals(self, cost: np.ndarray, basis: List[int], rows: List[int], basis_matrix: np.ndarray):
        """Multipliers of min cost^T x: cost = E^T y + G^T z with z >= 0."""
        m = self.A.shape[0]
        pi = np.zeros(m)
        c_std = self.objective(cost)
        if basis:
            try:
                pi[rows] = np.linalg.solve(basis_matrix.T, c_std[basis])
            except np.linalg.LinAlgError:
                pi[rows] = np.linalg.lstsq(basis_matrix.T, c_std[basis], rcond=None)[0]
        pi = pi * self.row_sign

        num_eq = self.poly.num_eq
        dual_eq = pi[:num_eq].copy()
        dual_ineq = np.zeros(self.poly.num_ineq)
        dual_ineq[self.general_rows] = pi[num_eq:]

        # Bound rows: reduced cost of the column, split across duplicated rows
        reduced = cost - self.poly.eq_matrix.T @ dual_eq - self.poly.ineq_matrix.T @ dual_ineq
        for j, bound_rows in self.bound_rows.items():
            first = bound_rows[0]
            dual_ineq[first] = reduced[j] / self.poly.ineq_matrix[first, j]
        return dual_eq, dual_ineq


class ActiveSetQPSolver:
    """
    Primal active-set method for min 1/2 x^T H x + c^T x over a Polyhedron
    with H symmetric positive semidefinite.

    Steps are computed in the null space of the working constraints. When the
    reduced Hessian is singular and the reduced gradient has a component in
    its kernel, the method follows that zero-curvature descent ray; a ray not
    blocked by any constraint proves the problem unbounded.
    """

    def __init__(self, tolerances: Optional[SolverTolerances] = None):
        self.tol = tolerances or SolverTolerances()
        self.lp = SimplexSolver(self.tol)

    def solve(self, poly: Polyhedron, H, c, x0: Optional[np.ndarray] = None) -> SolveReport:
        n = poly.dim
        H = np.asarray(H, dtype=float)
        c = np.asarray(c, dtype=float).reshape(-1)
        if H.shape != (n, n) or c.shape != (n,):
            raise DimensionMismatchError(f"QP data H{H.shape}, c{c.shape} for a {n}-dimensional polyhedron")
        H = 0.5 * (H + H.T)
        check_psd(H, self.tol.curvature_tol)

        if x0 is None:
            seed = self.lp.solve(poly, np.zeros(n))
            if not seed.is_optimal:
                return SolveReport(SolveStatus.INFEASIBLE, iterations=seed.iterations)
            x = seed.x.copy()
        else:
            x = np.asarray(x0, dtype=float).copy()

        E, G, h = poly.eq_matrix, poly.ineq_matrix, poly.ineq_rhs
        working = self._initial_working_set(poly, x)

        for iteration in range(self.tol.max_iterations):
            g = H @ x + c
            W = np.vstack([E, G[working]]) if working else E
            Z = linalg.null_space(W) if W.shape[0] else np.eye(n)

            step, is_ray = self._null_space_step(Z, H, g, x)
            if step is None:
                multipliers = self._multipliers(W, g, poly.num_eq)
                if not working or multipliers.min() >= -self.tol.kkt_tol * (1 + np.abs(g).max()):
                    objective = float(0.5 * x @ H @ x + c @ x)
                    dual_eq, dual_ineq = self._dual_vectors(poly, working, W, g)
                    logger.debug(f"Active-set QP converged in {iteration} iterations")
                    return SolveReport(
                        SolveStatus.OPTIMAL,
                        x=x,
                        objective=objective,
                        active_constraints=_active_indices(poly, x, self.tol.feas_tol),
                        iterations=iteration,
                        dual_eq=dual_eq,
                        dual_ineq=dual_ineq,
                    )
                most_negative = min(range(len(working)), key=lambda k: (multipliers[k], working[k]))
                logger.debug(f"Dropping constraint {working[most_negative]} "
                             f"(multiplier {multipliers[most_negative]:.3e})")
                working.pop(most_negative)
                continue

            step_limit = np.inf if is_ray else 1.0
            blocking = None
            Gp = G @ step
            for i in range(poly.num_ineq):
                if i in working or Gp[i] >= -self.tol.pivot_tol:
                    continue
                ratio = max(0.0, (h[i] - G[i] @ x) / Gp[i])
                if ratio < step_limit - self.tol.pivot_tol:
                    step_limit, blocking = ratio, i
            if not np.isfinite(step_limit):
                logger.debug("Zero-curvature descent ray is unblocked: QP unbounded")
                return SolveReport(SolveStatus.UNBOUNDED, x=x, iterations=iteration,
                                   message="unblocked descent ray")
            x = x + step_limit * step
            if blocking is not None:
                working.append(blocking)
                working.sort()

        logger.error(f"Active-set QP hit the iteration limit ({self.tol.max_iterations})")
        raise MaxIterationsError(f"Active-set QP exceeded {self.tol.max_iterations} iterations")

    def _initial_working_set(self, poly: Polyhedron, x: np.ndarray) -> List[int]:
        """Greedy linearly independent subset of the constraints tight at x."""
        rows = poly.eq_matrix.copy()
        rank = np.linalg.matrix_rank(rows) if rows.shape[0] else 0
        working = []
        for i in _active_indices(poly, x, self.tol.feas_tol):
            candidate = np.vstack([rows, poly.ineq_matrix[i]])
            new_rank = np.linalg.matrix_rank(candidate)
            if new_rank > rank:
                rows, rank = candidate, new_rank
                working.append(i)
            if rank == poly.dim:
                break
        return working

    def _null_space_step(self, Z: np.ndarray, H: np.ndarray, g: np.ndarray, x: np.ndarray):
        if Z.shape[1] == 0:
            return None, False
        reduced_hessian = Z.T @ H @ Z
        reduced_gradient = Z.T @ g
        eigenvalues, vectors = np.linalg.eigh(0.5 * (reduced_hessian + reduced_hessian.T))
        scale = max(1.0, float(np.abs(eigenvalues).max(initial=0.0)))
        flat = eigenvalues <= self.tol.curvature_tol * scale

        flat_part = vectors[:, flat] @ (vectors[:, flat].T @ reduced_gradient)
        if np.linalg.norm(flat_part) > self.tol.kkt_tol * (1 + np.linalg.norm(g)):
            return -Z @ flat_part, True

        curved = ~flat
        coefficients = (vectors[:, curved].T @ reduced_gradient) / eigenvalues[curved]
        step = -Z @ (vectors[:, curved] @ coefficients)
        if np.linalg.norm(step) <= self.tol.feas_tol * (1 + np.linalg.norm(x)):
            return None, False
        return step, False

    @staticmethod
    def _multipliers(W: np.ndarray, g: np.ndarray, num_eq: int) -> np.ndarray:
        if W.shape[0] == 0:
            return np.zeros(0)
        solution = np.linalg.lstsq(W.T, g, rcond=None)[0]
        return solution[num_eq:]

    @staticmethod
    def _dual_vectors(poly: Polyhedron, working: List[int], W: np.ndarray, g: np.ndarray):
        dual_eq = np.zeros(poly.num_eq)
        dual_ineq = np.zeros(poly.num_ineq)
        if W.shape[0]:
            solution = np.linalg.lstsq(W.T, g, rcond=None)[0]
            dual_eq = solution[:poly.num_eq]
            dual_ineq[working] = np.maximum(solution[poly.num_eq:], 0.0)
        return dual_eq, dual_ineq


def check_psd(H: np.ndarray, tol: float = 1e-10) -> None:
    if H.size == 0:
        return
    eigenvalues = np.linalg.eigvalsh(H)
    scale = max(1.0, float(np.abs(eigenvalues).max()))
    if eigenvalues.min() < -1e3 * tol * scale:
        raise ValueError(f"Matrix is not positive semidefinite (min eigenvalue {eigenvalues.min():.3e})")


def solve_lp(poly: Polyhedron, c: Sequence[float], sense: str = "min",
             tolerances: Optional[SolverTolerances] = None) -> SolveReport:
    """Minimize (or maximize) c^T x over poly."""
    return SimplexSolver(tolerances).solve(poly, c, sense)


def solve_qp(poly: Polyhedron, H, c, tolerances: Optional[SolverTolerances] = None) -> SolveReport:
    """Minimize 1/2 x^T H x + c^T x over poly (H symmetric PSD)."""
    return ActiveSetQPSolver(tolerances).solve(poly, H, c)


def solve_vi(poly: Polyhedron, A, c, tolerances: Optional[SolverTolerances] = None) -> SolveReport:
    """
    Find x* in poly with (A x* + c)^T (x - x*) >= 0 for all x in poly.

    A must be symmetric PSD, so the VI is the optimality condition of the
    QP with Hessian A and linear term c.
    """
    A = np.asarray(A, dtype=float)
    if not np.allclose(A, A.T, atol=1e-12, rtol=1e-9):
        raise ValueError("solve_vi requires a symmetric matrix")
    return solve_qp(poly, A, c, tolerances)


def polytope_vertices(poly: Polyhedron, tol: float = 1e-9, max_combinations: int = 200000) -> np.ndarray:
    """
    Enumerate the vertices of a bounded, low-dimensional polyhedron by
    solving every choice of linearly independent tight constraints.

    Returns:
        np.ndarray: vertices as rows, duplicates removed, lexicographically sorted
    """
    n = poly.dim
    E, e = poly.eq_matrix, poly.eq_rhs
    rank_e = np.linalg.matrix_rank(E) if E.shape[0] else 0
    needed = n - rank_e
    vertices = []

    combos = itertools.combinations(range(poly.num_ineq), needed)
    for count, subset in enumerate(combos):
        if count >= max_combinations:
            logger.warning(f"Vertex enumeration stopped after {max_combinations} combinations")
            break
        subset = list(subset)
        M = np.vstack([E, poly.ineq_matrix[subset]]) if subset else E
        r = np.concatenate([e, poly.ineq_rhs[subset]])
        if M.shape[0] == 0 or np.linalg.matrix_rank(M) < n:
            continue
        x = np.linalg.lstsq(M, r, rcond=None)[0]
        if np.abs(M @ x - r).max() > tol * (1 + np.abs(r).max()):
            continue
        if poly.contains(x, tol=max(tol, 1e-8)):
            vertices.append(x)

    if not vertices:
        return np.zeros((0, n))
    vertices = np.array(vertices)
    unique = []
    for v in vertices:
        if not any(np.abs(v - u).max() <= 1e-7 * (1 + np.abs(u).max()) for u in unique):
            unique.append(v)
    unique.sort(key=lambda v: tuple(np.round(v, 9)))
    return np.array(unique)


def hausdorff_distance(P: np.ndarray, Q: np.ndarray) -> float:
    """Hausdorff distance between two finite point sets (rows)."""
    P, Q = np.atleast_2d(P), np.atleast_2d(Q)
    if P.shape[0] == 0 or Q.shape[0] == 0:
        return 0.0 if P.shape[0] == Q.shape[0] else np.inf
    distances = np.linalg.norm(P[:, None, :] - Q[None, :, :], axis=2)
    return float(max(distances.min(axis=1).max(), distances.min(axis=0).max()))
