"""Exact solver for balanced transportation problems with dual certificates,
plus the structural diagnostics used on the discretised kernel problem."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from . import _netsimplex as ns
from .constants import DimensionContext, lambda_to_Lambda
from .discretize import cell_midpoints, marginal_weights
from .errors import InfeasibleError, InvalidInputError, SolverError
from .kernel import inflection_angle

BALANCE_TOL = 1e-12
PIVOT_TOL = 1e-11
ZERO_MASS = 1e-12
TIE_TOL = 1e-15
# relative size of the anti-degeneracy perturbation of the row marginals
PERTURBATION = 1e-12
# instances up to this many cells are priced in full by the simplex itself
DENSE_CELLS = 40_000
PRICE_MARGIN = 1e-3
CELLS_PER_LINE = 8


@dataclass(frozen=True)
class TransportInstance:
    cost: np.ndarray
    row_marginal: np.ndarray
    col_marginal: np.ndarray

    def __post_init__(self):
        cost = np.ascontiguousarray(self.cost, dtype=float)
        rows = np.ascontiguousarray(self.row_marginal, dtype=float)
        cols = np.ascontiguousarray(self.col_marginal, dtype=float)
        if cost.ndim != 2 or cost.shape != (rows.size, cols.size):
            raise InvalidInputError(
                f"cost shape {cost.shape} does not match marginals ({rows.size}, {cols.size})")
        object.__setattr__(self, "cost", cost)
        object.__setattr__(self, "row_marginal", rows)
        object.__setattr__(self, "col_marginal", cols)


@dataclass
class TransportPlan:
    support: list[tuple[int, int, float]]
    objective: float
    row_duals: np.ndarray
    col_duals: np.ndarray
    iterations: int
    basis: object = field(default=None, repr=False, compare=False)

    def as_dense(self, shape: tuple[int, int]) -> np.ndarray:
        x = np.zeros(shape)
        for i, j, m in self.support:
            x[i, j] = m
        return x


def _validate(instance: TransportInstance):
    c = instance.cost
    a = instance.row_marginal
    b = instance.col_marginal
    if not np.all(np.isfinite(c)):
        raise InvalidInputError("cost entries must be finite")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise InvalidInputError("marginals must be finite")
    if np.any(a < 0) or np.any(b < 0):
        raise InvalidInputError("marginals must be nonnegative")
    if abs(math.fsum(a) - math.fsum(b)) > BALANCE_TOL:
        raise InfeasibleError(
            f"unbalanced instance: row mass {math.fsum(a)!r} != column mass {math.fsum(b)!r}")


def _union_ids(base: np.ndarray, extra: np.ndarray) -> np.ndarray:
    return np.union1d(base, extra).astype(np.int64)


def _violating_cells(cost, pi, cap: int) -> np.ndarray:
    """Flat ids of the (at most `cap`) most negative reduced costs."""
    nr, nc = cost.shape
    ids, vals = ns.negative_cells(cost, pi, nr, nc, PIVOT_TOL)
    if ids.size == 0:
        return ids
    if PRICE_MARGIN > 0:
        ids, vals = ns.negative_cells(cost, pi, nr, nc, -PRICE_MARGIN)
    if ids.size > cap:
        ids = ids[np.argpartition(vals, cap - 1)[:cap]]
    return ids


class _Basis:
    """Spanning tree over a working subset of cells, kept for warm starts."""

    def __init__(self, tail, head, tree_arc, cells, rows, cols):
        self.tail = tail
        self.head = head
        self.tree_arc = tree_arc
        self.cells = cells
        self.rows = rows
        self.cols = cols

    def tree_cells(self) -> np.ndarray:
        real = self.tree_arc >= 0
        return self.cells[self.tree_arc[real]]

    def copy(self):
        return _Basis(self.tail.copy(), self.head.copy(), self.tree_arc.copy(),
                      self.cells.copy(), self.rows, self.cols)


def _remap(basis: _Basis, cells: np.ndarray):
    real = basis.tree_arc >= 0
    flat = basis.cells[basis.tree_arc[real]]
    basis.tree_arc[real] = np.searchsorted(cells, flat)
    basis.cells = cells


def _column_generation(cost, supply, basis: _Basis, big_m, max_iter, flow_tol):
    nr, nc = cost.shape
    flat = cost.ravel()
    total = 0
    while True:
        rows = basis.cells // nc
        cols = basis.cells % nc
        status, iters, flow, pi = ns.solve_tree(
            nr, nc, rows, cols, flat[basis.cells], supply, basis.tail, basis.head,
            basis.tree_arc, big_m, max_iter, PIVOT_TOL, TIE_TOL, flow_tol)
        total += iters
        if status != ns.STATUS_OPTIMAL:
            return status, total, flow, pi
        if basis.cells.size == flat.size:
            return status, total, flow, pi
        extra = _violating_cells(cost, pi, CELLS_PER_LINE * (nr + nc))
        if extra.size == 0:
            return status, total, flow, pi
        _remap(basis, _union_ids(basis.cells, extra))


def _cold_basis(a, b, dense: bool) -> _Basis:
    nr, nc = a.size, b.size
    cells, end = ns.northwest_cells(a, b)
    flat = np.array([i * nc + j for i, j in cells], dtype=np.int64)
    ids = np.arange(nr * nc, dtype=np.int64) if dense else np.unique(flat)
    tail = np.array([i for i, _ in cells] + [end], dtype=np.int64)
    head = np.array([nr + j for _, j in cells] + [nr + nc], dtype=np.int64)
    tree_arc = np.concatenate([np.searchsorted(ids, flat), [-1 - end]]).astype(np.int64)
    return _Basis(tail, head, tree_arc, ids, a, b)


def _perturbed_supply(a, b):
    """Supplies with rows raised by eps and the last column absorbing the
    excess, which makes every basic solution non-degenerate."""
    nr = a.size
    eps = PERTURBATION * max(float(a.sum()), 1.0)
    ap = a + eps
    bp = b.copy()
    bp[-1] += math.fsum(ap) - math.fsum(bp)
    return ap, bp


def solve_transport(instance: TransportInstance, warm_start: TransportPlan | None = None,
                    max_iter: int | None = None) -> TransportPlan:
    """Optimal basic solution of min <C, X> s.t. X 1 = a, X^T 1 = b, X >= 0.

    A previous plan on an instance with the same marginals can be passed as
    `warm_start`; its basis is reused.  The simplex runs on marginals with a
    tiny perturbation so no pivot is degenerate, then the final tree is
    re-evaluated on the exact marginals.  Large instances are priced in
    rounds: the simplex works on a subset of cells, a full vectorised scan
    adds the most violated cells, and the loop ends when no reduced cost
    over the whole matrix is below -PIVOT_TOL.
    """
    _validate(instance)
    c = instance.cost
    a = instance.row_marginal
    b = instance.col_marginal
    nr, nc = c.shape
    scale = float(np.max(np.abs(c))) if c.size else 0.0
    big_m = (scale + 1.0) * (nr + nc + 1)
    if max_iter is None:
        max_iter = 50 * (nr + nc) ** 2 + 1000
    flow_tol = 1e-14 * max(1.0, float(a.sum()))
    dense = nr * nc <= DENSE_CELLS

    ap, bp = _perturbed_supply(a, b)
    supply_p = np.concatenate([ap, -bp, [0.0]])

    basis = None
    ws = warm_start.basis if warm_start is not None else None
    if isinstance(ws, _Basis) and np.array_equal(ws.rows, a) and np.array_equal(ws.cols, b):
        basis = ws.copy()
        if not dense:
            # cells that mattered for the previous costs are re-priced anyway
            _remap(basis, np.unique(basis.tree_cells()))
    status = None
    if basis is not None:
        status, iters, flow, pi = _column_generation(c, supply_p, basis, big_m, max_iter, flow_tol)
        if status in (ns.STATUS_BAD_TREE, ns.STATUS_INFEASIBLE_START):
            status = None
    if status is None:
        basis = _cold_basis(ap, bp, dense)
        basis.rows, basis.cols = a, b
        status, iters, flow, pi = _column_generation(c, supply_p, basis, big_m, max_iter, flow_tol)
        if status == ns.STATUS_INFEASIBLE_START:
            # empty columns make the staircase degenerate in the wrong direction
            basis = _Basis(*ns.artificial_tree(nr, nc, bp), basis.cells, a, b)
            status, iters, flow, pi = _column_generation(c, supply_p, basis, big_m, max_iter, flow_tol)
    if status == ns.STATUS_ITERATION_LIMIT:
        raise SolverError(f"iteration limit {max_iter} reached")
    if status != ns.STATUS_OPTIMAL:
        raise SolverError(f"network simplex failed with status {status}")

    # the optimal tree of the perturbed problem, evaluated on the exact data
    b_exact = b.copy()
    b_exact[-1] += math.fsum(a) - math.fsum(b)
    supply = np.concatenate([a, -b_exact, [0.0]])
    ok, flow, pi = ns.evaluate_tree(nr, nc, c.ravel()[basis.cells], supply,
                                    basis.tail, basis.head, basis.tree_arc, big_m)
    neg_tol = 1e-12 * max(1.0, float(a.sum()))
    if not ok or flow.min() < -neg_tol:
        # perturbation too coarse for this data: solve the exact problem
        exact = _Basis(*ns.artificial_tree(nr, nc, b_exact), np.arange(nr * nc, dtype=np.int64), a, b)
        status, more, flow, pi = _column_generation(c, supply, exact, big_m, max_iter, flow_tol)
        if status != ns.STATUS_OPTIMAL:
            raise SolverError(f"network simplex failed with status {status}")
        iters += more
        basis = exact
    art = basis.tree_arc < 0
    if np.any(flow[art] > neg_tol):
        raise SolverError("artificial arcs carry flow at the optimum")

    real = ~art & (flow > ZERO_MASS)
    ids = basis.cells[basis.tree_arc[real]]
    mass = flow[real]
    order = np.argsort(ids, kind="stable")
    ids = ids[order]
    mass = mass[order]
    ii = ids // nc
    jj = ids % nc
    support = [(int(i), int(j), float(m)) for i, j, m in zip(ii, jj, mass)]
    objective = math.fsum(c.ravel()[ids] * mass)
    return TransportPlan(
        support=support,
        objective=objective,
        row_duals=-pi[:nr].copy(),
        col_duals=pi[nr:nr + nc].copy(),
        iterations=int(iters),
        basis=basis,
    )


def reduced_costs(instance: TransportInstance, plan: TransportPlan) -> np.ndarray:
    """c_ij - u_i - v_j for every cell."""
    return instance.cost - plan.row_duals[:, None] - plan.col_duals[None, :]


def certificate_violation(instance: TransportInstance, plan: TransportPlan) -> dict:
    """Largest violations of primal feasibility and of the dual certificate."""
    x = plan.as_dense(instance.cost.shape)
    rc = reduced_costs(instance, plan)
    on_support = np.array([rc[i, j] for i, j, _ in plan.support]) if plan.support else np.zeros(0)
    return {
        "row_residual": float(np.max(np.abs(x.sum(axis=1) - instance.row_marginal))),
        "col_residual": float(np.max(np.abs(x.sum(axis=0) - instance.col_marginal))),
        "min_reduced_cost": float(rc.min()),
        "max_support_reduced_cost": float(np.max(np.abs(on_support))) if on_support.size else 0.0,
        "duality_gap": abs(plan.objective - float(plan.row_duals @ instance.row_marginal
                                                  + plan.col_duals @ instance.col_marginal)),
    }


# --- independent oracles ----------------------------------------------------

def enumerate_optimum(instance: TransportInstance) -> float:
    """Minimum of the objective over all vertices of the transportation polytope.

    Every vertex has a forest support, so it has a line with a single basic
    cell whose value is min(remaining row, remaining column).  Recursively
    fixing such a cell in every possible way therefore visits every vertex.
    Exponential; meant for n <= 6.
    """
    _validate(instance)
    c = instance.cost
    nr, nc = c.shape
    if nr * nc > 36:
        raise InvalidInputError("vertex enumeration is limited to 36 cells")
    tol = 1e-13

    @lru_cache(maxsize=None)
    def best(rows: tuple, cols: tuple) -> float:
        active_r = [i for i in range(nr) if rows[i] > tol]
        active_c = [j for j in range(nc) if cols[j] > tol]
        if not active_r or not active_c:
            return 0.0
        out = math.inf
        for i in active_r:
            for j in active_c:
                m = min(rows[i], cols[j])
                r2 = list(rows)
                c2 = list(cols)
                r2[i] = 0.0 if rows[i] - m <= tol else rows[i] - m
                c2[j] = 0.0 if cols[j] - m <= tol else cols[j] - m
                out = min(out, c[i, j] * m + best(tuple(r2), tuple(c2)))
        return out

    a = tuple(float(x) for x in instance.row_marginal)
    b = tuple(float(x) for x in instance.col_marginal)
    return best(a, b)


def diagonal_oracle(d: int, n: int, kappa_fn: Callable[[float], float]) -> float:
    """sum_k b_k kappa(2 mid_k): the value of the diagonal plan, optimal when
    the cost is a strictly concave function of i + j."""
    w = marginal_weights(d, n).weights
    mids = cell_midpoints(n)
    vals = np.array([kappa_fn(2.0 * m) for m in mids], dtype=float)
    return math.fsum(w * vals)


# --- support structure --------------------------------------------------------

@dataclass(frozen=True)
class MonotonicityReport:
    separator: float
    band: float
    concave_points: int
    convex_points: int
    band_points: int
    concave_pairs: int
    convex_pairs: int
    concave_violations: int
    convex_violations: int

    @property
    def violation_fraction(self) -> float:
        pairs = self.concave_pairs + self.convex_pairs
        if pairs == 0:
            return 0.0
        return (self.concave_violations + self.convex_violations) / pairs


def _violating_pairs(phi, psi, sign):
    if phi.size < 2:
        return 0, 0
    prod = (phi[:, None] - phi[None, :]) * (psi[:, None] - psi[None, :])
    iu = np.triu_indices(phi.size, k=1)
    prod = prod[iu]
    if sign < 0:
        bad = int(np.count_nonzero(prod < 0))
    else:
        bad = int(np.count_nonzero(prod > 0))
    return bad, prod.size


def check_c_monotonicity(plan: TransportPlan, ctx: DimensionContext, lam: float,
                         n: int) -> MonotonicityReport:
    """Count support pairs violating the monotone structure expected on each
    side of phi + psi = pi - arcsin(Lambda).

    Points within one cell of the separating line are set aside.  Returns
    counts only; interpreting them is left to the caller.
    """
    sep = inflection_angle(lambda_to_Lambda(ctx, lam))
    band = 0.5 * math.pi / n
    mids = cell_midpoints(n)
    if plan.support:
        idx = np.array([(i, j) for i, j, _ in plan.support])
        phi = mids[idx[:, 0]]
        psi = mids[idx[:, 1]]
    else:
        phi = psi = np.zeros(0)
    theta = phi + psi
    lower = theta < sep - band
    upper = theta > sep + band
    cv, cp = _violating_pairs(phi[lower], psi[lower], -1)
    xv, xp = _violating_pairs(phi[upper], psi[upper], +1)
    return MonotonicityReport(
        separator=sep, band=band,
        concave_points=int(lower.sum()), convex_points=int(upper.sum()),
        band_points=int(theta.size - lower.sum() - upper.sum()),
        concave_pairs=cp, convex_pairs=xp,
        concave_violations=cv, convex_violations=xv,
    )
