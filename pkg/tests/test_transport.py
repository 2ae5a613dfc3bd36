import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from visbound.constants import make_dimension_context
from visbound.discretize import cell_midpoints, cost_matrix, marginal_weights
from visbound.errors import InfeasibleError, InvalidInputError
from visbound.transport import (TransportInstance, certificate_violation, check_c_monotonicity,
                                diagonal_oracle, enumerate_optimum, solve_transport)
from visbound.verify import small_instances


def highs_value(inst):
    """Reference optimum from the HiGHS LP solver."""
    nr, nc = inst.cost.shape
    rows = np.kron(np.eye(nr), np.ones(nc))
    cols = np.kron(np.ones(nr), np.eye(nc))
    res = linprog(inst.cost.ravel(), A_eq=np.vstack([rows, cols]),
                  b_eq=np.concatenate([inst.row_marginal, inst.col_marginal]),
                  bounds=(0, None), method="highs")
    assert res.status == 0
    return res.fun


def lp_instance(d, lam, n):
    ctx = make_dimension_context(d)
    w = marginal_weights(d, n).weights
    return ctx, TransportInstance(cost_matrix(ctx, lam, n).entries, w, w)


def test_single_cell():
    plan = solve_transport(TransportInstance(np.array([[0.25]]), np.array([1.0]), np.array([1.0])))
    assert plan.objective == pytest.approx(0.25, abs=1e-15)
    assert plan.support == [(0, 0, 1.0)]


def test_two_by_two_anti_diagonal():
    inst = TransportInstance(np.array([[1.0, 0.0], [0.0, 1.0]]), np.array([0.5, 0.5]), np.array([0.5, 0.5]))
    plan = solve_transport(inst)
    assert plan.objective == pytest.approx(0.0, abs=1e-15)
    assert sorted((i, j) for i, j, _ in plan.support) == [(0, 1), (1, 0)]
    assert all(m == pytest.approx(0.5, abs=1e-15) for _, _, m in plan.support)


def test_permutation_cost_picks_the_cheap_permutation():
    n = 7
    rng = np.random.default_rng(3)
    perm = rng.permutation(n)
    cost = np.ones((n, n))
    cost[np.arange(n), perm] = 0.0
    w = np.full(n, 1.0 / n)
    plan = solve_transport(TransportInstance(cost, w, w))
    assert plan.objective == pytest.approx(0.0, abs=1e-15)
    assert sorted((i, j) for i, j, _ in plan.support) == sorted(zip(range(n), perm.tolist()))


@pytest.mark.parametrize("inst", small_instances(), ids=lambda i: f"n{i.cost.shape[0]}")
def test_matches_vertex_enumeration(inst):
    plan = solve_transport(inst)
    assert plan.objective == pytest.approx(enumerate_optimum(inst), abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 2 ** 32 - 1))
def test_rectangular_random_instances(nr, nc, seed):
    rng = np.random.default_rng(seed)
    a = rng.random(nr) + 0.01
    b = rng.random(nc) + 0.01
    a /= a.sum()
    b /= b.sum()
    inst = TransportInstance(rng.random((nr, nc)), a, b)
    plan = solve_transport(inst)
    assert plan.objective == pytest.approx(enumerate_optimum(inst), abs=1e-10)
    cert = certificate_violation(inst, plan)
    assert cert["row_residual"] <= 1e-12 and cert["col_residual"] <= 1e-12
    assert cert["min_reduced_cost"] >= -1e-9


@pytest.mark.parametrize("d,lam,n", [(2, 0.3, 30), (2, 1.1, 40), (3, 0.9, 25), (3, 4 / 3, 30)])
def test_matches_highs_on_lp_family(d, lam, n):
    _, inst = lp_instance(d, lam, n)
    plan = solve_transport(inst)
    assert plan.objective == pytest.approx(highs_value(inst), abs=1e-9)


def test_dense_random_against_highs():
    rng = np.random.default_rng(11)
    a = rng.random(35) + 0.1
    b = rng.random(35) + 0.1
    a /= a.sum()
    b /= b.sum()
    inst = TransportInstance(rng.random((35, 35)), a, b)
    assert solve_transport(inst).objective == pytest.approx(highs_value(inst), abs=1e-9)


@pytest.mark.parametrize("d,lam", [(2, 0.5), (2, 3 * math.pi / 8), (3, 1.0)])
def test_certificate_on_sparse_path(d, lam):
    # n = 300 exceeds the dense threshold, so column generation is exercised
    _, inst = lp_instance(d, lam, 300)
    plan = solve_transport(inst)
    cert = certificate_violation(inst, plan)
    assert cert["row_residual"] <= 1e-12
    assert cert["col_residual"] <= 1e-12
    assert cert["min_reduced_cost"] >= -1e-9
    assert cert["max_support_reduced_cost"] <= 1e-9
    assert cert["duality_gap"] <= 1e-9
    assert len(plan.support) <= 2 * 300 - 1


def test_deterministic():
    _, inst = lp_instance(2, 0.7, 120)
    p1 = solve_transport(inst)
    p2 = solve_transport(inst)
    assert p1.support == p2.support
    assert p1.objective == p2.objective
    assert np.array_equal(p1.row_duals, p2.row_duals)


def test_warm_start_gives_same_optimum():
    ctx = make_dimension_context(2)
    n = 250
    w = marginal_weights(2, n).weights
    prev = solve_transport(TransportInstance(cost_matrix(ctx, 1.0, n).entries, w, w))
    inst = TransportInstance(cost_matrix(ctx, 0.95, n).entries, w, w)
    warm = solve_transport(inst, warm_start=prev)
    cold = solve_transport(inst)
    assert warm.objective == pytest.approx(cold.objective, abs=1e-12)
    assert warm.iterations < cold.iterations


def test_warm_start_with_other_marginals_is_ignored():
    _, a = lp_instance(2, 0.5, 20)
    _, b = lp_instance(3, 0.5, 20)
    prev = solve_transport(a)
    assert solve_transport(b, warm_start=prev).objective == pytest.approx(
        solve_transport(b).objective, abs=1e-13)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 4), st.integers(2, 4), st.integers(0, 2 ** 32 - 1))
def test_random_instances_with_empty_lines(nr, nc, seed):
    rng = np.random.default_rng(seed)
    a = rng.random(nr) * (rng.random(nr) < 0.6)
    b = rng.random(nc) * (rng.random(nc) < 0.6)
    a[rng.integers(nr)] += 0.5
    b[rng.integers(nc)] += 0.5
    a /= a.sum()
    b /= b.sum()
    inst = TransportInstance(rng.random((nr, nc)), a, b)
    assert solve_transport(inst).objective == pytest.approx(enumerate_optimum(inst), abs=1e-10)


def test_zero_marginal_entries():
    cost = np.array([[1.0, 2.0, 3.0], [0.5, 0.1, 4.0], [2.0, 2.0, 0.0]])
    inst = TransportInstance(cost, np.array([0.5, 0.0, 0.5]), np.array([0.0, 0.5, 0.5]))
    assert solve_transport(inst).objective == pytest.approx(enumerate_optimum(inst), abs=1e-13)


def test_unbalanced_is_infeasible():
    with pytest.raises(InfeasibleError):
        solve_transport(TransportInstance(np.ones((2, 2)), np.array([0.5, 0.5]), np.array([0.5, 0.6])))


@pytest.mark.parametrize("cost,a", [
    (np.array([[np.nan, 1.0], [1.0, 1.0]]), np.array([0.5, 0.5])),
    (np.array([[np.inf, 1.0], [1.0, 1.0]]), np.array([0.5, 0.5])),
    (np.ones((2, 2)), np.array([1.5, -0.5])),
    (np.ones((2, 2)), np.array([np.nan, 0.5])),
])
def test_invalid_inputs(cost, a):
    with pytest.raises(InvalidInputError):
        solve_transport(TransportInstance(cost, a, np.array([0.5, 0.5])))


def test_shape_mismatch():
    with pytest.raises(InvalidInputError):
        TransportInstance(np.ones((2, 3)), np.array([0.5, 0.5]), np.array([0.5, 0.5]))


def test_enumeration_size_limit():
    w = np.full(7, 1 / 7)
    with pytest.raises(InvalidInputError):
        enumerate_optimum(TransportInstance(np.ones((7, 7)), w, w))


def test_constant_cost_oracle():
    assert diagonal_oracle(2, 50, lambda t: 1.0) == pytest.approx(1.0, abs=1e-14)


def test_diagonal_oracle_concave_cost():
    n = 200
    mids = cell_midpoints(n)
    w = marginal_weights(2, n).weights
    cost = np.cos(0.5 * (mids[:, None] + mids[None, :]))
    plan = solve_transport(TransportInstance(cost, w, w))
    oracle = diagonal_oracle(2, n, lambda t: math.cos(0.5 * t))
    # continuum value: integral of cos(phi) cos(phi) dphi over [0, pi/2]
    assert oracle == pytest.approx(math.pi / 4, abs=1e-4)
    assert plan.objective == pytest.approx(oracle, abs=1e-12)
    assert all(i == j for i, j, _ in plan.support)


def test_monotone_structure_of_lp_plans():
    for d, lam in ((2, 0.6), (3, 0.9)):
        ctx, inst = lp_instance(d, lam, 120)
        plan = solve_transport(inst)
        rep = check_c_monotonicity(plan, ctx, lam, 120)
        assert rep.concave_points + rep.convex_points + rep.band_points == len(plan.support)
        assert rep.violation_fraction <= 0.05


def test_monotonicity_report_counts_violations():
    from visbound.transport import TransportPlan
    ctx = make_dimension_context(2)
    n = 10
    # two anti-monotone points below the separator
    plan = TransportPlan(support=[(0, 1, 0.5), (1, 0, 0.5)], objective=0.0,
                         row_duals=np.zeros(n), col_duals=np.zeros(n), iterations=0)
    rep = check_c_monotonicity(plan, ctx, 0.3, n)
    assert rep.concave_pairs == 1
    assert rep.concave_violations == 1
    assert rep.violation_fraction == 1.0
