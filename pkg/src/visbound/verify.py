"""Property suite behind the `verify` subcommand.

Each check returns a CheckResult; the suite passes when all of them pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .billiard import estimate_visibility
from .bounds import tt2_asymptotic_coefficient, verify_tt2_chain
from .constants import make_dimension_context
from .discretize import cell_midpoints, marginal_weights
from .kernel import eta_array, inflection_angle, kappa_array, kappa_dtheta
from .scene import make_scene
from .transport import (TransportInstance, certificate_violation, diagonal_oracle,
                        enumerate_optimum, solve_transport)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def check_derivative_identity(points: int = 50) -> CheckResult:
    worst = 0.0
    h = 1e-6
    for Lam in (0.25, 0.5, 0.75):
        top = inflection_angle(Lam)
        for theta in np.linspace(1e-3, top - 1e-3, points):
            fd = (float(kappa_array(Lam, theta + h)) - float(kappa_array(Lam, theta - h))) / (2 * h)
            worst = max(worst, abs(kappa_dtheta(Lam, theta) - fd))
    return CheckResult("kernel derivative identity", worst <= 1e-6, f"max error {worst:.2e}")


def check_curvature_signs(points: int = 200) -> CheckResult:
    h = 1e-4
    bad = 0
    for Lam in (0.25, 0.5, 0.75):
        sep = inflection_angle(Lam)
        th = np.linspace(h, math.pi - h, points)
        th = th[np.abs(th - sep) > 2 * h]
        second = (kappa_array(Lam, th + h) - 2 * kappa_array(Lam, th) + kappa_array(Lam, th - h))
        bad += int(np.sum((th < sep) & (second > 1e-8)))
        bad += int(np.sum((th > sep) & (second < -1e-8)))
    return CheckResult("kernel concave then convex", bad == 0, f"{bad} sign violations")


def check_root_residual() -> CheckResult:
    Lam, theta = np.meshgrid(np.linspace(0.02, 0.98, 50), np.linspace(0.0, math.pi, 50))
    eta = eta_array(Lam, theta)
    inside = eta > 0
    res = np.abs(Lam * np.cos(eta) - np.sin(theta + 2 * eta))[inside]
    worst = float(res.max()) if res.size else 0.0
    return CheckResult("kernel root residual", worst <= 1e-12, f"max residual {worst:.2e}")


def check_diagonal_oracle(n: int) -> CheckResult:
    """Concave cost of i + j: the diagonal plan is optimal."""
    kappa_fn = lambda t: math.cos(0.5 * t)  # noqa: E731
    mids = cell_midpoints(n)
    w = marginal_weights(2, n).weights
    cost = np.cos(0.5 * (mids[:, None] + mids[None, :]))
    plan = solve_transport(TransportInstance(cost, w, w))
    oracle = diagonal_oracle(2, n, kappa_fn)
    off = max((abs(i - j) for i, j, _ in plan.support), default=0)
    gap = abs(plan.objective - oracle)
    return CheckResult(f"diagonal oracle n={n}", gap <= 5e-3 and off <= 1,
                       f"|LP - oracle| = {gap:.2e}, max |i-j| = {off}")


def small_instances(seed: int = 7, per_size: int = 3):
    """Balanced test instances with n <= 6; n = 6 uses dyadic marginals so
    vertex enumeration stays fast."""
    rng = np.random.default_rng(seed)
    out = []
    for n in range(1, 7):
        for _ in range(per_size):
            if n < 6:
                a = rng.random(n) + 0.05
                b = rng.random(n) + 0.05
                a /= a.sum()
                b *= a.sum() / b.sum()
            else:
                a = np.diff(np.concatenate([[0], np.sort(rng.choice(np.arange(1, 16), n - 1, replace=False)), [16]])) / 16
                b = np.diff(np.concatenate([[0], np.sort(rng.choice(np.arange(1, 16), n - 1, replace=False)), [16]])) / 16
            out.append(TransportInstance(rng.random((n, n)), a, b))
    return out


def check_enumeration(max_n: int) -> CheckResult:
    worst = 0.0
    worst_rc = 0.0
    count = 0
    for inst in small_instances():
        if inst.cost.shape[0] > max_n:
            continue
        plan = solve_transport(inst)
        worst = max(worst, abs(plan.objective - enumerate_optimum(inst)))
        cert = certificate_violation(inst, plan)
        worst_rc = max(worst_rc, -cert["min_reduced_cost"], cert["max_support_reduced_cost"])
        count += 1
    ok = worst <= 1e-10 and worst_rc <= 1e-9
    return CheckResult(f"LP vs vertex enumeration (n<={max_n})", ok,
                       f"{count} instances, max gap {worst:.2e}, certificate {worst_rc:.2e}")


def check_tt2_chain() -> CheckResult:
    grid = np.linspace(1e-3, 1.0, 400)
    worst = max(verify_tt2_chain(make_dimension_context(d), grid).worst for d in (2, 3))
    coef_ok = (abs(tt2_asymptotic_coefficient(make_dimension_context(2)) - 3 * math.pi ** 2 / 32) < 1e-14
               and abs(tt2_asymptotic_coefficient(make_dimension_context(3)) - 2 / 3) < 1e-14)
    return CheckResult("quadratic bound inequality chain", worst <= 1e-12 and coef_ok,
                       f"max slack {worst:.2e}")


def check_simulator(samples: int) -> CheckResult:
    est = estimate_visibility(make_scene(discs=[(0.0, 0.0, 0.6)]), samples, seed=2024, workers=1)
    empty = estimate_visibility(make_scene(), 1000, seed=1, workers=1)
    ok = abs(est.mean - 0.6) <= 3 * est.std_error and empty.mean == 0.0
    return CheckResult("simulator calibration", ok,
                       f"disc r=0.6: {est.mean:.5f} +- {est.std_error:.5f}; empty: {empty.mean}")


def run_suite(quick: bool = False) -> list[CheckResult]:
    return [
        check_derivative_identity(),
        check_curvature_signs(),
        check_root_residual(),
        check_diagonal_oracle(50 if quick else 200),
        check_enumeration(5 if quick else 6),
        check_tt2_chain(),
        check_simulator(100_000 if quick else 1_000_000),
    ]
