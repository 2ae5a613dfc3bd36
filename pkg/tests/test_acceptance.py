"""Acceptance criteria 1 to 9.

Each criterion is a function returning (passed, detail).  Under pytest the
outcome is asserted and a summary line per criterion is printed at the end
of the run; `python tests/test_acceptance.py` prints the same lines.
"""

import io
import math
import tempfile
import time
from functools import lru_cache
from pathlib import Path

import numpy as np
import pytest

from visbound.billiard import estimate_both, estimate_visibility
from visbound.bounds import (LITERATURE_M, combined_bound, minimal_resistance_lp,
                             tt2_asymptotic_coefficient, tt2_constant)
from visbound.cli import main
from visbound.constants import make_dimension_context
from visbound.kernel import K_bruteforce, K_reduced
from visbound.scene import corpus_names, corpus_scene, make_scene
from visbound.verify import (check_curvature_signs, check_derivative_identity,
                             check_diagonal_oracle, check_enumeration)

ENDPOINT = {2: 0.988668, 3: 0.970823}
QUADRATIC = {2: 0.358, 3: 0.367}


def _bound_curve_endpoint(d, n, samples):
    with tempfile.TemporaryDirectory() as tmp:
        out = io.StringIO()
        code = main(["bound-curve", "--dim", str(d), "--n", str(n), "--lambda-samples", str(samples),
                     "--x-samples", "101", "--out", str(Path(tmp) / "curve.csv")], out=out)
    assert code == 0
    line = next(ln for ln in out.getvalue().splitlines() if ln.startswith("I*(1) = "))
    return float(line.split("=", 1)[1])


@lru_cache(maxsize=None)
def _m_lp(d, n=1000):
    return minimal_resistance_lp(make_dimension_context(d), n)


def criterion_1():
    parts = []
    ok = True
    for d in (2, 3):
        full = _bound_curve_endpoint(d, 1000, 1000)
        start = time.perf_counter()
        reduced = _bound_curve_endpoint(d, 200, 200)
        elapsed = time.perf_counter() - start
        ok &= abs(full - ENDPOINT[d]) <= 2e-3 and abs(reduced - ENDPOINT[d]) <= 1e-2 and elapsed < 30
        parts.append(f"d={d}: I*(1)={full:.6f} (target {ENDPOINT[d]}), n=200 run {reduced:.6f} in {elapsed:.1f}s")
    return ok, "; ".join(parts)


def criterion_2():
    parts = []
    ok = True
    for d in (2, 3):
        m = _m_lp(d)
        ok &= abs(m - LITERATURE_M[d]) <= 2e-3
        parts.append(f"d={d}: {m:.6f} vs {LITERATURE_M[d]}")
    return ok, "; ".join(parts)


def criterion_3():
    parts = []
    ok = True
    for d in (2, 3):
        ctx = make_dimension_context(d)
        q = 1.0 / (2.0 * tt2_constant(ctx))
        ok &= abs(q - QUADRATIC[d]) <= 5e-4
        parts.append(f"d={d}: 1/(2c)={q:.7f} vs {QUADRATIC[d]}")
    ok &= abs(tt2_asymptotic_coefficient(make_dimension_context(2)) - 3 * math.pi ** 2 / 32) <= 1e-15
    ok &= abs(tt2_asymptotic_coefficient(make_dimension_context(3)) - 2 / 3) <= 1e-15
    return ok, "; ".join(parts) + "; asymptotic coefficients 3pi^2/32 and 2/3"


def criterion_4():
    worst = 0.0
    angles = np.linspace(0.0, math.pi / 2, 10)
    for d in (2, 3):
        ctx = make_dimension_context(d)
        for frac in (0.1, 0.3, 0.6, 0.9, 1.2):
            lam = frac * ctx.lambda_hat
            for phi in angles:
                for psi in angles:
                    gap = abs(K_reduced(ctx, lam, phi, psi) - K_bruteforce(ctx, lam, phi, psi, seed=0))
                    worst = max(worst, gap)
    return worst <= 1e-3, f"max |K_reduced - K_bruteforce| = {worst:.2e} over 1000 points"


def criterion_5():
    deriv = check_derivative_identity(50)
    curv = check_curvature_signs()
    return deriv.passed and curv.passed, f"{deriv.detail}; {curv.detail}"


def criterion_6():
    r = check_diagonal_oracle(200)
    return r.passed, r.detail


def criterion_7():
    r = check_enumeration(6)
    return r.passed, r.detail


def criterion_8():
    ok = True
    parts = []
    for r in (0.3, 0.6, 0.9):
        est = estimate_visibility(make_scene(discs=[(0.0, 0.0, r)]), 1_000_000, seed=2024)
        z = (est.mean - r) / est.std_error
        ok &= abs(z) <= 3 and est.discarded == 0
        parts.append(f"r={r}: {est.mean:.5f} ({z:+.2f} se)")
    empty = estimate_visibility(make_scene(), 10_000, seed=1)
    ok &= empty.mean == 0.0
    return ok, "; ".join(parts) + f"; empty scene {empty.mean}"


def criterion_9():
    ctx = make_dimension_context(2)
    m = _m_lp(2)
    ok = True
    parts = []
    for name in corpus_names():
        scene = corpus_scene(name)
        vis, f1 = estimate_both(scene, 200_000, seed=77)
        x = scene.normalized_volume
        bound = combined_bound(ctx, x, m)
        good = vis.mean >= bound - 3 * vis.std_error and x <= f1.mean + 3 * f1.std_error
        ok &= good
        parts.append(f"{name} [D]={x:.3f} F={vis.mean:.3f} bound={bound:.3f} F1={f1.mean:.3f}")
    return ok, "; ".join(parts)


CRITERIA = {k: globals()[f"criterion_{k}"] for k in range(1, 10)}


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, record_criterion):
    passed, detail = CRITERIA[number]()
    record_criterion(number, passed, detail)
    assert passed, detail


if __name__ == "__main__":
    for number, fn in CRITERIA.items():
        passed, detail = fn()
        print(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}", flush=True)
