"""Lower-bound curves for the normalised visibility as a function of the
normalised volume x.

The LP family I(lambda) is computed on a uniform multiplier grid and turned
into a curve by the discrete Legendre transform I*(x) = max (lambda x + I).
The closed-form comparison curves and the checks on the quadratic constant
live here too.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .constants import DimensionContext, make_dimension_context
from .discretize import cost_matrix, marginal_weights
from .errors import DomainError, InvalidInputError
from .transport import TransportInstance, TransportPlan, solve_transport

SOURCES = ("lp-legendre", "thm-tt1", "thm-tt2a", "thm-tt2b-asymptotic", "prior-t2", "combined")

# published reference values of the minimal resistance m_d
LITERATURE_M = {2: 0.987820, 3: 0.969445}

# cubic coefficients of the earlier lower bound, known for d = 2, 3
PRIOR_CUBIC = {2: math.pi ** 3 / 288.0, 3: 16.0 / 729.0}

# lambda values handled by one warm-started chain of solves
SWEEP_CHUNK = 250

_LAMBDA_SLACK = 1e-12


@dataclass(frozen=True)
class LambdaSweep:
    d: int
    n: int
    lambdas: np.ndarray
    I_values: np.ndarray

    def __post_init__(self):
        if len(self.lambdas) != len(self.I_values):
            raise InvalidInputError("lambdas and I_values differ in length")


@dataclass(frozen=True)
class BoundCurve:
    source: str
    xs: np.ndarray
    ys: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.source not in SOURCES:
            raise InvalidInputError(f"unknown curve source {self.source!r}")


def _check_lambda(ctx: DimensionContext, lam: float):
    if not lam > 0 or not math.isfinite(lam):
        raise DomainError("lambda must be positive")
    if lam > ctx.lambda_hat * (1.0 + _LAMBDA_SLACK):
        raise DomainError(
            f"lambda {lam!r} exceeds lambda_hat {ctx.lambda_hat!r}; larger values never enter the transform")


def _lp_plan(ctx: DimensionContext, lam: float, n: int, warm: TransportPlan | None = None):
    w = marginal_weights(ctx.d, n).weights
    inst = TransportInstance(cost_matrix(ctx, lam, n).entries, w, w)
    return solve_transport(inst, warm_start=warm)


def I_of_lambda(ctx: DimensionContext, lam: float, n: int) -> float:
    """(d+1)/4 * LP optimum - lambda for 0 < lambda <= lambda_hat."""
    _check_lambda(ctx, lam)
    return ctx.prefactor * _lp_plan(ctx, lam, n).objective - lam


def minimal_resistance_lp(ctx: DimensionContext, n: int) -> float:
    """Discrete approximation m_d^(n): (d+1)/4 times the LP value at Lambda = 1."""
    return ctx.prefactor * _lp_plan(ctx, ctx.lambda_hat, n).objective


def lambda_grid(ctx: DimensionContext, samples: int) -> np.ndarray:
    """Uniform grid k * lambda_hat / M, k = 1..M."""
    if samples < 1:
        raise InvalidInputError("need at least one lambda sample")
    grid = ctx.lambda_hat * np.arange(1, samples + 1) / samples
    grid[-1] = ctx.lambda_hat
    return grid


def _sweep_chunk(d: int, n: int, lams: np.ndarray) -> np.ndarray:
    """I values for one chunk, solved from the largest lambda downward so each
    solve starts from the previous optimal basis."""
    ctx = make_dimension_context(d)
    out = np.empty(lams.size)
    plan = None
    for k in range(lams.size - 1, -1, -1):
        lam = float(lams[k])
        plan = _lp_plan(ctx, lam, n, plan)
        out[k] = ctx.prefactor * plan.objective - lam
    return out


def default_workers() -> int:
    env = os.environ.get("VISBOUND_WORKERS")
    if env:
        try:
            value = int(env)
        except ValueError:
            raise InvalidInputError(f"VISBOUND_WORKERS must be an integer, got {env!r}") from None
        if value < 1:
            raise InvalidInputError("VISBOUND_WORKERS must be >= 1")
        return value
    return os.cpu_count() or 1


def lambda_sweep(ctx: DimensionContext, n: int, samples: int,
                 workers: int | None = None) -> LambdaSweep:
    """I(lambda) on the uniform grid of `samples` points in (0, lambda_hat].

    The grid is split into fixed chunks independent of `workers`, so the
    result does not depend on how many processes run it.
    """
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    lams = lambda_grid(ctx, samples)
    chunks = [lams[k:k + SWEEP_CHUNK] for k in range(0, lams.size, SWEEP_CHUNK)]
    workers = default_workers() if workers is None else workers
    if workers < 1:
        raise InvalidInputError("workers must be >= 1")
    if workers == 1 or len(chunks) == 1:
        parts = [_sweep_chunk(ctx.d, n, c) for c in chunks]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(chunks))) as pool:
            parts = list(pool.map(_sweep_chunk, [ctx.d] * len(chunks), [n] * len(chunks), chunks))
    return LambdaSweep(d=ctx.d, n=n, lambdas=lams, I_values=np.concatenate(parts))


def legendre_transform(sweep: LambdaSweep, xs) -> BoundCurve:
    """I*(x) = max over the sampled lambda of lambda x + I(lambda)."""
    lams = np.asarray(sweep.lambdas, dtype=float)
    vals = np.asarray(sweep.I_values, dtype=float)
    if lams.size == 0:
        raise InvalidInputError("empty lambda sweep")
    xs = np.asarray(xs, dtype=float)
    if np.any(xs < 0) or np.any(xs > 1):
        raise InvalidInputError("normalised volumes must lie in [0, 1]")
    ys = np.max(lams[None, :] * xs[:, None] + vals[None, :], axis=1)
    return BoundCurve("lp-legendre", xs, ys, {"d": sweep.d, "n": sweep.n, "lambda_samples": int(lams.size)})


# --- closed-form curves -------------------------------------------------------

def tt2_constant(ctx: DimensionContext) -> float:
    """The constant c of the quadratic bound x^2 / (2c)."""
    d = ctx.d
    r = ctx.volume_ratio
    s2 = math.sqrt(2.0)
    bracket = r * (1.0 - 1.0 / s2) + s2 * (d - 1) / d + 0.5 * math.pi * (0.25 * math.pi - 1.0 / s2)
    return 8.0 / (d + 1) / (r * r) * bracket


def tt2_asymptotic_coefficient(ctx: DimensionContext) -> float:
    """Coefficient d(d+1)/(16(d-1)) (b_d/b_{d-1})^2 of the small-volume asymptote."""
    d = ctx.d
    return d * (d + 1) / (16.0 * (d - 1)) * ctx.volume_ratio ** 2


def theorem_bounds(ctx: DimensionContext, xs, m_d: float, m_source: str = "lp") -> list[BoundCurve]:
    """Closed-form comparison curves on the grid xs.

    `m_d` feeds the linear bound; `m_source` records where it came from.
    The asymptotic quadratic is for display only and is left out of the
    combined curve.
    """
    xs = np.asarray(xs, dtype=float)
    if np.any(xs < 0) or np.any(xs > 1):
        raise InvalidInputError("normalised volumes must lie in [0, 1]")
    meta = {"d": ctx.d, "m_d": m_d, "m_source": m_source}
    tt1 = m_d - ctx.lambda_hat * (1.0 - xs)
    c = tt2_constant(ctx)
    tt2a = xs ** 2 / (2.0 * c)
    tt2b = tt2_asymptotic_coefficient(ctx) * xs ** 2
    curves = [
        BoundCurve("thm-tt1", xs, tt1, dict(meta)),
        BoundCurve("thm-tt2a", xs, tt2a, dict(meta, coefficient=1.0 / (2.0 * c))),
        BoundCurve("thm-tt2b-asymptotic", xs, tt2b,
                   dict(meta, coefficient=tt2_asymptotic_coefficient(ctx))),
    ]
    if ctx.d in PRIOR_CUBIC:
        curves.append(BoundCurve("prior-t2", xs, PRIOR_CUBIC[ctx.d] * xs ** 3,
                                 dict(meta, coefficient=PRIOR_CUBIC[ctx.d])))
    else:
        warnings.warn(f"no earlier cubic bound is known for d={ctx.d}; prior-t2 curve omitted",
                      stacklevel=2)
    combined = np.maximum(np.maximum(tt1, tt2a), 0.0)
    curves.append(BoundCurve("combined", xs, combined, dict(meta)))
    return curves


def combined_bound(ctx: DimensionContext, x: float, m_d: float) -> float:
    """max(linear bound, quadratic bound, 0) at a single normalised volume."""
    tt1 = m_d - ctx.lambda_hat * (1.0 - x)
    return max(tt1, x * x / (2.0 * tt2_constant(ctx)), 0.0)


@dataclass(frozen=True)
class ChainReport:
    """Largest value of (left side - right side) of each inequality."""
    ineq1: float
    ineq2: float
    ineq3: float
    quadratic: float

    @property
    def worst(self) -> float:
        return max(self.ineq1, self.ineq2, self.ineq3, self.quadratic)


def q_function(ctx: DimensionContext, Lam: float) -> float:
    """Q(Lambda), the quadratic-bound deficit with a = arcsin(Lambda)."""
    a = math.asin(Lam)
    d = ctx.d
    inner = (ctx.volume_ratio * (1.0 - math.cos(a / 2)) + 2.0 * (d - 1) / d * math.sin(a / 2)
             + a * (a / 2 - math.sin(a / 2)))
    return ctx.prefactor * inner * Lam


def verify_tt2_chain(ctx: DimensionContext, Lambda_grid) -> ChainReport:
    """Evaluate the three elementary inequalities and Q <= (c/2) lambda^2."""
    grid = np.asarray(Lambda_grid, dtype=float)
    if np.any(grid <= 0) or np.any(grid > 1):
        raise DomainError("Lambda grid must lie in (0, 1]")
    s2 = math.sqrt(2.0)
    c = tt2_constant(ctx)
    worst = [-math.inf] * 4
    for Lam in grid:
        a = math.asin(Lam)
        gaps = (
            (1.0 - math.cos(a / 2)) - (1.0 - 1.0 / s2) * Lam,
            math.sin(a / 2) - Lam / s2,
            a * (a / 2 - math.sin(a / 2)) - 0.5 * math.pi * (0.25 * math.pi - 1.0 / s2) * Lam,
            q_function(ctx, Lam) - 0.5 * c * (Lam * ctx.lambda_hat) ** 2,
        )
        worst = [max(w, g) for w, g in zip(worst, gaps)]
    return ChainReport(*worst)
