"""Dimension-dependent constants: sphere areas, ball volumes and the
multiplier normalisation shared by the kernel and the bound pipeline."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import InvalidDimensionError


def _gamma_half(k: int) -> tuple[Fraction, bool]:
    """Return (q, has_sqrt_pi) with Gamma(k/2) = q * sqrt(pi)**has_sqrt_pi.

    Exact recursion Gamma(x + 1) = x Gamma(x), seeded with Gamma(1) = 1 and
    Gamma(1/2) = sqrt(pi).
    """
    if k < 1:
        raise ValueError("k must be a positive integer")
    if k % 2 == 0:
        return Fraction(math.factorial(k // 2 - 1)), False
    q = Fraction(1)
    x = Fraction(1, 2)
    while x < Fraction(k, 2):
        q *= x
        x += 1
    return q, True


def _pi_power_over_gamma(num_pi_halves: int, k: int) -> float:
    """pi**(num_pi_halves/2) / Gamma(k/2), collapsing sqrt(pi) factors."""
    q, sqrt_pi = _gamma_half(k)
    halves = num_pi_halves - (1 if sqrt_pi else 0)
    value = math.pi ** (halves // 2) / float(q)
    if halves % 2:
        value *= math.sqrt(math.pi)
    return value


def sphere_area(d: int) -> float:
    """Area s_{d-1} of the unit sphere in R^d."""
    return 2.0 * _pi_power_over_gamma(d, d)


def ball_volume(d: int) -> float:
    """Volume b_d of the unit ball in R^d (b_0 = 1)."""
    if d == 0:
        return 1.0
    return _pi_power_over_gamma(d, d + 2)


@dataclass(frozen=True)
class DimensionContext:
    d: int
    sphere_area: float
    ball_volume: float
    lower_ball_volume: float
    lambda_hat: float

    @property
    def volume_ratio(self) -> float:
        """b_d / b_{d-1}."""
        return self.ball_volume / self.lower_ball_volume

    @property
    def prefactor(self) -> float:
        """(d + 1) / 4, the normalising factor of the visibility integrand."""
        return (self.d + 1) / 4.0


def make_dimension_context(d: int) -> DimensionContext:
    if not isinstance(d, int) or isinstance(d, bool) or d < 2:
        raise InvalidDimensionError(f"dimension must be an integer >= 2, got {d!r}")
    bd = ball_volume(d)
    bd1 = ball_volume(d - 1)
    return DimensionContext(
        d=d,
        sphere_area=sphere_area(d),
        ball_volume=bd,
        lower_ball_volume=bd1,
        lambda_hat=(d + 1) / 4.0 * bd / bd1,
    )


def lambda_to_Lambda(ctx: DimensionContext, lam: float) -> float:
    """Map the volume multiplier lambda to its normalised form Lambda.

    Lambda = 4/(d+1) * b_{d-1}/b_d * lambda, so lambda_hat maps to 1.
    """
    return lam / ctx.lambda_hat


def Lambda_to_lambda(ctx: DimensionContext, Lam: float) -> float:
    return Lam * ctx.lambda_hat


def convex_visibility_index(ctx: DimensionContext, boundary_measure: float) -> float:
    """Visibility index 4/(d+1) b_{d-1} |dC| of a convex body with the given
    boundary measure."""
    return 4.0 / (ctx.d + 1) * ctx.lower_ball_volume * boundary_measure


def normalized_volume(ctx: DimensionContext, volume: float) -> float:
    return volume / ctx.ball_volume


def normalized_visibility(ctx: DimensionContext, index: float) -> float:
    return (ctx.d + 1) / (4.0 * ctx.lower_ball_volume * ctx.sphere_area) * index
