"""The minimised kernel kappa_Lambda(theta) and the reduced transport cost.

For a fixed angle sum theta = phi + psi the cost of a quadruple of unit
vectors reduces to f(eta) = cos(theta + 2 eta) + 2 Lambda sin(eta), minimised
over the half-angle eta in [0, (pi - theta)/2].  In the interior of the
admissible region the minimiser solves

    Lambda cos(eta) = sin(theta + 2 eta),

and on the bracket [(pi/2 - theta)_+, (pi - theta)/2] the left side minus
the right side is strictly increasing, so bisection is always safe.
"""

from __future__ import annotations

import math

import numpy as np

from .constants import DimensionContext, lambda_to_Lambda
from .errors import DomainError

# |Lambda - 1| below this is treated as Lambda == 1 (closed-form minimiser)
LAMBDA_ONE_TOL = 1e-15
ROOT_XTOL = 1e-15
_BISECT_STEPS = 64


def _check_args(Lam, theta):
    Lam = np.asarray(Lam, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if np.any(~np.isfinite(Lam)) or np.any(Lam <= 0):
        raise DomainError("Lambda must be positive and finite")
    if np.any(~np.isfinite(theta)) or np.any(theta < 0) or np.any(theta > math.pi):
        raise DomainError("theta must lie in [0, pi]")
    return np.broadcast_arrays(Lam, theta)


def _residual(Lam, theta, eta):
    return Lam * np.cos(eta) - np.sin(theta + 2.0 * eta)


def _solve_interior(Lam, theta):
    """Root of Lambda cos(eta) = sin(theta + 2 eta) on the monotone bracket.

    Bisection to machine resolution followed by at most two Newton steps that
    are only accepted when they stay inside the current bracket.
    """
    lo = np.maximum(0.5 * math.pi - theta, 0.0)
    hi = 0.5 * (math.pi - theta)
    for _ in range(_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        neg = _residual(Lam, theta, mid) <= 0.0
        lo = np.where(neg, mid, lo)
        hi = np.where(neg, hi, mid)
        if np.all(hi - lo <= ROOT_XTOL):
            break
    eta = 0.5 * (lo + hi)
    for _ in range(2):
        g = _residual(Lam, theta, eta)
        dg = -Lam * np.sin(eta) - 2.0 * np.cos(theta + 2.0 * eta)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(dg != 0.0, g / dg, 0.0)
        cand = eta - step
        ok = (cand >= lo) & (cand <= hi) & (
            np.abs(_residual(Lam, theta, cand)) < np.abs(g))
        eta = np.where(ok, cand, eta)
    return eta


def eta_array(Lam, theta) -> np.ndarray:
    """Vectorised minimising half-angle eta_Lambda(theta)."""
    Lam, theta = _check_args(Lam, theta)
    eta = np.zeros(np.broadcast(Lam, theta).shape)
    near_one = np.abs(Lam - 1.0) <= LAMBDA_ONE_TOL
    below = (Lam < 1.0) & ~near_one
    # theta >= pi - arcsin(Lambda) forces eta = 0, including the boundary itself
    with np.errstate(invalid="ignore"):
        cut = math.pi - np.arcsin(np.minimum(Lam, 1.0))
    interior = below & (theta < cut)
    eta = np.where(near_one, np.maximum(0.5 * math.pi - theta, 0.0), eta)
    if np.any(interior):
        eta[interior] = _solve_interior(Lam[interior], theta[interior])
    return eta


def kappa_array(Lam, theta) -> np.ndarray:
    Lam, theta = _check_args(Lam, theta)
    eta = eta_array(Lam, theta)
    return np.cos(theta + 2.0 * eta) + 2.0 * Lam * np.sin(eta)


def eta_of_theta(Lam: float, theta: float) -> float:
    """Minimiser eta_Lambda(theta) of cos(theta + 2 eta) + 2 Lambda sin(eta)."""
    return float(eta_array(Lam, theta))


def kappa_of_theta(Lam: float, theta: float) -> float:
    """kappa_Lambda(theta) = min over eta of cos(theta + 2 eta) + 2 Lambda sin(eta)."""
    return float(kappa_array(Lam, theta))


def f_objective(Lam, theta, eta):
    """The function f_{theta,Lambda}(eta) minimised by kappa."""
    return np.cos(np.asarray(theta) + 2.0 * np.asarray(eta)) + 2.0 * np.asarray(Lam) * np.sin(eta)


def inflection_angle(Lam: float) -> float:
    """Angle pi - arcsin(Lambda) separating the concave and convex parts of
    kappa_Lambda; pi when Lambda >= 1."""
    if Lam >= 1.0:
        return math.pi
    return math.pi - math.asin(Lam)


def kappa_dtheta(Lam: float, theta: float) -> float:
    """Analytic derivative d kappa / d theta = -Lambda cos(eta_Lambda(theta)).

    Only valid on the open region 0 < Lambda < 1, 0 < theta < pi - arcsin(Lambda).
    """
    if not (0.0 < Lam < 1.0):
        raise DomainError("derivative identity requires 0 < Lambda < 1")
    if not (0.0 < theta < inflection_angle(Lam)):
        raise DomainError("derivative identity requires 0 < theta < pi - arcsin(Lambda)")
    return -Lam * math.cos(eta_of_theta(Lam, theta))


def kappa_slope(Lam, theta) -> np.ndarray:
    """d kappa / d theta wherever it exists: -Lambda cos(eta) where the
    minimiser is interior, -sin(theta) where kappa coincides with cos."""
    Lam, theta = _check_args(Lam, theta)
    eta = eta_array(Lam, theta)
    return np.where(eta > 0.0, -Lam * np.cos(eta), -np.sin(theta))


def _check_angles(phi, psi):
    for name, a in (("phi", phi), ("psi", psi)):
        if not (0.0 <= a <= 0.5 * math.pi):
            raise DomainError(f"{name} must lie in [0, pi/2]")


def K_reduced(ctx: DimensionContext, lam: float, phi: float, psi: float) -> float:
    """Reduced cost K_lambda(phi, psi) of the scalarised transport problem."""
    if not lam > 0:
        raise DomainError("lambda must be positive")
    _check_angles(phi, psi)
    Lam = lambda_to_Lambda(ctx, lam)
    if Lam >= 1.0:
        # kappa is cos(theta) here; this form is exact in lambda
        return ctx.prefactor * (1.0 + math.cos(phi + psi)) - lam
    kap = kappa_of_theta(Lam, phi + psi)
    return ctx.prefactor * (1.0 + kap - ctx.volume_ratio * Lam)


# --- brute-force oracle -----------------------------------------------------

def _quadruple_cost(ctx, lam, v1, n1, v2, n2):
    s = v1 + v2
    vis = ctx.prefactor * 0.5 * np.sum(s * s, axis=-1)
    gap = np.linalg.norm(n1 - n2, axis=-1)
    return vis + lam * (gap / ctx.volume_ratio - 1.0)


def _unit(a):
    return a / np.linalg.norm(a, axis=-1, keepdims=True)


def kernel_bruteforce_search(ctx: DimensionContext, lam: float, phi: float, psi: float,
                             samples: int = 10_000, seed: int = 0,
                             resolution: float = 1e-4) -> dict:
    """Direct minimisation of the quadruple cost, without the reduction to eta.

    Phase (a) scans coplanar configurations: n1 at angle 0, n2 at angle alpha
    in [0, pi], v1 and v2 on either side of their normals.  Phase (b) draws
    random feasible quadruples in R^d from a Philox stream.  Returns both
    minima and the minimising normal separation alpha of the scan.
    """
    if not lam > 0:
        raise DomainError("lambda must be positive")
    _check_angles(phi, psi)
    if samples < 10_000:
        raise DomainError("samples must be at least 1e4")
    d = ctx.d

    alpha = np.linspace(0.0, math.pi, int(math.ceil(math.pi / resolution)) + 1)
    zeros = np.zeros_like(alpha)

    def planar(angle):
        out = np.zeros(angle.shape + (d,))
        out[..., 0] = np.cos(angle)
        out[..., 1] = np.sin(angle)
        return out

    n1 = planar(zeros)
    n2 = planar(alpha)
    best_scan = math.inf
    best_alpha = 0.0
    for s1 in (-1.0, 1.0):
        v1 = planar(zeros + s1 * phi)
        for s2 in (-1.0, 1.0):
            v2 = planar(alpha + s2 * psi)
            cost = _quadruple_cost(ctx, lam, v1, n1, v2, n2)
            k = int(np.argmin(cost))
            if cost[k] < best_scan:
                best_scan = float(cost[k])
                best_alpha = float(alpha[k])

    rng = np.random.Generator(np.random.Philox(seed))
    m1 = _unit(rng.standard_normal((samples, d)))
    m2 = _unit(rng.standard_normal((samples, d)))

    def tilt(n, angle):
        u = rng.standard_normal((samples, d))
        u -= np.sum(u * n, axis=-1, keepdims=True) * n
        return math.cos(angle) * n + math.sin(angle) * _unit(u)

    w1 = tilt(m1, phi)
    w2 = tilt(m2, psi)
    best_random = float(np.min(_quadruple_cost(ctx, lam, w1, m1, w2, m2)))
    return {
        "value": min(best_scan, best_random),
        "scan": best_scan,
        "random": best_random,
        "alpha": best_alpha,
    }


def K_bruteforce(ctx: DimensionContext, lam: float, phi: float, psi: float,
                 samples: int = 10_000, seed: int = 0) -> float:
    """Brute-force value of K_lambda(phi, psi); see kernel_bruteforce_search."""
    return kernel_bruteforce_search(ctx, lam, phi, psi, samples, seed)["value"]
