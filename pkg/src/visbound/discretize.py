"""Discrete marginal and midpoint cost matrix of the transport LP."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import DimensionContext, lambda_to_Lambda
from .errors import DomainError, InvalidDimensionError
from .kernel import kappa_array


@dataclass(frozen=True)
class MarginalWeights:
    d: int
    n: int
    weights: np.ndarray


@dataclass(frozen=True)
class CostMatrix:
    n: int
    lam: float
    d: int
    entries: np.ndarray


def cell_midpoints(n: int) -> np.ndarray:
    """Midpoints (i - 1/2) pi / (2n), i = 1..n, of the uniform grid on [0, pi/2]."""
    return (np.arange(n) + 0.5) * (0.5 * math.pi / n)


def marginal_weights(d: int, n: int) -> MarginalWeights:
    """Exact cell masses of the measure with distribution function sin^{d-1}."""
    if d < 2:
        raise InvalidDimensionError("d must be >= 2")
    if n < 1:
        raise DomainError("n must be >= 1")
    edges = np.sin(np.arange(n + 1) * (0.5 * math.pi / n)) ** (d - 1)
    edges[0] = 0.0
    edges[-1] = 1.0
    w = np.diff(edges)
    w.setflags(write=False)
    return MarginalWeights(d=d, n=n, weights=w)


def kernel_on_sums(ctx: DimensionContext, lam: float, n: int) -> np.ndarray:
    """kappa_Lambda at the 2n - 1 distinct midpoint sums, index i + j."""
    if not lam > 0:
        raise DomainError("lambda must be positive")
    if n < 1:
        raise DomainError("n must be >= 1")
    theta = (np.arange(2 * n - 1) + 1.0) * (0.5 * math.pi / n)
    return kappa_array(lambda_to_Lambda(ctx, lam), theta)


def cost_matrix(ctx: DimensionContext, lam: float, n: int) -> CostMatrix:
    """c_ij = 1 + kappa_Lambda(mid_i + mid_j), built from 2n - 1 kernel values."""
    vals = 1.0 + kernel_on_sums(ctx, lam, n)
    idx = np.arange(n)
    entries = vals[idx[:, None] + idx[None, :]]
    entries.setflags(write=False)
    return CostMatrix(n=n, lam=lam, d=ctx.d, entries=entries)
