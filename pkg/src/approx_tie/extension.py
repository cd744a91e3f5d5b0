"""The multilinear extension F of the aggregate valuation and F^exp = F(1 - e^-x).

F decomposes into per-bidder row extensions because the aggregate valuation
is a sum over disjoint coordinate rows; exact evaluation is therefore a
2^m-term sum per bidder rather than 2^(nm).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import BudgetError, ValidationError
from .valuation import EXACT_BUDGET, AuctionInstance, sample_masks

FEASIBILITY_TOL = 1e-12


@dataclass(frozen=True)
class GradientEstimate:
    g: np.ndarray
    mode: str  # "exact" | "sampled"
    claimed_error: float = 0.0
    num_samples: int = 0


def check_point(instance: AuctionInstance, x, name: str = "x") -> np.ndarray:
    """Validate membership of ``x`` in the fractional-allocation polytope."""
    x = np.asarray(x, dtype=np.float64)
    shape = (instance.num_bidders, instance.num_items)
    if x.shape != shape:
        raise ValidationError(f"{name} has shape {x.shape}, expected {shape}")
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise ValidationError(f"{name} has entries outside [0, 1]")
    if np.any(x.sum(axis=0) > 1.0 + FEASIBILITY_TOL):
        raise ValidationError(f"{name} allocates more than one unit of some item")
    return x


def _check_budget(instance: AuctionInstance) -> None:
    if instance.num_items > EXACT_BUDGET:
        raise BudgetError(f"exact evaluation enumerates 2^m sets; m = {instance.num_items} > {EXACT_BUDGET}")


def exact_F(instance: AuctionInstance, y) -> float:
    _check_budget(instance)
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (instance.num_bidders, instance.num_items) or np.any(y < 0) or np.any(y > 1):
        raise ValidationError("y must be an n x m matrix with entries in [0, 1]")
    return float(_kernels.row_values(instance.tables, y).sum())


def exact_Fexp(instance: AuctionInstance, x) -> float:
    _check_budget(instance)
    x = check_point(instance, x)
    return _kernels.fexp_value(instance.tables, x)


def exact_grad_Fexp(instance: AuctionInstance, x) -> GradientEstimate:
    _check_budget(instance)
    x = check_point(instance, x)
    return GradientEstimate(_kernels.fexp_grad(instance.tables, x), "exact")


def gradient_sample_count(n: int, m: int, target_delta: float, eta: float) -> int:
    """Hoeffding sample size so all n*m coordinates are within target_delta*M w.p. >= 1 - eta."""
    return math.ceil(math.log(2 * n * m / eta) / (2.0 * target_delta**2))


def sampled_grad_Fexp(
    instance: AuctionInstance,
    x,
    target_delta: float,
    M: float,
    eta: float,
    rng_seed=0,
) -> GradientEstimate:
    """Monte-Carlo gradient of F^exp from marginal-value samples.

    Sample R row-wise from y = 1 - e^-x; each coordinate averages
    v_i(R + j) - v_i(R - j), a quantity in [0, M] by submodularity, and is
    scaled by e^-x_ij.  The same draws of R are shared across the items of
    one bidder; each coordinate still sees N independent samples.
    """
    if target_delta <= 0:
        raise ValidationError("target_delta must be positive")
    if not 0 < eta < 1:
        raise ValidationError("eta must lie in (0, 1)")
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (instance.num_bidders, instance.num_items) or np.any(x < 0.0):
        raise ValidationError("x must be a nonnegative n x m matrix")
    n, m = x.shape
    N = gradient_sample_count(n, m, target_delta, eta)
    y = -np.expm1(-x)
    g = np.empty((n, m))
    for i, v in enumerate(instance.valuations):
        R = sample_masks(y[i], N, rng_seed, "grad", i)
        for j in range(m):
            bit = np.uint64(1 << j)
            marg = v.values(R | bit) - v.values(R & ~bit)
            g[i, j] = marg.mean()
    g *= np.exp(-x)
    return GradientEstimate(g, "sampled", claimed_error=target_delta * M, num_samples=N)
