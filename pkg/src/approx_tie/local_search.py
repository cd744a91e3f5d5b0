"""Local-search allocation rule: ascent on F^exp over the allocation polytope,
followed by Poisson rounding to a random allocation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _kernels
from .errors import ValidationError
from .extension import sampled_grad_Fexp
from .rng import block_uniforms, derive_seed
from .valuation import AuctionInstance

UNALLOCATED = -1


def _exact(eps: float) -> Fraction:
    # decimal reading of the float, so 0.05 gives the cap 64 m^3 n^2 / (1/20)^2
    return Fraction(repr(float(eps)))


def step_size(eps: float, m: int, n: int) -> float:
    return float(_exact(eps) / (8 * m * m * n * n))


def default_iteration_cap(eps: float, m: int, n: int) -> int:
    return math.ceil(Fraction(64 * m**3 * n**2) / _exact(eps) ** 2)


@dataclass(frozen=True)
class LocalSearchConfig:
    epsilon: float = 0.1
    gradient_mode: str = "exact"
    eta: float = 0.01
    rng_seed: int = 0
    iteration_cap_override: int | None = None

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ValidationError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.gradient_mode not in ("exact", "sampled"):
            raise ValidationError(f"gradient_mode must be 'exact' or 'sampled', got {self.gradient_mode!r}")
        if not 0.0 < self.eta < 1.0:
            raise ValidationError(f"eta must lie in (0, 1), got {self.eta}")
        if self.iteration_cap_override is not None and self.iteration_cap_override < 0:
            raise ValidationError("iteration_cap_override must be nonnegative")

    def delta(self, m: int, n: int) -> float:
        return step_size(self.epsilon, m, n)

    def iteration_cap(self, m: int, n: int) -> int:
        if self.iteration_cap_override is not None:
            return self.iteration_cap_override
        return default_iteration_cap(self.epsilon, m, n)


@dataclass
class SearchTrace:
    """Per-iteration records of one run.

    Record t describes the point before step t: ``values[t]`` is F^exp there
    (NaN in sampled mode), ``gains[t]`` the improvement bound (y - x).g, and
    ``accepted[t]`` whether the step was taken.
    """

    values: np.ndarray
    gains: np.ndarray
    accepted: np.ndarray
    x: np.ndarray
    reason: str  # "converged" | "cap"
    M: float
    delta: float
    iteration_cap: int

    @property
    def iterations(self) -> int:
        return int(self.accepted.sum())


@dataclass(frozen=True)
class Allocation:
    """owner[j] is the bidder receiving item j, or -1."""

    owner: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "owner", tuple(int(o) for o in self.owner))

    def bundle(self, bidder: int) -> int:
        return sum(1 << j for j, o in enumerate(self.owner) if o == bidder)

    def welfare(self, instance: AuctionInstance) -> float:
        return sum(v.value(self.bundle(i)) for i, v in enumerate(instance.valuations))


def singleton_max(instance: AuctionInstance) -> float:
    singles = np.left_shift(np.uint64(1), np.arange(instance.num_items, dtype=np.uint64))
    return float(max(v.values(singles).max() for v in instance.valuations))


def best_direction(g) -> np.ndarray:
    """Vertex of the polytope maximizing y.g: each item to its best positive bidder."""
    g = g.g if hasattr(g, "g") else g
    return _kernels.best_direction(g)


def local_search(instance: AuctionInstance, config: LocalSearchConfig) -> tuple[np.ndarray, SearchTrace]:
    n, m = instance.num_bidders, instance.num_items
    delta = config.delta(m, n)
    cap = config.iteration_cap(m, n)
    M = singleton_max(instance)

    if M == 0.0:
        x = np.zeros((n, m))
        trace = SearchTrace(np.zeros(1), np.zeros(1), np.zeros(1, dtype=bool), x, "converged", M, delta, cap)
        return x, trace

    if config.gradient_mode == "exact":
        x, values, gains, it, converged = _kernels.local_search_exact(
            instance.tables, config.epsilon, M, delta, cap
        )
    else:
        x, values, gains, it, converged = _sampled_loop(instance, config, M, delta, cap)

    accepted = np.zeros(len(gains), dtype=bool)
    accepted[:it] = True
    trace = SearchTrace(values, gains, accepted, x, "converged" if converged else "cap", M, delta, cap)
    return x, trace


def _sampled_loop(instance, config, M, delta, cap):
    n, m = instance.num_bidders, instance.num_items
    x = np.zeros((n, m))
    threshold = 0.5 * config.epsilon * M
    eta_step = config.eta / max(cap, 1)
    gains = []
    it = 0
    while True:
        seed = derive_seed(config.rng_seed, "search", it)
        g = sampled_grad_Fexp(instance, x, delta, M, eta_step, seed).g
        y = _kernels.best_direction(g)
        gain = float(((y - x) * g).sum())
        gains.append(gain)
        if gain <= threshold:
            return x, np.full(len(gains), np.nan), np.array(gains), it, True
        if it >= cap:
            return x, np.full(len(gains), np.nan), np.array(gains), it, False
        x = x + delta * (y - x)
        it += 1


def rounding_marginals(x) -> np.ndarray:
    return -np.expm1(-np.asarray(x, dtype=np.float64))


def poisson_round_many(x, num: int, seed, *labels) -> np.ndarray:
    """``num`` independent roundings; returns owners with shape (num, m)."""
    q = rounding_marginals(x)
    n, m = q.shape
    cum = np.cumsum(q, axis=0)
    u = block_uniforms(seed, num, m, "round", *labels)
    owners = np.empty((num, m), dtype=np.int64)
    for j in range(m):
        # number of cumulative marginals <= u, i.e. the first bidder whose interval holds u
        owners[:, j] = np.searchsorted(cum[:, j], u[:, j], side="right")
    owners[owners == n] = UNALLOCATED
    return owners


def poisson_round(x, rng_seed=0) -> Allocation:
    """Each item j goes to bidder i with probability 1 - e^-x_ij, independently across items."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or np.any(x < 0) or np.any(x.sum(axis=0) > 1 + 1e-12):
        raise ValidationError("x must be a point of the allocation polytope")
    return Allocation(poisson_round_many(x, 1, rng_seed)[0])


def bundle_masks(owners: np.ndarray, n: int) -> np.ndarray:
    """Item masks per bidder for a batch of owner vectors; shape (n, num)."""
    num, m = owners.shape
    out = np.zeros((n, num), dtype=np.uint64)
    cols = np.arange(num)
    for j in range(m):
        got = owners[:, j] != UNALLOCATED
        out[owners[got, j], cols[got]] |= np.uint64(1 << j)
    return out


def bidder_values(instance: AuctionInstance, owners: np.ndarray) -> np.ndarray:
    """Realized value of every bidder for every rounding; shape (n, num)."""
    masks = bundle_masks(owners, instance.num_bidders)
    return np.stack([v.values(masks[i]) for i, v in enumerate(instance.valuations)])
