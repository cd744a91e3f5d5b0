"""Weighted matroid rank sum valuations and auction instances."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import BudgetError, ValidationError
from .matroid import TABLE_BUDGET, MatroidSpec, to_mask
from .rng import block_uniforms

EXACT_BUDGET = TABLE_BUDGET  # items, for 2^m enumeration
# up to this many items the oracle answers from the cached value table
LOOKUP_ITEMS = 16


@dataclass(frozen=True)
class WMRSValuation:
    """v(S) = sum_l weight_l * rank_l(S)."""

    num_items: int
    components: tuple[tuple[float, MatroidSpec], ...] = ()

    def __post_init__(self):
        comps = tuple((float(w), mat) for w, mat in self.components)
        object.__setattr__(self, "components", comps)
        for w, mat in comps:
            if not (w >= 0.0 and math.isfinite(w)):
                raise ValidationError(f"component weight must be finite and >= 0, got {w}")
            if mat.ground_size != self.num_items:
                raise ValidationError(
                    f"component matroid has ground size {mat.ground_size}, expected {self.num_items}"
                )

    def value(self, subset) -> float:
        mask = to_mask(subset, self.num_items)
        return float(self.values(np.array([mask], dtype=np.uint64))[0])

    def values(self, masks) -> np.ndarray:
        """Vectorized value oracle over an array of item masks."""
        masks = np.asarray(masks, dtype=np.uint64)
        if self.num_items <= LOOKUP_ITEMS:
            return self.table[masks.astype(np.int64)]
        out = np.zeros(masks.shape)
        for w, mat in self.components:
            if w:
                out += w * mat.ranks(masks)
        return out

    @cached_property
    def table(self) -> np.ndarray:
        """Values of all 2^m item sets, indexed by mask."""
        if self.num_items > EXACT_BUDGET:
            raise BudgetError(f"value table needs m <= {EXACT_BUDGET}, got {self.num_items}")
        out = np.zeros(1 << self.num_items)
        for w, mat in self.components:
            if w:
                out += w * mat.rank_table
        return out

    def scaled(self, factor: float) -> "WMRSValuation":
        return WMRSValuation(self.num_items, tuple((w * factor, mat) for w, mat in self.components))


@dataclass(frozen=True)
class AuctionInstance:
    num_items: int
    valuations: tuple[WMRSValuation, ...]
    # labels kept through bidder removal so sub-instances stay comparable
    bidder_ids: tuple[int, ...] = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "valuations", tuple(self.valuations))
        if self.bidder_ids is None:
            object.__setattr__(self, "bidder_ids", tuple(range(len(self.valuations))))
        if self.num_items < 1:
            raise ValidationError("an auction needs at least one item")
        if len(self.valuations) < 1:
            raise ValidationError("an auction needs at least one bidder")
        if len(self.bidder_ids) != len(self.valuations):
            raise ValidationError("bidder_ids must match valuations")
        for v in self.valuations:
            if v.num_items != self.num_items:
                raise ValidationError(f"valuation over {v.num_items} items in a {self.num_items}-item auction")

    @property
    def num_bidders(self) -> int:
        return len(self.valuations)

    @cached_property
    def tables(self) -> np.ndarray:
        """Stacked value tables, shape (n, 2^m)."""
        return np.stack([v.table for v in self.valuations])

    def without(self, bidder: int) -> "AuctionInstance":
        keep = [k for k in range(self.num_bidders) if k != bidder]
        return AuctionInstance(
            self.num_items,
            tuple(self.valuations[k] for k in keep),
            tuple(self.bidder_ids[k] for k in keep),
        )

    def with_valuation(self, bidder: int, v: WMRSValuation) -> "AuctionInstance":
        vals = list(self.valuations)
        vals[bidder] = v
        return AuctionInstance(self.num_items, tuple(vals), self.bidder_ids)


def value(v: WMRSValuation, subset) -> float:
    return v.value(subset)


def ground_value(v: WMRSValuation) -> float:
    return v.value((1 << v.num_items) - 1)


def _check_probs(probs: Sequence[float], m: int) -> np.ndarray:
    p = np.asarray(probs, dtype=np.float64)
    if p.shape != (m,):
        raise ValidationError(f"expected {m} probabilities, got shape {p.shape}")
    if np.any(p < 0.0) or np.any(p > 1.0):
        raise ValidationError("probabilities must lie in [0, 1]")
    return p


def exact_lottery_value(v: WMRSValuation, probs) -> float:
    """E[v(R)] with item j in R independently with probability probs[j]."""
    if v.num_items > EXACT_BUDGET:
        raise BudgetError(f"exact lottery value enumerates 2^m sets; m = {v.num_items} > {EXACT_BUDGET}")
    p = _check_probs(probs, v.num_items)
    return float(_kernels.row_values(v.table[None, :], p[None, :])[0])


def sample_masks(probs: np.ndarray, num_samples: int, seed, *labels) -> np.ndarray:
    """Independent coordinate roundings of ``probs`` as uint64 item masks."""
    m = probs.shape[0]
    u = block_uniforms(seed, num_samples, m, *labels)
    bits = (u < probs).astype(np.uint64)
    weights = np.left_shift(np.uint64(1), np.arange(m, dtype=np.uint64))
    return (bits * weights).sum(axis=1, dtype=np.uint64)


def mean_and_stderr(samples: np.ndarray) -> tuple[float, float]:
    """Sample mean and its standard error; stderr is 0 for a single sample."""
    n = samples.shape[0]
    mean = float(samples.mean())
    if n < 2:
        return mean, 0.0
    return mean, float(samples.std(ddof=1) / math.sqrt(n))


def sampled_lottery_value(v: WMRSValuation, probs, num_samples: int, rng_seed=0) -> tuple[float, float]:
    """Monte-Carlo estimate of ``exact_lottery_value`` with its standard error."""
    if num_samples < 1:
        raise ValidationError("num_samples must be >= 1")
    p = _check_probs(probs, v.num_items)
    vals = v.values(sample_masks(p, num_samples, rng_seed, "lottery"))
    return mean_and_stderr(vals)


def check_monotone_submodular(v: WMRSValuation, tol: float = 1e-12) -> str | None:
    """Exhaustive check on the value table; returns a description of the first
    violation, or None."""
    t = v.table
    m = v.num_items
    masks = np.arange(1 << m)
    if abs(t[0]) > tol:
        return f"v(empty) = {t[0]}"
    for a in range(m):
        base = masks[(masks >> a & 1) == 0]
        if np.any(t[base | 1 << a] < t[base] - tol):
            return f"monotonicity fails adding item {a}"
        for b in range(a + 1, m):
            base_ab = base[(base >> b & 1) == 0]
            lhs = t[base_ab | 1 << a] + t[base_ab | 1 << b]
            rhs = t[base_ab | 1 << a | 1 << b] + t[base_ab]
            bad = np.flatnonzero(lhs < rhs - tol)
            if bad.size:
                return f"submodularity fails at S={int(base_ab[bad[0]]):#x}, items {a}, {b}"
    return None
