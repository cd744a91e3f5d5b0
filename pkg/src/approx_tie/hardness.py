"""Lottery values of paving matroids encode perfect-matching counts.

For a graph with m edges and 2k vertices, the paving matroid on 2m elements
(one pair per edge) has rank min(|S|, 2k) on every set except the unions of
pairs indexed by perfect matchings, where it is 2k - 1.  The average rank over
a uniformly random set therefore falls short of the matching-free baseline by
exactly (#perfect matchings) / 2^(2m).
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from math import comb

import numpy as np

from .errors import BudgetError, ConsistencyError, DomainError
from .matroid import Graph, MatroidSpec, PavingMatroid, all_masks

PAVING_EDGE_BUDGET = 16
DIRECT_EDGE_BUDGET = 24
AVG_RANK_BUDGET = 16
_CHUNK = 1 << 16

__all__ = [
    "Graph",
    "paving_from_graph",
    "rank_sum_exact",
    "avg_rank_exact",
    "count_matchings_via_rank",
    "count_matchings_direct",
]


def paving_from_graph(g: Graph) -> PavingMatroid:
    if g.num_vertices % 2:
        raise DomainError(f"paving construction needs an even vertex count, got {g.num_vertices}")
    if g.num_edges > PAVING_EDGE_BUDGET:
        raise BudgetError(f"paving construction limited to {PAVING_EDGE_BUDGET} edges, got {g.num_edges}")
    return PavingMatroid(num_pairs=g.num_edges, k=g.num_vertices // 2, graph=g)


def rank_sum_exact(spec: MatroidSpec) -> int:
    """Sum of r(S) over all subsets, as an exact integer."""
    n = spec.ground_size
    if n > AVG_RANK_BUDGET:
        raise BudgetError(f"rank sum enumerates 2^{n} subsets; ground size > {AVG_RANK_BUDGET}")
    total = 0
    masks = all_masks(n)
    for start in range(0, masks.size, _CHUNK):
        total += int(spec.ranks(masks[start : start + _CHUNK]).sum(dtype=np.int64))
    return total


def avg_rank_exact(spec: MatroidSpec) -> float:
    return float(Fraction(rank_sum_exact(spec), 1 << spec.ground_size))


def count_matchings_via_rank(g: Graph) -> int:
    spec = paving_from_graph(g)
    n2 = spec.ground_size
    baseline = sum(comb(n2, s) * min(s, 2 * spec.k) for s in range(n2 + 1))
    # |F| = baseline - 2^(2m) * avg_rank; exact because avg_rank is kept as a Fraction
    count = Fraction(baseline) - Fraction(rank_sum_exact(spec), 1 << n2) * (1 << n2)
    if count.denominator != 1 or count < 0:
        raise ConsistencyError(f"matching count {count} is not a nonnegative integer")
    return int(count)


def count_matchings_direct(g: Graph) -> int:
    """Enumerate k-edge subsets covering every vertex exactly once."""
    if g.num_edges > DIRECT_EDGE_BUDGET:
        raise BudgetError(f"direct enumeration limited to {DIRECT_EDGE_BUDGET} edges")
    if g.num_vertices % 2:
        return 0
    k = g.num_vertices // 2
    return sum(1 for sel in combinations(range(g.num_edges), k) if g.is_perfect_matching(sel))
