"""Matroid rank oracles.

Subsets of the ground set are bit masks: element ``e`` is bit ``e``.  Scalar
calls take a Python ``int`` (or any iterable of indices); table and batch
calls take ``numpy.uint64`` arrays.  Ground sets are limited to 64 elements.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, Union

import numpy as np

from .errors import BudgetError, DomainError, ValidationError

MAX_GROUND = 64
TABLE_BUDGET = 20  # largest ground set for a full 2^n rank table
AXIOM_BUDGET = 16

_EVEN_BITS = np.uint64(0x5555555555555555)


def to_mask(subset, ground_size: int) -> int:
    """Normalize an int mask or an iterable of indices to an int mask."""
    if isinstance(subset, (int, np.integer)):
        mask = int(subset)
        if mask < 0 or mask >> ground_size:
            raise DomainError(f"subset mask {mask:#x} exceeds ground set of size {ground_size}")
        return mask
    mask = 0
    for e in subset:
        e = int(e)
        if not 0 <= e < ground_size:
            raise DomainError(f"element {e} out of range for ground set of size {ground_size}")
        mask |= 1 << e
    return mask


def mask_elements(mask: int) -> list[int]:
    return [e for e in range(mask.bit_length()) if mask >> e & 1]


def all_masks(ground_size: int) -> np.ndarray:
    if ground_size > TABLE_BUDGET:
        raise BudgetError(f"2^{ground_size} subsets exceeds table budget 2^{TABLE_BUDGET}")
    return np.arange(1 << ground_size, dtype=np.uint64)


def popcount(masks: np.ndarray) -> np.ndarray:
    return np.bitwise_count(np.asarray(masks, dtype=np.uint64)).astype(np.int64)


@dataclass(frozen=True)
class Graph:
    """Simple undirected multigraph given by an edge list."""

    num_vertices: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple((int(u), int(v)) for u, v in self.edges))
        if self.num_vertices < 0:
            raise ValidationError("num_vertices must be nonnegative")
        for u, v in self.edges:
            if u == v:
                raise ValidationError(f"self-loop at vertex {u}")
            if not (0 <= u < self.num_vertices and 0 <= v < self.num_vertices):
                raise ValidationError(f"edge ({u}, {v}) has a vertex out of range")

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def is_perfect_matching(self, edge_ids: Iterable[int]) -> bool:
        covered = 0
        count = 0
        for i in edge_ids:
            u, v = self.edges[i]
            bits = (1 << u) | (1 << v)
            if covered & bits:
                return False
            covered |= bits
            count += 1
        return 2 * count == self.num_vertices


class Matroid:
    """Shared behaviour; subclasses provide ``ground_size`` and ``ranks``."""

    ground_size: int

    def rank(self, subset) -> int:
        mask = to_mask(subset, self.ground_size)
        return int(self.ranks(np.array([mask], dtype=np.uint64))[0])

    def ranks(self, masks: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @cached_property
    def rank_table(self) -> np.ndarray:
        """Ranks of all 2^n subsets, indexed by mask."""
        return self.ranks(all_masks(self.ground_size))

    def _check_masks(self, masks) -> np.ndarray:
        masks = np.asarray(masks, dtype=np.uint64)
        if self.ground_size < MAX_GROUND and masks.size and int(masks.max()) >> self.ground_size:
            raise DomainError(f"subset exceeds ground set of size {self.ground_size}")
        return masks


@dataclass(frozen=True)
class UniformMatroid(Matroid):
    ground_size: int
    k: int

    def __post_init__(self):
        _check_ground(self.ground_size)
        if not 0 <= self.k <= self.ground_size:
            raise ValidationError(f"uniform matroid needs 0 <= k <= {self.ground_size}, got k={self.k}")

    def ranks(self, masks):
        return np.minimum(popcount(self._check_masks(masks)), self.k)


@dataclass(frozen=True)
class PartitionMatroid(Matroid):
    blocks: tuple[tuple[int, ...], ...]
    capacities: tuple[int, ...]
    ground_size: int = field(init=False)

    def __post_init__(self):
        blocks = tuple(tuple(int(e) for e in b) for b in self.blocks)
        caps = tuple(int(c) for c in self.capacities)
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "capacities", caps)
        if len(blocks) != len(caps):
            raise ValidationError("partition matroid needs one capacity per block")
        seen = [e for b in blocks for e in b]
        n = len(seen)
        object.__setattr__(self, "ground_size", n)
        _check_ground(n)
        if sorted(seen) != list(range(n)):
            raise ValidationError("partition blocks must be disjoint and cover 0..n-1")
        for b, c in zip(blocks, caps):
            if not 0 <= c <= len(b):
                raise ValidationError(f"capacity {c} invalid for block of size {len(b)}")

    @cached_property
    def _block_masks(self) -> list[np.uint64]:
        return [np.uint64(to_mask(b, self.ground_size)) for b in self.blocks]

    def ranks(self, masks):
        masks = self._check_masks(masks)
        out = np.zeros(masks.shape, dtype=np.int64)
        for bm, cap in zip(self._block_masks, self.capacities):
            out += np.minimum(popcount(masks & bm), cap)
        return out


@dataclass(frozen=True)
class GraphicMatroid(Matroid):
    num_vertices: int
    edges: tuple[tuple[int, int], ...]
    ground_size: int = field(init=False)

    def __post_init__(self):
        edges = tuple((int(u), int(v)) for u, v in self.edges)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "ground_size", len(edges))
        _check_ground(len(edges))
        for u, v in edges:
            if not (0 <= u < self.num_vertices and 0 <= v < self.num_vertices):
                raise ValidationError(f"edge ({u}, {v}) has a vertex out of range")

    def _rank_one(self, mask: int) -> int:
        # union-find over the selected edges; rank = number of merging edges
        parent = list(range(self.num_vertices))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        r = 0
        for e in mask_elements(mask):
            u, v = self.edges[e]
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[ru] = rv
                r += 1
        return r

    def ranks(self, masks):
        masks = self._check_masks(masks)
        flat = [self._rank_one(int(s)) for s in masks.ravel()]
        return np.array(flat, dtype=np.int64).reshape(masks.shape)


@dataclass(frozen=True)
class PavingMatroid(Matroid):
    """Pairs construction: ground set {2i, 2i+1} for pair i = 0..num_pairs-1.

    Rank is min(|S|, 2k), except 2k-1 when S is exactly the union of the k
    pairs indexed by a member of the family.  The family is either the
    perfect matchings of ``graph`` (pair i is edge i) or an explicit list.
    """

    num_pairs: int
    k: int
    graph: Graph | None = None
    family: frozenset[frozenset[int]] | None = None
    ground_size: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "ground_size", 2 * self.num_pairs)
        _check_ground(self.ground_size)
        if (self.graph is None) == (self.family is None):
            raise ValidationError("paving matroid needs exactly one of graph or family")
        if self.graph is not None:
            if self.graph.num_vertices % 2:
                raise DomainError("paving construction needs an even vertex count")
            if self.k != self.graph.num_vertices // 2:
                raise ValidationError("paving k must equal num_vertices / 2")
            if self.num_pairs != self.graph.num_edges:
                raise ValidationError("paving needs one pair per graph edge")
        else:
            fam = frozenset(frozenset(int(i) for i in f) for f in self.family)
            object.__setattr__(self, "family", fam)
            for f in fam:
                if len(f) != self.k or not all(0 <= i < self.num_pairs for i in f):
                    raise ValidationError(f"family member {sorted(f)} is not a {self.k}-subset of pairs")
            if not 0 <= self.k <= self.num_pairs:
                raise ValidationError("paving k must lie in 0..num_pairs")

    def is_circuit_hyperplane(self, pair_ids: list[int]) -> bool:
        if self.graph is not None:
            return self.graph.is_perfect_matching(pair_ids)
        return frozenset(pair_ids) in self.family

    def ranks(self, masks):
        masks = self._check_masks(masks)
        size = popcount(masks)
        out = np.minimum(size, 2 * self.k)
        lo = masks & _EVEN_BITS
        hi = (masks >> np.uint64(1)) & _EVEN_BITS
        candidates = np.flatnonzero(((size == 2 * self.k) & (lo == hi)).ravel())
        flat_lo = lo.ravel()
        flat_out = out.ravel()
        for idx in candidates:
            pairs = [e // 2 for e in mask_elements(int(flat_lo[idx]))]
            if self.is_circuit_hyperplane(pairs):
                flat_out[idx] -= 1
        return flat_out.reshape(masks.shape)


@dataclass(frozen=True)
class ExplicitMatroid(Matroid):
    """Independent-set family given by enumeration; for tests.

    The family is not validated here; ``check_matroid_axioms`` reports
    downward-closure and exchange failures.
    """

    ground_size: int
    independent_sets: frozenset[int]

    def __post_init__(self):
        _check_ground(self.ground_size)
        fam = frozenset(to_mask(s, self.ground_size) for s in self.independent_sets)
        object.__setattr__(self, "independent_sets", fam)

    def ranks(self, masks):
        masks = self._check_masks(masks)
        out = np.zeros(masks.shape, dtype=np.int64)
        for ind in self.independent_sets:
            m = np.uint64(ind)
            out = np.where((masks & m) == m, np.maximum(out, ind.bit_count()), out)
        return out


MatroidSpec = Union[UniformMatroid, PartitionMatroid, GraphicMatroid, PavingMatroid, ExplicitMatroid]


def _check_ground(n: int) -> None:
    if not 0 <= n <= MAX_GROUND:
        raise ValidationError(f"ground set size {n} outside 0..{MAX_GROUND}")


def rank(spec: MatroidSpec, subset) -> int:
    return spec.rank(subset)


@dataclass
class AxiomReport:
    passed: bool
    violation: str | None = None
    witness: tuple | None = None

    def __bool__(self):
        return self.passed


def check_matroid_axioms(spec: MatroidSpec) -> AxiomReport:
    """Exhaustively check the rank axioms over every subset.

    Submodularity is checked in its local form
    r(S+a) + r(S+b) >= r(S+a+b) + r(S) for all S and a, b outside S, which is
    equivalent to the all-pairs form given monotonicity.  The witness is the
    first violating (S, a, b) or (S, e) as masks and elements.
    """
    n = spec.ground_size
    if n > AXIOM_BUDGET:
        raise BudgetError(f"axiom check is exhaustive; ground size {n} > {AXIOM_BUDGET}")

    if isinstance(spec, ExplicitMatroid):
        fam = spec.independent_sets
        if 0 not in fam:
            return AxiomReport(False, "family does not contain the empty set", (0,))
        for ind in sorted(fam):
            for e in mask_elements(ind):
                if ind & ~(1 << e) not in fam:
                    return AxiomReport(False, "family is not downward closed", (ind, e))

    masks = all_masks(n)
    r = spec.ranks(masks)
    if r[0] != 0:
        return AxiomReport(False, "rank of empty set is nonzero", (0,))
    size = popcount(masks)
    bad = np.flatnonzero((r < 0) | (r > size))
    if bad.size:
        return AxiomReport(False, "rank outside [0, |S|]", (int(bad[0]),))

    for e in range(n):
        bit = np.uint64(1 << e)
        base = masks[(masks & bit) == 0]
        inc = r[base | bit] - r[base]
        bad = np.flatnonzero((inc < 0) | (inc > 1))
        if bad.size:
            s = int(base[bad[0]])
            what = "monotonicity" if inc[bad[0]] < 0 else "unit increment"
            return AxiomReport(False, f"{what} violated", (s, e))

    for a, b in combinations(range(n), 2):
        ab = np.uint64((1 << a) | (1 << b))
        base = masks[(masks & ab) == 0]
        ba, bb = np.uint64(1 << a), np.uint64(1 << b)
        lhs = r[base | ba] + r[base | bb]
        rhs = r[base | ab] + r[base]
        bad = np.flatnonzero(lhs < rhs)
        if bad.size:
            return AxiomReport(False, "submodularity violated", (int(base[bad[0]]), a, b))

    return AxiomReport(True)
