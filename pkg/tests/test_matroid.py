import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from approx_tie.corpus import random_matroid
from approx_tie.errors import BudgetError, DomainError, ValidationError
from approx_tie.matroid import (
    ExplicitMatroid,
    Graph,
    GraphicMatroid,
    PartitionMatroid,
    PavingMatroid,
    UniformMatroid,
    check_matroid_axioms,
    rank,
)

C4 = Graph(4, ((0, 1), (1, 2), (2, 3), (3, 0)))
K4 = Graph(4, ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)))


def paving(g):
    return PavingMatroid(g.num_edges, g.num_vertices // 2, graph=g)


def test_uniform_rank_capped():
    assert rank(UniformMatroid(3, 2), {0, 1, 2}) == 2


def test_graphic_triangle_spanning_tree():
    tri = GraphicMatroid(3, ((0, 1), (1, 2), (2, 0)))
    assert rank(tri, [0, 1, 2]) == 2
    assert rank(tri, [0, 1]) == 2


def test_graphic_parallel_edges():
    g = GraphicMatroid(2, ((0, 1), (0, 1), (1, 0)))
    assert [rank(g, s) for s in ([], [0], [0, 1], [0, 1, 2])] == [0, 1, 1, 1]


def test_partition_rank():
    p = PartitionMatroid(((0,), (1, 2)), (1, 1))
    assert rank(p, {1, 2}) == 1
    assert rank(p, {0, 1, 2}) == 2


def test_paving_c4_matching_union_drops_rank():
    # pairs: edge i -> elements 2i, 2i+1; edges 0 and 2 form a perfect matching
    pv = paving(C4)
    assert rank(pv, {0, 1, 4, 5}) == 3
    assert rank(pv, {2, 3, 6, 7}) == 3
    # edges 0 and 1 share vertex 1: not a matching
    assert rank(pv, {0, 1, 2, 3}) == 4
    # four elements that are not a union of pairs
    assert rank(pv, {0, 2, 4, 6}) == 4
    assert rank(pv, {0, 1, 4, 5, 6}) == 4


def test_paving_matches_brute_force_definition():
    # rank from the independence definition: largest independent subset
    pv = paving(K4)
    k = 2

    def independent(s):
        if len(s) < 2 * k:
            return True
        if len(s) > 2 * k:
            return False
        pairs = {e // 2 for e in s}
        union = len(pairs) == k and all({2 * p, 2 * p + 1} <= s for p in pairs)
        return not (union and K4.is_perfect_matching(sorted(pairs)))

    rng = np.random.default_rng(7)
    for mask in rng.integers(0, 1 << 12, size=300):
        s = {e for e in range(12) if mask >> e & 1}
        expected = max(len(t) for r in range(len(s) + 1) for t in map(set, itertools.combinations(s, r)) if independent(t))
        assert rank(pv, s) == expected


def test_paving_family_variant():
    pv = PavingMatroid(3, 2, family=frozenset({frozenset({0, 2})}))
    assert rank(pv, {0, 1, 4, 5}) == 3
    assert rank(pv, {0, 1, 2, 3}) == 4


def test_explicit_rank_is_largest_contained_set():
    ex = ExplicitMatroid(3, frozenset(map(frozenset, [(), (0,), (1,), (2,), (0, 1)])))
    assert rank(ex, {0, 1, 2}) == 2
    assert rank(ex, {1, 2}) == 1


def test_out_of_range_element():
    with pytest.raises(DomainError):
        rank(UniformMatroid(3, 1), {3})
    with pytest.raises(DomainError):
        rank(UniformMatroid(3, 1), 0b1000)


@pytest.mark.parametrize(
    "make",
    [
        lambda: UniformMatroid(3, 4),
        lambda: PartitionMatroid(((0, 1), (1, 2)), (1, 1)),
        lambda: PartitionMatroid(((0,), (2,)), (1, 1)),
        lambda: PartitionMatroid(((0, 1),), (3,)),
        lambda: PavingMatroid(3, 2, graph=Graph(3, ((0, 1), (1, 2), (2, 0)))),
        lambda: GraphicMatroid(2, ((0, 2),)),
        lambda: Graph(3, ((1, 1),)),
    ],
)
def test_invalid_specs_rejected(make):
    with pytest.raises(ValidationError):
        make()


def test_axioms_uniform_and_paving_pass():
    assert check_matroid_axioms(UniformMatroid(4, 2)).passed
    assert check_matroid_axioms(paving(C4)).passed
    assert check_matroid_axioms(paving(K4)).passed


def test_axioms_reject_non_downward_closed_family():
    fam = [(), (0,), (0, 1), (2,)]  # {0,1} present but {1} missing
    rep = check_matroid_axioms(ExplicitMatroid(3, frozenset(map(frozenset, fam))))
    assert not rep.passed
    assert "downward" in rep.violation


def test_axioms_reject_exchange_failure():
    # downward closed but {0,1} and {2} violate augmentation
    fam = [(), (0,), (1,), (2,), (0, 1)]
    rep = check_matroid_axioms(ExplicitMatroid(3, frozenset(map(frozenset, fam))))
    assert not rep.passed
    assert rep.violation == "submodularity violated"


def test_axioms_budget():
    with pytest.raises(BudgetError):
        check_matroid_axioms(UniformMatroid(17, 3))


def test_rank_table_agrees_with_scalar_rank():
    g = GraphicMatroid(4, ((0, 1), (1, 2), (2, 3), (3, 0), (0, 2)))
    table = g.rank_table
    for mask in range(1 << 5):
        assert table[mask] == g.rank(mask)


@given(seed=st.integers(0, 2**32 - 1), m=st.integers(1, 8))
def test_random_specs_are_matroids(seed, m):
    spec = random_matroid(np.random.default_rng(seed), m)
    assert check_matroid_axioms(spec).passed


@given(seed=st.integers(0, 2**32 - 1), m=st.integers(1, 8), mask=st.integers(0, 255))
def test_rank_bounds_and_determinism(seed, m, mask):
    spec = random_matroid(np.random.default_rng(seed), m)
    mask &= (1 << m) - 1
    r = spec.rank(mask)
    assert 0 <= r <= bin(mask).count("1")
    assert r == spec.rank(mask)
