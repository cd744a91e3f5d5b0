import itertools

import numpy as np
import pytest
from hypothesis import settings

from approx_tie.matroid import PartitionMatroid, UniformMatroid
from approx_tie.valuation import AuctionInstance, WMRSValuation

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def wmrs(m, *components):
    return WMRSValuation(m, tuple(components))


def brute_F(instance, y):
    """Multilinear extension of the aggregate valuation by enumerating all
    2^(nm) subsets of bidder-item pairs, through the value oracle only."""
    n, m = instance.num_bidders, instance.num_items
    y = np.asarray(y, dtype=float)
    total = 0.0
    for bits in itertools.product((0, 1), repeat=n * m):
        sel = np.array(bits).reshape(n, m)
        p = np.prod(np.where(sel == 1, y, 1.0 - y))
        if p == 0.0:
            continue
        f = sum(v.value([j for j in range(m) if sel[i, j]]) for i, v in enumerate(instance.valuations))
        total += p * f
    return total


def brute_Fexp(instance, x):
    return brute_F(instance, 1.0 - np.exp(-np.asarray(x, dtype=float)))


@pytest.fixture
def unit_instance():
    return AuctionInstance(1, (wmrs(1, (1.0, UniformMatroid(1, 1))),))


@pytest.fixture
def symmetric_2x2():
    v = wmrs(2, (1.0, UniformMatroid(2, 1)))
    return AuctionInstance(2, (v, v))


@pytest.fixture
def mixed_2x3():
    v0 = wmrs(3, (1.0, UniformMatroid(3, 2)), (0.5, PartitionMatroid(((0,), (1, 2)), (1, 1))))
    v1 = wmrs(3, (1.5, PartitionMatroid(((0, 1), (2,)), (1, 1))))
    return AuctionInstance(3, (v0, v1))


def pytest_terminal_summary(terminalreporter):
    from tests import acceptance_log

    if acceptance_log.LINES:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_log.LINES:
            terminalreporter.write_line(line)
