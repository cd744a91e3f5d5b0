import itertools
import math

import numpy as np
import pytest

from approx_tie.corpus import random_instance, sample_instances
from approx_tie.errors import BudgetError, ValidationError
from approx_tie.extension import exact_Fexp
from approx_tie.local_search import LocalSearchConfig, local_search
from approx_tie.matroid import UniformMatroid
from approx_tie.mechanism import MechanismConfig
from approx_tie.reference import (
    default_misreports,
    frank_wolfe_gap,
    integral_opt,
    range_opt,
    range_opt_certified,
    regret_experiment,
    report_from_samples,
)
from approx_tie.valuation import AuctionInstance, WMRSValuation

from .conftest import brute_Fexp, wmrs


def test_integral_opt_examples(symmetric_2x2, mixed_2x3):
    value, alloc = integral_opt(symmetric_2x2)
    assert value == 2.0 and sorted(alloc.owner) == [0, 1]
    single = AuctionInstance(3, (wmrs(3, (2.0, UniformMatroid(3, 2))),))
    value, alloc = integral_opt(single)
    assert value == 4.0 and single.valuations[0].value(alloc.bundle(0)) == 4.0
    zero = AuctionInstance(2, (WMRSValuation(2, ()), WMRSValuation(2, ())))
    assert integral_opt(zero)[0] == 0.0
    # v0({0,1}) + v1({2}) = (2 + 0.5 * 2) + 1.5
    assert integral_opt(mixed_2x3)[0] == 4.5
    brute = max(
        sum(v.value([j for j in range(3) if owner[j] == i]) for i, v in enumerate(mixed_2x3.valuations))
        for owner in itertools.product((-1, 0, 1), repeat=3)
    )
    assert brute == 4.5


def test_integral_opt_budget():
    v = wmrs(10, (1.0, UniformMatroid(10, 1)))
    with pytest.raises(BudgetError):
        integral_opt(AuctionInstance(10, (v,) * 5))


def test_range_opt_closed_form(unit_instance):
    assert range_opt(unit_instance, 1e-4) == pytest.approx(1 - math.exp(-1), abs=1e-4)
    zero = AuctionInstance(2, (WMRSValuation(2, ()),))
    assert range_opt(zero) == 0.0


def test_range_opt_symmetric_closed_form(symmetric_2x2):
    # by symmetry and concavity the optimum splits each item evenly:
    # each bidder holds (1/2, 1/2), so F^exp = 2 * (1 - e^-1)
    assert range_opt(symmetric_2x2, 1e-7) == pytest.approx(2 * (1 - math.exp(-1)), abs=1e-6)
    assert brute_Fexp(symmetric_2x2, np.full((2, 2), 0.5)) == pytest.approx(2 * (1 - math.exp(-1)), abs=1e-12)


@pytest.mark.parametrize("inst", sample_instances(seed=5, count=10), ids=lambda i: f"n{i.num_bidders}m{i.num_items}")
def test_range_opt_bounds(inst):
    res = range_opt_certified(inst, 1e-5)
    assert 0 <= res.gap <= 1e-5
    assert res.value == pytest.approx(exact_Fexp(inst, res.x), abs=1e-12)
    assert res.value >= (1 - math.exp(-1)) * integral_opt(inst)[0] - 1e-5
    x, _ = local_search(inst, LocalSearchConfig(0.1))
    assert exact_Fexp(inst, x) <= res.value + 1e-9


def test_frank_wolfe_gap_zero_at_optimum(unit_instance):
    assert frank_wolfe_gap(unit_instance, np.ones((1, 1))) == pytest.approx(0.0, abs=1e-15)
    assert frank_wolfe_gap(unit_instance, np.zeros((1, 1))) == pytest.approx(1.0)


def test_range_opt_reproducible():
    inst = random_instance(np.random.default_rng(4), 3, 3)
    assert abs(range_opt(inst) - range_opt(inst)) <= 2e-5


def test_default_family_shape():
    v = wmrs(2, (1.0, UniformMatroid(2, 2)), (0.5, UniformMatroid(2, 1)))
    fam = dict(default_misreports(v))
    assert len(fam) == 10
    assert fam["scale 1"] == v and fam["worthless"].components == ()
    assert fam["swap unit-demand"].value({0, 1}) == 1.5


def test_truth_only_family_has_zero_regret(symmetric_2x2):
    cfg = MechanismConfig(0.1, 200, 3)
    rep = regret_experiment(symmetric_2x2, 0, cfg, 5, [("truth", symmetric_2x2.valuations[0])])
    assert rep.epsilon_emp == 0.0 and rep.truthful.truthful


def test_family_must_contain_truth(symmetric_2x2):
    cfg = MechanismConfig(0.1, 200, 3)
    with pytest.raises(ValidationError):
        regret_experiment(symmetric_2x2, 0, cfg, 5, [("zero", WMRSValuation(2, ()))])
    with pytest.raises(ValidationError):
        regret_experiment(symmetric_2x2, 0, cfg, 5, [])


def test_irrelevant_bidder_rows_identical():
    big = wmrs(2, (1000.0, UniformMatroid(2, 2)))
    tiny = wmrs(2, (1e-6, UniformMatroid(2, 1)))
    inst = AuctionInstance(2, (big, tiny))
    cfg = MechanismConfig(0.1, 100, 8)
    rep = regret_experiment(inst, 1, cfg, 50, method="realized", keep_samples=True)
    streams = list(rep.samples.values())
    for s in streams[1:]:
        np.testing.assert_array_equal(s, streams[0])


def test_paired_and_unpaired_agree(mixed_2x3):
    cfg = MechanismConfig(0.1, 500, 12)
    fam = default_misreports(mixed_2x3.valuations[0])[:5]
    a = regret_experiment(mixed_2x3, 0, cfg, 60, fam, method="conditional", paired=True)
    b = regret_experiment(mixed_2x3, 0, cfg, 60, fam, method="conditional", paired=False)
    for ra, rb in zip(a.rows, b.rows):
        assert ra.trials == rb.trials == 60 and ra.stderr >= 0
        assert abs(ra.mean - rb.mean) <= 3 * math.hypot(ra.stderr, rb.stderr) + 1e-9


def test_pooled_ranges_equal_single_run(mixed_2x3):
    cfg = MechanismConfig(0.1, 300, 6)
    fam = default_misreports(mixed_2x3.valuations[1])[3:6]
    whole = regret_experiment(mixed_2x3, 1, cfg, 40, fam, method="conditional")
    a = regret_experiment(mixed_2x3, 1, cfg, 25, fam, method="conditional", keep_samples=True)
    b = regret_experiment(mixed_2x3, 1, cfg, 15, fam, method="conditional", keep_samples=True, first_trial=25)
    pooled = report_from_samples({d: np.concatenate([a.samples[d], b.samples[d]]) for d in a.samples}, "scale 1")
    assert [r.__dict__ for r in pooled.rows] == [r.__dict__ for r in whole.rows]
    assert pooled.epsilon_emp == whole.epsilon_emp
