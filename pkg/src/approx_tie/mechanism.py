"""Mechanism turning the approximately maximal-in-range allocation rule into
an approximately truthful-in-expectation mechanism with VCG-like payments.

Randomness is split into independent derived streams: ``solve`` (gradient
sampling inside local search), ``estimate`` (welfare estimates), ``branch``
(branch, lottery bidder and lottery coin) and ``outcome`` (the rounding that
realizes the VCG-branch allocation).  A bidder who stays inactive therefore
sees the same branch draws whatever they report.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np

from .errors import ValidationError
from .local_search import (
    UNALLOCATED,
    Allocation,
    LocalSearchConfig,
    bidder_values,
    local_search,
    poisson_round_many,
    rounding_marginals,
)
from .rng import derive_seed, make_rng
from .valuation import AuctionInstance, WMRSValuation, exact_lottery_value, ground_value

WELFARE_SAMPLE_CAP = 10**6


def default_welfare_samples(m: int, n: int) -> int:
    want = math.ceil((100 * m * n * n) ** 2 * math.log(2 * n / 0.01) / 2)
    return min(want, WELFARE_SAMPLE_CAP)


@dataclass(frozen=True)
class MechanismConfig:
    epsilon: float = 0.1
    welfare_sample_count: int | None = None  # None: default_welfare_samples(m, n)
    rng_seed: int = 0
    gradient_mode: str = "exact"
    eta: float = 0.01
    workers: int = 1

    def __post_init__(self):
        if self.welfare_sample_count is not None and self.welfare_sample_count < 1:
            raise ValidationError("welfare_sample_count must be >= 1")
        if self.workers < 1:
            raise ValidationError("workers must be >= 1")
        LocalSearchConfig(self.epsilon, self.gradient_mode, self.eta)  # validates the rest

    def samples_for(self, instance: AuctionInstance) -> int:
        if self.welfare_sample_count is not None:
            return self.welfare_sample_count
        return default_welfare_samples(instance.num_items, instance.num_bidders)

    def with_seed(self, seed) -> "MechanismConfig":
        return MechanismConfig(self.epsilon, self.welfare_sample_count, seed, self.gradient_mode, self.eta, self.workers)


@dataclass
class BidderStats:
    V: float
    O: float
    O_prime_minus: float
    relevant: bool
    active: bool
    O_stderr: float = 0.0
    O_prime_minus_stderr: float = 0.0


@dataclass
class MechanismEstimates:
    """Everything computed before the branch is drawn."""

    stats: list[BidderStats]
    O: float
    x: np.ndarray  # fractional point of the full instance
    welfare_sample_count: int
    n: int

    @property
    def active(self) -> list[bool]:
        return [s.active for s in self.stats]

    def price(self, i: int) -> float:
        return self.stats[i].O_prime_minus - sum(s.O for k, s in enumerate(self.stats) if k != i)


@dataclass
class MechanismOutcome:
    branch: str  # "vcg" | "lottery"
    lottery_bidder: int | None
    allocation: Allocation
    payments: tuple[float, ...]
    stats: list[BidderStats]
    O: float
    welfare_sample_count: int
    max_estimate_stderr: float

    def to_dict(self) -> dict:
        return {
            "branch": self.branch,
            "lottery_bidder": self.lottery_bidder,
            "owner": list(self.allocation.owner),
            "payments": list(self.payments),
            "O": self.O,
            "stats": [asdict(s) for s in self.stats],
            "welfare_sample_count": self.welfare_sample_count,
            "max_estimate_stderr": self.max_estimate_stderr,
        }


def is_relevant(V: list[float], i: int) -> bool:
    n = len(V)
    return V[i] > sum(v for k, v in enumerate(V) if k != i) / n**7


def is_active(relevant: bool, n: int, O: float, O_prime_minus: float, V_i: float) -> bool:
    lhs = (1.0 - 1.0 / n) * (O - O_prime_minus) + V_i / (2.0 * n * n)
    return relevant and lhs > O_prime_minus / n**4


@lru_cache(maxsize=256)
def _exact_solve(instance: AuctionInstance, epsilon: float) -> np.ndarray:
    x, _ = local_search(instance, LocalSearchConfig(epsilon=epsilon))
    x.setflags(write=False)
    return x


def _solve(instance: AuctionInstance, config: MechanismConfig, label) -> np.ndarray:
    if config.gradient_mode == "exact":
        # deterministic, so solves are shared across trials and reports
        return _exact_solve(instance, config.epsilon)
    ls = LocalSearchConfig(config.epsilon, "sampled", config.eta, derive_seed(config.rng_seed, "solve", label))
    x, _ = local_search(instance, ls)
    return x


def solve_all(instance: AuctionInstance, config: MechanismConfig) -> tuple[np.ndarray, list[np.ndarray]]:
    """Fractional points for the full instance and for each bidder removed."""
    jobs = [(instance, "full")] + [(instance.without(i), i) for i in range(instance.num_bidders)]
    if config.workers > 1:
        with ThreadPoolExecutor(config.workers) as pool:
            xs = list(pool.map(lambda job: _solve(job[0], config, job[1]), jobs))
    else:
        xs = [_solve(inst, config, label) for inst, label in jobs]
    return xs[0], xs[1:]


def prepare(instance: AuctionInstance, config: MechanismConfig, solved=None) -> MechanismEstimates:
    """Run the allocation rule on the full and reduced instances and form the estimates."""
    n = instance.num_bidders
    if n < 2:
        raise ValidationError("the mechanism needs n >= 2 bidders; a single bidder simply receives every item")
    W = config.samples_for(instance)
    x, x_minus = solved if solved is not None else solve_all(instance, config)

    vals = bidder_values(instance, poisson_round_many(x, W, config.rng_seed, "estimate", "full"))
    O_i = vals.mean(axis=1)
    O_se = vals.std(axis=1, ddof=1) / math.sqrt(W) if W > 1 else np.zeros(n)
    O = float(O_i.sum())

    V = [ground_value(v) for v in instance.valuations]
    stats = []
    for i in range(n):
        sub = instance.without(i)
        w = bidder_values(sub, poisson_round_many(x_minus[i], W, config.rng_seed, "estimate", i)).sum(axis=0)
        O_prime = float(w.mean())
        O_prime_se = float(w.std(ddof=1) / math.sqrt(W)) if W > 1 else 0.0
        relevant = is_relevant(V, i)
        stats.append(
            BidderStats(
                V=V[i],
                O=float(O_i[i]),
                O_prime_minus=O_prime,
                relevant=relevant,
                active=is_active(relevant, n, O, O_prime, V[i]),
                O_stderr=float(O_se[i]),
                O_prime_minus_stderr=O_prime_se,
            )
        )
    return MechanismEstimates(stats, O, x, W, n)


def estimate_stats(instance: AuctionInstance, config: MechanismConfig) -> tuple[list[BidderStats], float]:
    est = prepare(instance, config)
    return est.stats, est.O


def draw_branch(seed, n: int) -> tuple[bool, int, bool]:
    """(vcg branch?, lottery bidder, lottery coin); all three are always drawn."""
    rng = make_rng(seed, "branch")
    u, b, c = rng.random(), int(rng.integers(n)), rng.random()
    return u < 1.0 - 1.0 / n, b, c < 0.5


def realize(est: MechanismEstimates, seed) -> MechanismOutcome:
    n = est.n
    m = est.x.shape[1]
    vcg, b, coin = draw_branch(seed, n)
    payments = [0.0] * n
    if vcg:
        owner = poisson_round_many(est.x, 1, seed, "outcome")[0]
        owner = [o if o != UNALLOCATED and est.stats[o].active else UNALLOCATED for o in owner]
        for i in range(n):
            if est.stats[i].active:
                payments[i] = est.price(i)
        branch, lottery_bidder = "vcg", None
    else:
        owner = [UNALLOCATED] * m
        if est.stats[b].active:
            owner = [b] * m
            payments[b] = est.stats[b].O_prime_minus / n**2
        elif coin:
            owner = [b] * m
        branch, lottery_bidder = "lottery", b
    max_se = max(max(s.O_stderr, s.O_prime_minus_stderr) for s in est.stats)
    return MechanismOutcome(
        branch, lottery_bidder, Allocation(owner), tuple(payments), est.stats, est.O, est.welfare_sample_count, max_se
    )


def run_mechanism(instance_reported: AuctionInstance, config: MechanismConfig, estimates: MechanismEstimates | None = None) -> MechanismOutcome:
    """One run of the mechanism on reported valuations.

    ``estimates`` may be passed to reuse a prepared estimation stage; the
    branch and the realized rounding still come from ``config.rng_seed``.
    """
    est = estimates if estimates is not None else prepare(instance_reported, config)
    return realize(est, config.rng_seed)


def conditional_utility(est: MechanismEstimates, i: int, true_v: WMRSValuation) -> float:
    """Expected utility of bidder i given the estimates, over branch and rounding."""
    n = est.n
    V_true = ground_value(true_v)
    s = est.stats[i]
    if not s.active:
        return V_true / (2.0 * n * n)
    expected_bundle = exact_lottery_value(true_v, rounding_marginals(est.x)[i])
    return (1.0 - 1.0 / n) * (expected_bundle - est.price(i)) + (V_true - s.O_prime_minus / n**2) / n**2


def utility_samples(
    instance_true: AuctionInstance,
    i: int,
    reported: WMRSValuation,
    config: MechanismConfig,
    trials: int,
    method: str = "realized",
    pair_label=None,
    first_trial: int = 0,
) -> np.ndarray:
    """Per-trial utility of bidder i (measured with their true valuation).

    Trial t uses master seed derive(config.rng_seed, "trial", t), so different
    reports are paired trial by trial unless ``pair_label`` separates them,
    and trials ``first_trial .. first_trial + trials - 1`` extend a shorter run.
    ``method="conditional"`` replaces the realized branch and rounding by their
    exact conditional expectation given the trial's estimates.
    """
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    if method not in ("realized", "conditional"):
        raise ValidationError(f"unknown utility method {method!r}")
    reported_instance = instance_true.with_valuation(i, reported)
    true_v = instance_true.valuations[i]
    solved = solve_all(reported_instance, config) if config.gradient_mode == "exact" else None
    out = np.empty(trials)
    for k in range(trials):
        t = first_trial + k
        labels = ("trial", t) if pair_label is None else ("trial", pair_label, t)
        cfg = config.with_seed(derive_seed(config.rng_seed, *labels))
        est = prepare(reported_instance, cfg, solved)
        if method == "conditional":
            out[k] = conditional_utility(est, i, true_v)
        else:
            outcome = realize(est, cfg.rng_seed)
            out[k] = true_v.value(outcome.allocation.bundle(i)) - outcome.payments[i]
    return out


def utility_of_report(
    instance_true: AuctionInstance,
    i: int,
    reported: WMRSValuation,
    config: MechanismConfig,
    trials: int,
    method: str = "realized",
) -> tuple[float, float]:
    """Monte-Carlo mean utility of bidder i for one report, with its standard error."""
    u = utility_samples(instance_true, i, reported, config, trials, method)
    se = float(u.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return float(u.mean()), se


def expected_welfare(est: MechanismEstimates, instance: AuctionInstance) -> tuple[float, float]:
    """(expected welfare of the mechanism, expected welfare of the allocation rule),
    both under the reported valuations and conditioned on the estimates."""
    n = est.n
    q = rounding_marginals(est.x)
    per_bidder = [exact_lottery_value(v, q[i]) for i, v in enumerate(instance.valuations)]
    rule = sum(per_bidder)
    vcg = sum(w for w, s in zip(per_bidder, est.stats) if s.active)
    lottery = sum(s.V if s.active else 0.5 * s.V for s in est.stats) / n**2
    return (1.0 - 1.0 / n) * vcg + lottery, rule
