"""Brute-force and high-precision oracles used to check the allocation rule
and the mechanism."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from . import _kernels
from .errors import BudgetError, ConsistencyError, ValidationError
from .local_search import Allocation, LocalSearchConfig, UNALLOCATED, local_search, singleton_max
from .matroid import UniformMatroid
from .valuation import EXACT_BUDGET, AuctionInstance, WMRSValuation

INTEGRAL_BUDGET = 10**7
_CHUNK = 1 << 20


def integral_opt(instance: AuctionInstance) -> tuple[float, Allocation]:
    """Exhaustive welfare maximum over all (n+1)^m item assignments."""
    n, m = instance.num_bidders, instance.num_items
    total = (n + 1) ** m
    if total > INTEGRAL_BUDGET:
        raise BudgetError(f"(n+1)^m = {total} assignments exceeds budget {INTEGRAL_BUDGET}")
    tables = instance.tables
    powers = (n + 1) ** np.arange(m, dtype=np.int64)
    best_val, best_code = -1.0, 0
    for start in range(0, total, _CHUNK):
        codes = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        digits = (codes[:, None] // powers[None, :]) % (n + 1)
        welfare = np.zeros(codes.shape[0])
        for i in range(n):
            masks = ((digits == i) << np.arange(m)).sum(axis=1)
            welfare += tables[i, masks]
        k = int(np.argmax(welfare))
        if welfare[k] > best_val:
            best_val, best_code = float(welfare[k]), int(codes[k])
    owner = [(best_code // (n + 1) ** j) % (n + 1) for j in range(m)]
    owner = [UNALLOCATED if o == n else o for o in owner]
    return best_val, Allocation(owner)


def frank_wolfe_gap(instance: AuctionInstance, x: np.ndarray) -> float:
    """max over y in P of (y - x).grad F^exp(x); bounds OPT - F^exp(x) by concavity."""
    g = _kernels.fexp_grad(instance.tables, x)
    return float(np.maximum(g.max(axis=0), 0.0).sum() - (x * g).sum())


@dataclass
class RangeOptResult:
    value: float
    x: np.ndarray
    gap: float  # certified: value <= optimum <= value + gap


def _project_feasible(x: np.ndarray) -> np.ndarray:
    x = np.clip(x, 0.0, 1.0)
    col = x.sum(axis=0)
    over = col > 1.0
    x[:, over] /= col[over]
    return x


def range_opt_certified(instance: AuctionInstance, tolerance: float = 1e-5, max_fw_iters: int = 200000) -> RangeOptResult:
    """Maximize F^exp over the polytope to a certified additive ``tolerance``.

    A coarse local-search solve seeds SLSQP with exact gradients; the result
    is certified by the Frank-Wolfe duality gap and, if needed, refined by
    Frank-Wolfe steps with exact line search until the gap is within bound.
    """
    if tolerance <= 0:
        raise ValidationError("tolerance must be positive")
    n, m = instance.num_bidders, instance.num_items
    if m > EXACT_BUDGET:
        raise BudgetError(f"range_opt evaluates F^exp exactly; m = {m} > {EXACT_BUDGET}")
    if singleton_max(instance) == 0.0:
        return RangeOptResult(0.0, np.zeros((n, m)), 0.0)
    tables = instance.tables
    shape = (n, m)

    x0, _ = local_search(instance, LocalSearchConfig(epsilon=0.2))

    def neg(z):
        return -_kernels.fexp_value(tables, z.reshape(shape))

    def neg_grad(z):
        return -_kernels.fexp_grad(tables, z.reshape(shape)).ravel()

    cols = np.zeros((m, n * m))
    for j in range(m):
        cols[j, j::m] = 1.0
    res = minimize(
        neg,
        x0.ravel(),
        jac=neg_grad,
        method="SLSQP",
        bounds=[(0.0, 1.0)] * (n * m),
        constraints=[{"type": "ineq", "fun": lambda z: 1.0 - cols @ z, "jac": lambda z: -cols}],
        options={"ftol": 1e-15, "maxiter": 1000},
    )
    x = _project_feasible(res.x.reshape(shape).copy())
    if _kernels.fexp_value(tables, x) < _kernels.fexp_value(tables, x0):
        x = x0

    gap = frank_wolfe_gap(instance, x)
    it = 0
    while gap > tolerance:
        if it >= max_fw_iters:
            raise ConsistencyError(f"range optimum not certified: gap {gap:.3g} > {tolerance:.3g}")
        g = _kernels.fexp_grad(tables, x)
        d = _kernels.best_direction(g) - x
        line = minimize_scalar(
            lambda t: -_kernels.fexp_value(tables, x + t * d), bounds=(0.0, 1.0), method="bounded",
            options={"xatol": 1e-12},
        )
        x = x + line.x * d
        gap = frank_wolfe_gap(instance, x)
        it += 1
    return RangeOptResult(_kernels.fexp_value(tables, x), x, gap)


def range_opt(instance: AuctionInstance, tolerance: float = 1e-5) -> float:
    """Optimum of F^exp over the polytope, to within ``tolerance`` below."""
    return range_opt_certified(instance, tolerance).value


@dataclass
class RegretRow:
    description: str
    mean: float
    stderr: float
    trials: int
    truthful: bool = False


@dataclass
class RegretReport:
    rows: list[RegretRow]
    epsilon_emp: float
    samples: dict | None = None  # per-row utility streams, when kept

    @property
    def truthful(self) -> RegretRow:
        return next(r for r in self.rows if r.truthful)

    @property
    def best(self) -> RegretRow:
        return max(self.rows, key=lambda r: r.mean)

    def to_dict(self) -> dict:
        return {
            "rows": [r.__dict__ for r in self.rows],
            "epsilon_emp": self.epsilon_emp,
        }


SCALINGS = (0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 4.0)


def default_misreports(true_v: WMRSValuation) -> list[tuple[str, WMRSValuation]]:
    """Weight scalings of the truth, the worthless report and a one-matroid swap.

    The swap keeps the total weight but reports it on a single uniform rank-1
    matroid, i.e. claims unit demand.
    """
    m = true_v.num_items
    family = [(f"scale {s:g}", true_v.scaled(s)) for s in SCALINGS]
    family.append(("worthless", WMRSValuation(m, ())))
    total = sum(w for w, _ in true_v.components)
    family.append(("swap unit-demand", WMRSValuation(m, ((total, UniformMatroid(m, 1)),))))
    return family


def regret_experiment(
    instance_true: AuctionInstance,
    bidder: int,
    config,
    trials: int,
    misreport_family: list[tuple[str, WMRSValuation]] | None = None,
    method: str = "realized",
    paired: bool = True,
    keep_samples: bool = False,
    first_trial: int = 0,
) -> RegretReport:
    """Mean utility of ``bidder`` for every report in the family.

    The family must contain the truthful valuation (by equality).  With
    ``paired`` all reports share trial seeds.  epsilon_emp is
    1 - truthful/best, or 0 when truthful is best.  ``first_trial`` shifts
    the trial seeds, so runs over consecutive ranges can be pooled with
    ``report_from_samples``.
    """
    from .mechanism import utility_samples

    true_v = instance_true.valuations[bidder]
    family = misreport_family if misreport_family is not None else default_misreports(true_v)
    if not family:
        raise ValidationError("misreport family is empty")
    truthful_idx = [k for k, (_, v) in enumerate(family) if v == true_v]
    if not truthful_idx:
        raise ValidationError("misreport family must contain the truthful report")
    samples = {}
    for k, (desc, report) in enumerate(family):
        samples[desc] = utility_samples(
            instance_true, bidder, report, config, trials, method,
            pair_label=None if paired else k, first_trial=first_trial,
        )
    report = report_from_samples(samples, family[truthful_idx[0]][0])
    if not keep_samples:
        report.samples = None
    return report


def report_from_samples(samples: dict[str, np.ndarray], truthful: str) -> RegretReport:
    """Summarize per-report utility streams (equal lengths) into a RegretReport."""
    rows = []
    for desc, u in samples.items():
        t = u.shape[0]
        se = float(u.std(ddof=1) / math.sqrt(t)) if t > 1 else 0.0
        rows.append(RegretRow(desc, float(u.mean()), se, t, desc == truthful))
    if len({r.trials for r in rows}) != 1:
        raise ValidationError("all reports need the same number of trials")
    report = RegretReport(rows, 0.0, samples)
    best = report.best.mean
    truth = report.truthful.mean
    report.epsilon_emp = 0.0 if truth >= best or best <= 0 else 1.0 - truth / best
    return report
