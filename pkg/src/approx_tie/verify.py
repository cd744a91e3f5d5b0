"""Invariant suite run by ``approx-tie verify``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .corpus import GRAPH_CORPUS, random_point
from .errors import ApproxTieError
from .extension import exact_Fexp, exact_grad_Fexp
from .hardness import count_matchings_direct, count_matchings_via_rank
from .local_search import LocalSearchConfig, local_search
from .matroid import AXIOM_BUDGET, check_matroid_axioms
from .reference import integral_opt, range_opt
from .rng import make_rng
from .valuation import AuctionInstance, check_monotone_submodular

CONCAVITY_TOL = 1e-9
FD_STEP = 1e-5
FD_TOL = 1e-6
RANGE_TOL = 1e-7
STEP_GAIN_TOL = 1e-9
RANGE_TAU = 1e-5
EPSILONS = (0.1, 0.2)


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""

    def to_dict(self):
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


def concavity_violation(instance, rng, probes: int) -> float:
    """Largest violation of midpoint concavity over random probes (<= 0 is fine)."""
    n, m = instance.num_bidders, instance.num_items
    worst = -math.inf
    for _ in range(probes):
        x, xp, lam = random_point(rng, n, m), random_point(rng, n, m), rng.random()
        mid = exact_Fexp(instance, lam * x + (1 - lam) * xp)
        chord = lam * exact_Fexp(instance, x) + (1 - lam) * exact_Fexp(instance, xp)
        worst = max(worst, chord - mid)
    return worst


def gradient_fd_error(instance, rng, probes: int) -> float:
    n, m = instance.num_bidders, instance.num_items
    worst = 0.0
    for _ in range(probes):
        # keep the point interior so both central-difference stencils stay feasible
        x = 0.9 * random_point(rng, n, m) + 0.01
        x = x / np.maximum(x.sum(axis=0) / 0.98, 1.0)
        g = exact_grad_Fexp(instance, x).g
        for i in range(n):
            for j in range(m):
                e = np.zeros((n, m))
                e[i, j] = FD_STEP
                fd = (exact_Fexp(instance, x + e) - exact_Fexp(instance, x - e)) / (2 * FD_STEP)
                worst = max(worst, abs(fd - g[i, j]))
    return worst


def search_checks(name: str, instance: AuctionInstance, eps: float, opt_range: float, opt_int: float | None) -> list[Check]:
    n, m = instance.num_bidders, instance.num_items
    cfg = LocalSearchConfig(epsilon=eps)
    x, trace = local_search(instance, cfg)
    final = exact_Fexp(instance, x)
    M = trace.M
    out = []
    out.append(Check(f"{name} eps={eps} range guarantee", final >= (1 - eps) * opt_range - RANGE_TOL,
                     f"F={final:.9g} range_opt={opt_range:.9g}"))
    min_gain = eps**2 * M / (64 * m * m * n * n)
    steps = np.diff(trace.values)[trace.accepted[:-1]] if trace.iterations else np.zeros(0)
    worst = float(steps.min()) if steps.size else math.inf
    out.append(Check(f"{name} eps={eps} step gain", worst >= min_gain - STEP_GAIN_TOL,
                     f"min step gain {worst:.3g} vs bound {min_gain:.3g}"))
    out.append(Check(f"{name} eps={eps} iteration cap", trace.iterations <= 64 * m**3 * n**2 / eps**2 and trace.reason == "converged",
                     f"{trace.iterations} iterations, cap {trace.iteration_cap}"))
    if opt_int is not None:
        out.append(Check(f"{name} eps={eps} welfare", final >= (1 - 1 / math.e - eps) * opt_int,
                         f"F={final:.9g} integral_opt={opt_int:.9g}"))
    return out


def verify_instance(name: str, instance: AuctionInstance, seed: int = 0, probes: int = 50) -> list[Check]:
    rng = make_rng(seed, "verify", name)
    checks = []
    for i, v in enumerate(instance.valuations):
        for c, (_, mat) in enumerate(v.components):
            if mat.ground_size <= AXIOM_BUDGET:
                rep = check_matroid_axioms(mat)
                checks.append(Check(f"{name} bidder {i} component {c} matroid axioms", rep.passed, rep.violation or ""))
        if v.num_items <= 12:
            bad = check_monotone_submodular(v)
            checks.append(Check(f"{name} bidder {i} monotone submodular", bad is None, bad or ""))
    worst = concavity_violation(instance, rng, probes)
    checks.append(Check(f"{name} concavity", worst <= CONCAVITY_TOL, f"worst violation {worst:.3g}"))
    fd = gradient_fd_error(instance, rng, max(1, probes // 10))
    checks.append(Check(f"{name} gradient vs finite differences", fd <= FD_TOL, f"max error {fd:.3g}"))
    opt_range = range_opt(instance, RANGE_TAU)
    n, m = instance.num_bidders, instance.num_items
    opt_int = integral_opt(instance)[0] if (n + 1) ** m <= 10**5 else None
    for eps in EPSILONS:
        checks.extend(search_checks(name, instance, eps, opt_range, opt_int))
    return checks


def verify_graphs() -> list[Check]:
    checks = []
    for name, (g, expected) in GRAPH_CORPUS.items():
        try:
            via, direct = count_matchings_via_rank(g), count_matchings_direct(g)
            ok = via == direct == expected
            detail = f"via_rank={via} direct={direct} expected={expected}"
        except ApproxTieError as exc:
            ok, detail = False, str(exc)
        checks.append(Check(f"graph {name} matching count", ok, detail))
    return checks


def run_suite(instances: dict[str, AuctionInstance], seed: int = 0, include_graphs: bool = True) -> list[Check]:
    checks = []
    for name, inst in instances.items():
        checks.extend(verify_instance(name, inst, seed))
    if include_graphs:
        checks.extend(verify_graphs())
    return checks
