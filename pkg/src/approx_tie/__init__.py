"""Approximately truthful-in-expectation combinatorial auctions for weighted
matroid rank sum valuations, in the value oracle model."""

from .errors import ApproxTieError, BudgetError, ConsistencyError, DomainError, ValidationError
from .extension import GradientEstimate, exact_F, exact_Fexp, exact_grad_Fexp, sampled_grad_Fexp
from .hardness import avg_rank_exact, count_matchings_direct, count_matchings_via_rank, paving_from_graph
from .local_search import (
    Allocation,
    LocalSearchConfig,
    SearchTrace,
    best_direction,
    local_search,
    poisson_round,
    singleton_max,
)
from .matroid import (
    ExplicitMatroid,
    Graph,
    GraphicMatroid,
    PartitionMatroid,
    PavingMatroid,
    UniformMatroid,
    check_matroid_axioms,
    rank,
)
from .mechanism import (
    BidderStats,
    MechanismConfig,
    MechanismOutcome,
    estimate_stats,
    run_mechanism,
    utility_of_report,
)
from .reference import RegretReport, integral_opt, range_opt, regret_experiment
from .valuation import (
    AuctionInstance,
    WMRSValuation,
    exact_lottery_value,
    ground_value,
    sampled_lottery_value,
    value,
)

__version__ = "0.1.0"

__all__ = [
    "Allocation",
    "ApproxTieError",
    "AuctionInstance",
    "BidderStats",
    "BudgetError",
    "ConsistencyError",
    "DomainError",
    "ExplicitMatroid",
    "GradientEstimate",
    "Graph",
    "GraphicMatroid",
    "LocalSearchConfig",
    "MechanismConfig",
    "MechanismOutcome",
    "PartitionMatroid",
    "PavingMatroid",
    "RegretReport",
    "SearchTrace",
    "UniformMatroid",
    "ValidationError",
    "WMRSValuation",
    "avg_rank_exact",
    "best_direction",
    "check_matroid_axioms",
    "count_matchings_direct",
    "count_matchings_via_rank",
    "estimate_stats",
    "exact_F",
    "exact_Fexp",
    "exact_grad_Fexp",
    "exact_lottery_value",
    "ground_value",
    "integral_opt",
    "local_search",
    "paving_from_graph",
    "poisson_round",
    "range_opt",
    "rank",
    "regret_experiment",
    "run_mechanism",
    "sampled_grad_Fexp",
    "sampled_lottery_value",
    "singleton_max",
    "utility_of_report",
    "value",
]
