"""Command-line front door.

Every command writes one JSON report: the command, an echo of the
configuration (including the derived step size and iteration cap), the
result payload, the seed and the wall time.  All randomness derives from
``--seed`` through command-scoped labels, so a report's ``result`` is
reproducible byte for byte.

Exit codes: 0 success, 1 validation error, 2 verification failure,
3 budget error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from .corpus import shipped_instances
from .errors import ApproxTieError, BudgetError, ConsistencyError, ValidationError
from .extension import exact_Fexp
from .hardness import avg_rank_exact, count_matchings_direct, count_matchings_via_rank, paving_from_graph
from .instance_io import graph_to_dict, parse_graph, parse_instance
from .local_search import LocalSearchConfig, default_iteration_cap, local_search, poisson_round, step_size
from .mechanism import MechanismConfig, run_mechanism
from .reference import regret_experiment
from .rng import derive_seed
from .valuation import EXACT_BUDGET
from .verify import run_suite

EXIT_OK, EXIT_VALIDATION, EXIT_VERIFY, EXIT_BUDGET = 0, 1, 2, 3


class VerificationFailed(Exception):
    pass


def _config_echo(args, instance=None) -> dict:
    echo = {"epsilon": args.epsilon, "seed": args.seed}
    for key in ("gradient", "eta", "welfare_samples", "trials", "bidder", "workers"):
        if getattr(args, key, None) is not None:
            echo[key] = getattr(args, key)
    if instance is not None:
        m, n = instance.num_items, instance.num_bidders
        echo["num_bidders"] = n
        echo["num_items"] = m
        echo["delta"] = step_size(args.epsilon, m, n)
        echo["iteration_cap"] = default_iteration_cap(args.epsilon, m, n)
    return echo


def cmd_allocate(args) -> dict:
    inst = parse_instance(args.instance)
    cfg = LocalSearchConfig(args.epsilon, args.gradient, args.eta, derive_seed(args.seed, "allocate", "search"))
    x, trace = local_search(inst, cfg)
    alloc = poisson_round(x, derive_seed(args.seed, "allocate", "round"))
    result = {
        "x": x.tolist(),
        "iterations": trace.iterations,
        "termination": trace.reason,
        "M": trace.M,
        "allocation": list(alloc.owner),
    }
    if inst.num_items <= EXACT_BUDGET:
        result["final_Fexp"] = exact_Fexp(inst, x)
    return {"config": _config_echo(args, inst), "result": result}


def cmd_mechanism(args) -> dict:
    inst = parse_instance(args.instance)
    cfg = MechanismConfig(
        epsilon=args.epsilon,
        welfare_sample_count=args.welfare_samples,
        rng_seed=derive_seed(args.seed, "mechanism"),
        gradient_mode=args.gradient,
        eta=args.eta,
        workers=args.workers,
    )
    outcome = run_mechanism(inst, cfg)
    return {"config": _config_echo(args, inst), "result": outcome.to_dict()}


def cmd_regret(args) -> dict:
    inst = parse_instance(args.instance)
    if not 0 <= args.bidder < inst.num_bidders:
        raise ValidationError(f"--bidder {args.bidder} out of range for {inst.num_bidders} bidders")
    cfg = MechanismConfig(
        epsilon=args.epsilon,
        welfare_sample_count=args.welfare_samples,
        rng_seed=derive_seed(args.seed, "regret"),
        gradient_mode=args.gradient,
        eta=args.eta,
        workers=args.workers,
    )
    report = regret_experiment(inst, args.bidder, cfg, args.trials, method=args.utility)
    return {"config": _config_echo(args, inst), "result": report.to_dict()}


def cmd_verify(args) -> dict:
    instances = {args.instance: parse_instance(args.instance)} if args.instance else shipped_instances()
    checks = run_suite(instances, args.seed, include_graphs=not args.instance)
    failed = [c for c in checks if not c.passed]
    report = {
        "config": _config_echo(args),
        "result": {"checks": [c.to_dict() for c in checks], "failed": len(failed), "total": len(checks)},
    }
    if failed:
        raise VerificationFailed(report)
    return report


def cmd_hardness(args) -> dict:
    g = parse_graph(args.graph)
    via = count_matchings_via_rank(g)
    direct = count_matchings_direct(g)
    result = {
        "graph": graph_to_dict(g),
        "avg_rank": avg_rank_exact(paving_from_graph(g)),
        "via_rank": via,
        "direct": direct,
        "match": via == direct,
    }
    report = {"config": {"seed": args.seed}, "result": result}
    if via != direct:
        raise VerificationFailed(report)
    return report


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="approx-tie", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, instance_required=True):
        p.add_argument("--instance", required=instance_required, help="instance JSON file")
        p.add_argument("--epsilon", type=float, default=0.1)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--gradient", choices=("exact", "sampled"), default="exact")
        p.add_argument("--eta", type=float, default=0.01)
        p.add_argument("--out", help="write the report here instead of stdout")

    p = sub.add_parser("allocate", help="run the local-search allocation rule")
    common(p)
    p.set_defaults(func=cmd_allocate)

    p = sub.add_parser("mechanism", help="run the truthful-in-expectation mechanism once")
    common(p)
    p.add_argument("--welfare-samples", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_mechanism)

    p = sub.add_parser("verify", help="run the invariant suite (shipped corpus by default)")
    common(p, instance_required=False)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("regret", help="utility of misreports against truthful reporting")
    common(p)
    p.add_argument("--bidder", type=int, default=0)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--welfare-samples", type=int, default=2000)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--utility", choices=("realized", "conditional"), default="conditional")
    p.set_defaults(func=cmd_regret)

    p = sub.add_parser("hardness", help="count perfect matchings through paving-matroid average rank")
    p.add_argument("--graph", required=True, help="graph JSON file {num_vertices, edges}")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_hardness)
    return parser


def _emit(report: dict, out) -> None:
    text = json.dumps(report, indent=2, sort_keys=True, default=_json_default) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if hasattr(args, "epsilon") and not 0 < args.epsilon < 1:
        print("error: --epsilon must lie in (0, 1)", file=sys.stderr)
        return EXIT_VALIDATION
    start = time.perf_counter()
    code = EXIT_OK
    try:
        report = args.func(args)
    except VerificationFailed as exc:
        report, code = exc.args[0], EXIT_VERIFY
    except BudgetError as exc:
        print(f"{args.command}: budget error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ValidationError as exc:
        print(f"{args.command}: validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ConsistencyError as exc:
        print(f"{args.command}: consistency check failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except ApproxTieError as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    report = {"command": args.command, "seed": args.seed, **report,
              "wall_time_s": round(time.perf_counter() - start, 6)}
    _emit(report, args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
