"""Compare the numba kernels with their pure-numpy counterparts.

Both paths are importable side by side, so one process times both.  Every
timing is the best of ``--repeat`` runs after a warm-up call (which also
triggers numba compilation).

    python3 benchmarks/bench_kernels.py --items 3 6 10 --bidders 3
"""

from __future__ import annotations

import argparse
import json
import time

import numpy as np

from approx_tie import _kernels as K
from approx_tie.corpus import random_instance, random_point
from approx_tie.local_search import LocalSearchConfig, singleton_max


def best_time(fn, repeat: int) -> float:
    fn()
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_case(n: int, m: int, repeat: int, eps: float, seed: int) -> list[dict]:
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, n, m)
    T = np.ascontiguousarray(inst.tables)
    x = random_point(rng, n, m)
    cfg = LocalSearchConfig(eps)
    search_args = (T, eps, singleton_max(inst), cfg.delta(m, n), cfg.iteration_cap(m, n))
    kernels = {
        "fexp_value": (lambda: K.fexp_value_nb(T, x), lambda: K.fexp_value_np(T, x)),
        "fexp_grad": (lambda: K.fexp_grad_nb(T, x), lambda: K.fexp_grad_np(T, x)),
    }
    if m <= 4:  # the numpy loop is slow enough that larger searches take minutes
        kernels["local_search"] = (
            lambda: K.local_search_exact_nb(*search_args),
            lambda: K.local_search_exact_np(*search_args),
        )
    rows = []
    for name, (nb, np_) in kernels.items():
        t_nb, t_np = best_time(nb, repeat), best_time(np_, repeat)
        rows.append({"kernel": name, "n": n, "m": m, "numba_s": t_nb, "numpy_s": t_np, "speedup": t_np / t_nb})
    return rows


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    p.add_argument("--bidders", type=int, default=3)
    p.add_argument("--items", type=int, nargs="+", default=[2, 3, 4, 8, 12])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--epsilon", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true", help="print rows as JSON")
    args = p.parse_args(argv)
    if not K.HAVE_NUMBA:
        p.error("numba is unavailable (or disabled by APPROX_TIE_DISABLE_NUMBA); nothing to compare")

    rows = [r for m in args.items for r in bench_case(args.bidders, m, args.repeat, args.epsilon, args.seed)]
    if args.json:
        print(json.dumps(rows, indent=2))
        return 0
    print(f"{'kernel':<14}{'n':>3}{'m':>4}{'numba (s)':>12}{'numpy (s)':>12}{'speedup':>9}")
    for r in rows:
        print(f"{r['kernel']:<14}{r['n']:>3}{r['m']:>4}{r['numba_s']:>12.2e}{r['numpy_s']:>12.2e}{r['speedup']:>8.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
