"""Hot numeric kernels over tabulated valuations.

Every bidder's valuation is tabulated as a length-2^m vector indexed by item
mask.  The multilinear extension of one row is then a 2^m-term sum against
the product distribution of the row's marginals.

Each kernel exists twice: a numba ``@njit`` loop version and a vectorized
numpy version.  The numba path is used unless ``APPROX_TIE_DISABLE_NUMBA`` is
set to a non-empty value other than ``0``, or numba fails to import.  Both
paths are always importable under explicit names so they can be compared.
"""

from __future__ import annotations

import os
from functools import lru_cache

import numpy as np

_flag = os.environ.get("APPROX_TIE_DISABLE_NUMBA", "")
try:
    if _flag not in ("", "0"):
        raise ImportError("numba disabled by APPROX_TIE_DISABLE_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]):
            return args[0]
        return lambda f: f


USE_NUMBA = HAVE_NUMBA


# ---------------------------------------------------------------- numpy path


def subset_probs_np(y: np.ndarray) -> np.ndarray:
    """Product-distribution weights over all 2^m masks, for rows of ``y``.

    ``y`` has shape (..., m); the result has shape (..., 2^m).
    """
    y = np.asarray(y, dtype=np.float64)
    w = np.ones(y.shape[:-1] + (1,))
    for j in range(y.shape[-1]):
        yj = y[..., j : j + 1]
        w = np.concatenate([w * (1.0 - yj), w * yj], axis=-1)
    return w


@lru_cache(maxsize=None)
def _without_bit(m: int, j: int) -> np.ndarray:
    masks = np.arange(1 << m)
    return masks[(masks >> j & 1) == 0]


def row_values_np(tables: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Multilinear extension of each row: tables (n, 2^m), y (n, m) -> (n,)."""
    return np.einsum("is,is->i", tables, subset_probs_np(y))


def row_grads_np(tables: np.ndarray, y: np.ndarray) -> np.ndarray:
    """d/dy_ij of each row extension; shape (n, m)."""
    n, m = y.shape
    g = np.empty((n, m))
    for j in range(m):
        y0 = y.copy()
        y0[:, j] = 0.0
        w = subset_probs_np(y0)
        idx = _without_bit(m, j)
        diff = tables[:, idx | (1 << j)] - tables[:, idx]
        g[:, j] = np.einsum("is,is->i", diff, w[:, idx])
    return g


def fexp_value_np(tables: np.ndarray, x: np.ndarray) -> float:
    return float(row_values_np(tables, -np.expm1(-x)).sum())


def fexp_grad_np(tables: np.ndarray, x: np.ndarray) -> np.ndarray:
    return np.exp(-x) * row_grads_np(tables, -np.expm1(-x))


def best_direction_np(g: np.ndarray) -> np.ndarray:
    n, m = g.shape
    y = np.zeros((n, m))
    winner = np.argmax(g, axis=0)  # first maximal index on ties
    cols = np.arange(m)
    positive = g[winner, cols] > 0.0
    y[winner[positive], cols[positive]] = 1.0
    return y


def local_search_exact_np(tables, eps, M, delta, cap):
    """Exact-gradient ascent loop; see ``local_search_exact`` for the contract."""
    n = tables.shape[0]
    m = int(round(np.log2(tables.shape[1])))
    x = np.zeros((n, m))
    threshold = 0.5 * eps * M
    values, gains = [], []
    converged = False
    it = 0
    while True:
        g = fexp_grad_np(tables, x)
        y = best_direction_np(g)
        gain = float(((y - x) * g).sum())
        values.append(fexp_value_np(tables, x))
        gains.append(gain)
        if gain <= threshold:
            converged = True
            break
        if it >= cap:
            break
        x = x + delta * (y - x)
        it += 1
    return x, np.array(values), np.array(gains), it, converged


# ---------------------------------------------------------------- numba path


@njit(cache=True)
def _row_value_nb(table, y):
    m = y.shape[0]
    total = 0.0
    for s in range(1 << m):
        t = table[s]
        if t == 0.0:
            continue
        w = 1.0
        for k in range(m):
            if (s >> k) & 1:
                w *= y[k]
            else:
                w *= 1.0 - y[k]
        total += t * w
    return total


@njit(cache=True)
def row_values_nb(tables, y):
    n = y.shape[0]
    out = np.empty(n)
    for i in range(n):
        out[i] = _row_value_nb(tables[i], y[i])
    return out


@njit(cache=True)
def row_grads_nb(tables, y):
    n, m = y.shape
    g = np.empty((n, m))
    for i in range(n):
        for j in range(m):
            bit = 1 << j
            acc = 0.0
            for s in range(1 << m):
                if s & bit:
                    continue
                d = tables[i, s | bit] - tables[i, s]
                if d == 0.0:
                    continue
                w = 1.0
                for k in range(m):
                    if k == j:
                        continue
                    if (s >> k) & 1:
                        w *= y[i, k]
                    else:
                        w *= 1.0 - y[i, k]
                acc += d * w
            g[i, j] = acc
    return g


@njit(cache=True)
def fexp_value_nb(tables, x):
    return row_values_nb(tables, -np.expm1(-x)).sum()


@njit(cache=True)
def fexp_grad_nb(tables, x):
    return np.exp(-x) * row_grads_nb(tables, -np.expm1(-x))


@njit(cache=True)
def best_direction_nb(g):
    n, m = g.shape
    y = np.zeros((n, m))
    for j in range(m):
        best = 0
        for i in range(1, n):
            if g[i, j] > g[best, j]:
                best = i
        if g[best, j] > 0.0:
            y[best, j] = 1.0
    return y


# releases the GIL so the n+1 independent solves can overlap in threads
@njit(cache=True, nogil=True)
def local_search_exact_nb(tables, eps, M, delta, cap):
    n = tables.shape[0]
    m = 0
    while (1 << m) < tables.shape[1]:
        m += 1
    x = np.zeros((n, m))
    threshold = 0.5 * eps * M
    size = 1024
    values = np.empty(size)
    gains = np.empty(size)
    converged = False
    it = 0
    rec = 0
    while True:
        g = fexp_grad_nb(tables, x)
        y = best_direction_nb(g)
        gain = 0.0
        for i in range(n):
            for j in range(m):
                gain += (y[i, j] - x[i, j]) * g[i, j]
        if rec == size:
            size *= 2
            nv = np.empty(size)
            ng = np.empty(size)
            nv[:rec] = values[:rec]
            ng[:rec] = gains[:rec]
            values = nv
            gains = ng
        values[rec] = fexp_value_nb(tables, x)
        gains[rec] = gain
        rec += 1
        if gain <= threshold:
            converged = True
            break
        if it >= cap:
            break
        for i in range(n):
            for j in range(m):
                x[i, j] += delta * (y[i, j] - x[i, j])
        it += 1
    return x, values[:rec].copy(), gains[:rec].copy(), it, converged


# ---------------------------------------------------------------- dispatch


def _pick(nb, np_):
    return nb if USE_NUMBA else np_


def _as_tables(tables):
    return np.ascontiguousarray(tables, dtype=np.float64)


def row_values(tables, y):
    return _pick(row_values_nb, row_values_np)(_as_tables(tables), np.ascontiguousarray(y, dtype=np.float64))


def row_grads(tables, y):
    return _pick(row_grads_nb, row_grads_np)(_as_tables(tables), np.ascontiguousarray(y, dtype=np.float64))


def fexp_value(tables, x) -> float:
    return float(_pick(fexp_value_nb, fexp_value_np)(_as_tables(tables), np.ascontiguousarray(x, dtype=np.float64)))


def fexp_grad(tables, x):
    return _pick(fexp_grad_nb, fexp_grad_np)(_as_tables(tables), np.ascontiguousarray(x, dtype=np.float64))


def best_direction(g):
    return _pick(best_direction_nb, best_direction_np)(np.ascontiguousarray(g, dtype=np.float64))


def local_search_exact(tables, eps: float, M: float, delta: float, cap: int):
    """Run the exact-gradient ascent from x = 0.

    Returns ``(x, values, gains, iterations, converged)``.  ``values[t]`` and
    ``gains[t]`` are F^exp and (y - x).g evaluated before step t; the last
    record is the one that stopped the loop.  At most ``cap`` steps are taken.
    """
    fn = _pick(local_search_exact_nb, local_search_exact_np)
    x, values, gains, it, conv = fn(_as_tables(tables), float(eps), float(M), float(delta), int(cap))
    return x, values, gains, int(it), bool(conv)
