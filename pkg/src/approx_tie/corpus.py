"""Random WMRS instances and the shipped instance/graph corpus."""

from __future__ import annotations

import json
from importlib import resources
from itertools import combinations

import numpy as np

from .instance_io import instance_from_dict
from .matroid import Graph, GraphicMatroid, MatroidSpec, PartitionMatroid, PavingMatroid, UniformMatroid
from .valuation import AuctionInstance, WMRSValuation


def random_matroid(rng: np.random.Generator, m: int) -> MatroidSpec:
    kinds = ["uniform", "partition", "graphic"]
    if m % 2 == 0 and m >= 2:
        kinds.append("paving")
    kind = kinds[rng.integers(len(kinds))]
    if kind == "uniform":
        return UniformMatroid(m, int(rng.integers(0, m + 1)))
    if kind == "partition":
        labels = rng.integers(0, int(rng.integers(1, m + 1)), size=m)
        blocks = [tuple(int(e) for e in np.flatnonzero(labels == b)) for b in np.unique(labels)]
        caps = [int(rng.integers(0, len(b) + 1)) for b in blocks]
        return PartitionMatroid(tuple(blocks), tuple(caps))
    if kind == "graphic":
        nv = int(rng.integers(2, 5))
        edges = []
        for _ in range(m):
            u, v = rng.choice(nv, size=2, replace=False)
            edges.append((int(u), int(v)))
        return GraphicMatroid(nv, tuple(edges))
    pairs = m // 2
    nv = 4 if pairs <= 6 else 6
    all_edges = list(combinations(range(nv), 2))
    pick = rng.choice(len(all_edges), size=pairs, replace=False)
    g = Graph(nv, tuple(all_edges[k] for k in sorted(pick)))
    return PavingMatroid(pairs, nv // 2, graph=g)


def random_valuation(rng: np.random.Generator, m: int, max_components: int = 3) -> WMRSValuation:
    k = int(rng.integers(1, max_components + 1))
    comps = []
    for _ in range(k):
        w = 0.0 if rng.random() < 0.05 else float(np.round(rng.uniform(0.1, 2.0), 3))
        comps.append((w, random_matroid(rng, m)))
    return WMRSValuation(m, tuple(comps))


def random_instance(rng: np.random.Generator, n: int, m: int) -> AuctionInstance:
    return AuctionInstance(m, tuple(random_valuation(rng, m) for _ in range(n)))


def sample_instances(seed: int, count: int, max_n: int = 3, max_m: int = 3, min_n: int = 1) -> list[AuctionInstance]:
    """Reproducible random instances with n, m in the given ranges and M > 0."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n = int(rng.integers(min_n, max_n + 1))
        m = int(rng.integers(1, max_m + 1))
        inst = random_instance(rng, n, m)
        if inst.tables.max() > 0:
            out.append(inst)
    return out


def shipped_instances() -> dict[str, AuctionInstance]:
    root = resources.files("approx_tie") / "corpus"
    out = {}
    for entry in sorted(root.iterdir(), key=lambda p: p.name):
        if entry.name.endswith(".json") and not entry.name.startswith("graph_"):
            out[entry.name[:-5]] = instance_from_dict(json.loads(entry.read_text()))
    return out


def _graph(nv, *edges) -> Graph:
    return Graph(nv, tuple(edges))


# even-vertex graphs with at most 8 edges, and their perfect-matching counts
GRAPH_CORPUS: dict[str, tuple[Graph, int]] = {
    "K2": (_graph(2, (0, 1)), 1),
    "2K2": (_graph(4, (0, 1), (2, 3)), 1),
    "P4": (_graph(4, (0, 1), (1, 2), (2, 3)), 1),
    "C4": (_graph(4, (0, 1), (1, 2), (2, 3), (3, 0)), 2),
    "K4": (_graph(4, (0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)), 3),
    "star K1,3": (_graph(4, (0, 1), (0, 2), (0, 3)), 0),
    "diamond": (_graph(4, (0, 1), (1, 2), (2, 3), (3, 0), (0, 2)), 2),
    "3K2": (_graph(6, (0, 1), (2, 3), (4, 5)), 1),
    "P6": (_graph(6, (0, 1), (1, 2), (2, 3), (3, 4), (4, 5)), 1),
    "C6": (_graph(6, (0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)), 2),
    "two triangles + bridge": (_graph(6, (0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (2, 3)), 1),
    "C6 + two chords": (_graph(6, (0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (0, 3), (1, 4)), 4),
    "empty on 2": (_graph(2), 0),
}


def random_point(rng: np.random.Generator, n: int, m: int) -> np.ndarray:
    """A random point of the allocation polytope, sometimes on its boundary."""
    cols = rng.dirichlet(np.ones(n + 1), size=m).T  # (n+1, m)
    x = cols[:n]
    if rng.random() < 0.3:
        x = x / np.maximum(x.sum(axis=0), 1e-300)  # column sums exactly 1
    return np.clip(x, 0.0, 1.0)
