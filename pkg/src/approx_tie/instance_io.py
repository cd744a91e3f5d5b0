"""JSON instance and graph files.

Instance schema::

    {"num_items": int,
     "bidders": [{"components": [{"weight": number,
                                  "matroid": {"type": ..., <variant fields>}}]}]}

Variant fields: uniform {"k"}; partition {"blocks", "capacities"}; graphic
{"num_vertices", "edges"}; paving {"graph": {"num_vertices", "edges"}} or
{"num_pairs", "k", "family"}; explicit {"ground_size", "independent_sets"}.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

from .errors import ValidationError
from .matroid import (
    ExplicitMatroid,
    Graph,
    GraphicMatroid,
    MatroidSpec,
    PartitionMatroid,
    PavingMatroid,
    UniformMatroid,
    mask_elements,
)
from .valuation import AuctionInstance, WMRSValuation


def _field(obj, key, where, kind=None):
    if not isinstance(obj, dict):
        raise ValidationError(f"{where}: expected an object")
    if key not in obj:
        raise ValidationError(f"{where}.{key}: missing required field")
    val = obj[key]
    if kind == "int" and (not isinstance(val, int) or isinstance(val, bool)):
        raise ValidationError(f"{where}.{key}: expected an integer")
    if kind == "number" and (not isinstance(val, (int, float)) or isinstance(val, bool) or not math.isfinite(val)):
        raise ValidationError(f"{where}.{key}: expected a finite number")
    if kind == "list" and not isinstance(val, list):
        raise ValidationError(f"{where}.{key}: expected a list")
    return val


def _int_list(val, where):
    if not isinstance(val, list) or not all(isinstance(e, int) and not isinstance(e, bool) for e in val):
        raise ValidationError(f"{where}: expected a list of integers")
    return val


def graph_from_dict(d, where="graph") -> Graph:
    nv = _field(d, "num_vertices", where, "int")
    edges = _field(d, "edges", where, "list")
    for k, e in enumerate(edges):
        if len(_int_list(e, f"{where}.edges[{k}]")) != 2:
            raise ValidationError(f"{where}.edges[{k}]: expected a vertex pair")
    try:
        return Graph(nv, tuple(tuple(e) for e in edges))
    except ValidationError as exc:
        raise ValidationError(f"{where}: {exc}") from None


def graph_to_dict(g: Graph) -> dict:
    return {"num_vertices": g.num_vertices, "edges": [list(e) for e in g.edges]}


def matroid_from_dict(d, m: int, where: str) -> MatroidSpec:
    kind = _field(d, "type", where)
    try:
        if kind == "uniform":
            return UniformMatroid(m, _field(d, "k", where, "int"))
        if kind == "partition":
            blocks = [_int_list(b, f"{where}.blocks[{k}]") for k, b in enumerate(_field(d, "blocks", where, "list"))]
            caps = _int_list(_field(d, "capacities", where), f"{where}.capacities")
            spec = PartitionMatroid(tuple(map(tuple, blocks)), tuple(caps))
        elif kind == "graphic":
            g = graph_from_dict(d, where)
            spec = GraphicMatroid(g.num_vertices, g.edges)
        elif kind == "paving":
            if "graph" in d:
                g = graph_from_dict(d["graph"], f"{where}.graph")
                spec = PavingMatroid(g.num_edges, g.num_vertices // 2, graph=g)
            else:
                fam = [_int_list(f, f"{where}.family[{k}]") for k, f in enumerate(_field(d, "family", where, "list"))]
                spec = PavingMatroid(
                    _field(d, "num_pairs", where, "int"), _field(d, "k", where, "int"), family=frozenset(map(frozenset, fam))
                )
        elif kind == "explicit":
            sets = [_int_list(s, f"{where}.independent_sets[{k}]") for k, s in enumerate(_field(d, "independent_sets", where, "list"))]
            spec = ExplicitMatroid(_field(d, "ground_size", where, "int"), frozenset(frozenset(s) for s in sets))
        else:
            raise ValidationError(f"{where}.type: unknown matroid type {kind!r}")
    except ValidationError as exc:
        if str(exc).startswith(where):
            raise
        raise ValidationError(f"{where}: {exc}") from None
    if spec.ground_size != m:
        raise ValidationError(f"{where}: ground set has {spec.ground_size} elements, instance has {m} items")
    return spec


def matroid_to_dict(spec: MatroidSpec) -> dict:
    if isinstance(spec, UniformMatroid):
        return {"type": "uniform", "k": spec.k}
    if isinstance(spec, PartitionMatroid):
        return {"type": "partition", "blocks": [list(b) for b in spec.blocks], "capacities": list(spec.capacities)}
    if isinstance(spec, GraphicMatroid):
        return {"type": "graphic", "num_vertices": spec.num_vertices, "edges": [list(e) for e in spec.edges]}
    if isinstance(spec, PavingMatroid):
        if spec.graph is not None:
            return {"type": "paving", "graph": graph_to_dict(spec.graph)}
        return {
            "type": "paving",
            "num_pairs": spec.num_pairs,
            "k": spec.k,
            "family": sorted(sorted(f) for f in spec.family),
        }
    if isinstance(spec, ExplicitMatroid):
        return {
            "type": "explicit",
            "ground_size": spec.ground_size,
            "independent_sets": sorted(mask_elements(s) for s in spec.independent_sets),
        }
    raise TypeError(f"not a matroid spec: {spec!r}")


def instance_from_dict(d) -> AuctionInstance:
    m = _field(d, "num_items", "instance", "int")
    if m < 1:
        raise ValidationError("instance.num_items: must be >= 1")
    bidders = _field(d, "bidders", "instance", "list")
    if not bidders:
        raise ValidationError("instance.bidders: need at least one bidder")
    vals = []
    for i, b in enumerate(bidders):
        comps = []
        for c, comp in enumerate(_field(b, "components", f"bidders[{i}]", "list")):
            where = f"bidders[{i}].components[{c}]"
            w = _field(comp, "weight", where, "number")
            if w < 0:
                raise ValidationError(f"{where}.weight: must be >= 0, got {w}")
            comps.append((float(w), matroid_from_dict(_field(comp, "matroid", where), m, f"{where}.matroid")))
        vals.append(WMRSValuation(m, tuple(comps)))
    return AuctionInstance(m, tuple(vals))


def instance_to_dict(inst: AuctionInstance) -> dict:
    return {
        "num_items": inst.num_items,
        "bidders": [
            {"components": [{"weight": w, "matroid": matroid_to_dict(mat)} for w, mat in v.components]}
            for v in inst.valuations
        ],
    }


def _load_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from None
    except OSError as exc:
        raise ValidationError(f"{path}: cannot read ({exc.strerror})") from None


def parse_instance(path) -> AuctionInstance:
    return instance_from_dict(_load_json(path))


def parse_graph(path) -> Graph:
    return graph_from_dict(_load_json(path))


def dump_instance(inst: AuctionInstance, path) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(inst), indent=2) + "\n")
