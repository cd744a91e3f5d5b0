import json
import math
from importlib import resources

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from approx_tie.cli import main
from approx_tie.corpus import random_instance
from approx_tie.errors import ValidationError
from approx_tie.instance_io import dump_instance, instance_from_dict, instance_to_dict, parse_instance

CORPUS = resources.files("approx_tie") / "corpus"


def _write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def _run(capsys, argv):
    code = main(argv)
    return code, capsys.readouterr()


def test_parse_minimal(tmp_path):
    inst = parse_instance(str(CORPUS / "unit_1x1.json"))
    assert inst.num_bidders == 1 and inst.num_items == 1


@pytest.mark.parametrize(
    "bad, field",
    [
        ({"num_items": 1, "bidders": [{"components": [{"weight": -1, "matroid": {"type": "uniform", "k": 1}}]}]}, "weight"),
        ({"num_items": 2, "bidders": [{"components": [{"weight": 1, "matroid": {"type": "partition", "blocks": [[0]], "capacities": [1]}}]}]}, "matroid"),
        ({"num_items": 1, "bidders": [{"components": [{"weight": 1, "matroid": {"type": "uniform"}}]}]}, "k"),
        ({"bidders": []}, "num_items"),
        ({"num_items": 1, "bidders": [{"components": [{"weight": 1, "matroid": {"type": "fano"}}]}]}, "type"),
    ],
)
def test_parse_errors_name_fields(tmp_path, bad, field):
    with pytest.raises(ValidationError, match=field):
        parse_instance(_write(tmp_path, "bad.json", bad))


@settings(max_examples=30, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(seed=st.integers(0, 2**32 - 1))
def test_round_trip(tmp_path, seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, int(rng.integers(1, 4)), int(rng.integers(1, 5)))
    assert instance_from_dict(json.loads(json.dumps(instance_to_dict(inst)))) == inst
    path = tmp_path / "inst.json"
    dump_instance(inst, path)
    assert parse_instance(str(path)) == inst


def test_allocate_unit_instance(capsys):
    code, out = _run(capsys, ["allocate", "--instance", str(CORPUS / "unit_1x1.json")])
    rep = json.loads(out.out)
    assert code == 0 and rep["command"] == "allocate"
    assert rep["result"]["final_Fexp"] >= 0.9 * (1 - math.exp(-1))
    assert rep["config"]["delta"] == 0.1 / 8 and rep["config"]["iteration_cap"] == 6400


def test_verify_shipped_corpus(capsys):
    code, out = _run(capsys, ["verify"])
    rep = json.loads(out.out)
    assert code == 0 and rep["result"]["failed"] == 0 and rep["result"]["total"] > 50


def test_hardness_c4(capsys, tmp_path):
    g = _write(tmp_path, "c4.json", {"num_vertices": 4, "edges": [[0, 1], [1, 2], [2, 3], [3, 0]]})
    code, out = _run(capsys, ["hardness", "--graph", g])
    res = json.loads(out.out)["result"]
    assert code == 0 and res["via_rank"] == 2 and res["direct"] == 2 and res["match"] is True


def test_exit_codes(capsys, tmp_path):
    bad = _write(tmp_path, "bad.json", {"num_items": 1, "bidders": []})
    assert _run(capsys, ["allocate", "--instance", bad])[0] == 1
    assert _run(capsys, ["allocate", "--instance", str(CORPUS / "unit_1x1.json"), "--epsilon", "1.5"])[0] == 1
    tri = _write(tmp_path, "tri.json", {"num_vertices": 3, "edges": [[0, 1], [1, 2], [2, 0]]})
    assert _run(capsys, ["hardness", "--graph", tri])[0] == 1
    big = _write(tmp_path, "big.json", {"num_vertices": 2, "edges": [[0, 1]] * 17})
    assert _run(capsys, ["hardness", "--graph", big])[0] == 3
    # the mechanism needs two bidders
    assert _run(capsys, ["mechanism", "--instance", str(CORPUS / "unit_1x1.json")])[0] == 1


def test_mechanism_and_regret_reports(capsys, tmp_path):
    inst = str(CORPUS / "symmetric_2x2.json")
    out_path = tmp_path / "mech.json"
    code, _ = _run(capsys, ["mechanism", "--instance", inst, "--welfare-samples", "200", "--out", str(out_path)])
    rep = json.loads(out_path.read_text())
    assert code == 0 and rep["result"]["branch"] in ("vcg", "lottery")
    assert len(rep["result"]["payments"]) == 2
    code, out = _run(capsys, ["regret", "--instance", inst, "--trials", "5", "--welfare-samples", "200"])
    rep = json.loads(out.out)
    assert code == 0 and len(rep["result"]["rows"]) == 10 and rep["result"]["epsilon_emp"] >= 0


def test_bidder_out_of_range(capsys):
    code, out = _run(capsys, ["regret", "--instance", str(CORPUS / "symmetric_2x2.json"), "--bidder", "5"])
    assert code == 1 and "--bidder" in out.err
