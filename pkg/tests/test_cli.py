import json

import jsonschema
import pytest

from growthlab.cli import dumps, main
from growthlab.towerreal import TowerReal

NUMBER = {"type": ["number", "string"]}  # inf/nan and towers travel as strings

REPORT = {
    "type": "object",
    "required": ["command", "config_hash", "payload", "wall_time"],
    "properties": {
        "command": {"type": "array", "items": {"type": "string"}},
        "config_hash": {"type": "string", "pattern": "^[0-9a-f]{64}$"},
        "payload": {"type": "object"},
        "traces": {"type": "object", "additionalProperties": {
            "type": "array", "items": {"type": "array", "items": NUMBER}}},
        "wall_time": {"type": "number"},
    },
}

PAYLOADS = {
    "order": {"required": ["lambda", "status", "tolerance"],
              "properties": {"status": {"enum": ["converged", "diverged_to_infinity",
                                                 "tending_to_zero", "inconclusive"]}}},
    "classify": {"required": ["n", "k", "status", "membership", "chain"],
                 "properties": {"chain": {"type": "array", "items": {
                     "type": "object", "required": ["r", "f", "F", "source", "evidence"]}}}},
    "iterate": {"required": ["f", "t", "at", "value"]},
    "compare": {"required": ["verdict"]},
    "ackermann": {"required": ["m", "n", "kind"]},
    "eval": {"required": ["expr", "at", "value"]},
    "inb": {"required": ["verdict"]},
}


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip() else None), err


def check(report, sub):
    jsonschema.validate(report, REPORT)
    jsonschema.validate(report["payload"], {"type": "object", **PAYLOADS[sub]})


def test_order(capsys):
    code, rep, _ = run(capsys, "order", "--f", "3*x", "--F", "log(x)")
    assert code == 0
    check(rep, "order")
    assert rep["payload"]["status"] == "converged"
    assert rep["payload"]["lambda"] == pytest.approx(1.0986122886681098, abs=1e-6)
    assert rep["command"][1:] == ["order", "--f", "3*x", "--F", "log(x)"]


def test_iterate_twice(capsys):
    code, rep, _ = run(capsys, "--compact", "iterate", "--f", "exp", "--t", "1/2", "--at", "2",
                       "--twice")
    assert code == 0
    check(rep, "iterate")
    assert rep["payload"]["twice"] == pytest.approx(7.389056, abs=1e-5)


def test_iterate_general_map(capsys):
    code, rep, _ = run(capsys, "iterate", "--f", "2*x", "--t", "1/2", "--at", "3", "--twice")
    assert code == 0
    assert rep["payload"]["twice"] == pytest.approx(6.0, rel=1e-12)


def test_ackermann(capsys):
    code, rep, _ = run(capsys, "ackermann", "2", "3", "--exact")
    assert code == 0
    check(rep, "ackermann")
    assert rep["payload"]["value"] == "30"
    code, rep, _ = run(capsys, "ackermann", "3", "4")
    assert code == 4 and rep["payload"]["kind"] == "too-large"
    code, rep, _ = run(capsys, "ackermann", "3", "3", "--approx")
    assert code == 0 and rep["payload"]["value"].startswith("T[")


def test_classify(capsys):
    code, rep, _ = run(capsys, "classify", "--f", "x+x/log(x)")
    assert code == 0
    check(rep, "classify")
    assert (rep["payload"]["n"], rep["payload"]["k"]) == (1, 2)
    assert set(rep["traces"]) == {"step0", "step1"}


def test_classify_budget_exit_code(capsys):
    code, rep, _ = run(capsys, "classify", "--f", "x")
    assert code == 4 and rep["payload"]["status"] == "budget-exhausted"


def test_compare_and_inb(capsys):
    code, rep, _ = run(capsys, "compare", "--f", "g(x)", "--g", "h(x)")
    assert code == 0
    check(rep, "compare")
    assert rep["payload"]["verdict"] == "f>g"
    code, rep, _ = run(capsys, "inb", "--f", "exp(x)", "--n", "3")
    check(rep, "inb")
    assert rep["payload"]["verdict"] == "accepted(3)"


def test_eval_towers(capsys):
    code, rep, _ = run(capsys, "eval", "ExpK(3,x)", "--at", "3")
    assert code == 0
    check(rep, "eval")
    assert rep["payload"]["value"].startswith("T[4;")
    code, rep, _ = run(capsys, "eval", "LogK(3,x)", "--at", rep["payload"]["value"])
    assert rep["payload"]["value"] == pytest.approx(3.0, rel=1e-12)
    code, _, err = run(capsys, "eval", "ExpK(3,x)", "--at", "3", "--mode", "real")
    assert code == 3


def test_parse_error_exit_code(capsys):
    code, rep, err = run(capsys, "eval", "log(x", "--at", "2")
    assert code == 2 and rep is None
    assert "offset 5" in err


def test_domain_error_exit_code(capsys):
    code, _, err = run(capsys, "eval", "log(x)", "--at", "-1")
    assert code == 3 and "x = -1.0" in err


def test_usage_error_exit_code(capsys):
    code, _, _ = run(capsys, "ackermann", "2")
    assert code == 2


def test_config_env_and_flag(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"seeds": {str(n): "loglinear" for n in range(3, 7)}}))
    _, base, _ = run(capsys, "order", "--f", "ExpK(2,x)", "--F", "3")
    monkeypatch.setenv("GROWTHLAB_CONFIG", str(cfg))
    _, env, _ = run(capsys, "order", "--f", "ExpK(2,x)", "--F", "3")
    assert env["config_hash"] != base["config_hash"]
    assert env["payload"]["lambda"] == pytest.approx(2.0, abs=1e-12)
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    code, _, _ = run(capsys, "--config", str(bad), "eval", "x", "--at", "2")
    assert code == 2


def test_trace_csv(capsys, tmp_path):
    path = tmp_path / "trace.csv"
    code, rep, _ = run(capsys, "--trace", str(path), "order", "--f", "2*x", "--F", "log(x)")
    lines = path.read_text().splitlines()
    assert lines[0] == "series,x,value"
    assert len(lines) == 1 + len(rep["traces"]["order"])


def test_payload_is_deterministic(capsys):
    _, a, _ = run(capsys, "order", "--f", "x^2", "--F", "LogK(2,x)")
    _, b, _ = run(capsys, "order", "--f", "x^2", "--F", "LogK(2,x)")
    assert a["payload"] == b["payload"] and a["traces"] == b["traces"]


def test_dumps_formats():
    text = dumps({"a": 0.1, "b": float("inf"), "c": TowerReal(5, 2.0), "d": [1, None, True]})
    data = json.loads(text)
    assert data["a"] == 0.1 and data["b"] == "inf" and data["d"] == [1, None, True]
    assert data["c"].startswith("T[5;")
    assert "0.10000000000000001" in text
