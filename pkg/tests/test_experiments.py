import csv
import json
import shutil
from pathlib import Path

import pytest

from cslab.cli import main
from cslab.experiments import corpus_regression, jsonable, run
from cslab.formats import dump_json, load_json, validate
from cslab.tolerances import SchemaError, eps, override

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def numeric_view(report):
    data = jsonable(report.to_json())
    data.pop("wall_time")
    data.pop("versions")
    return data


def test_run_galois_s3():
    rep = run(FIXTURES / "s3_galois.config.json")
    assert rep.ok
    assert rep.results["count"] == 6
    assert sum(c.name.startswith("subgroup:") and c.status == "pass" for c in rep.checks) == 6


def test_run_fock_fourth_moment():
    cfg = {"kind": "fock", "inputs": {"covariance": "scalar.covariance.json"},
           "params": {"depth": 4, "checks": ["moment"], "words": ["X X X X"], "expected": {"X X X X": 2}}}
    rep = run(cfg, FIXTURES)
    assert rep.ok
    m = rep.results["moments"]["X X X X"]
    assert abs(m.vec()[0] - 2.0) < 1e-10


def test_empty_config_is_a_schema_error():
    with pytest.raises(SchemaError):
        run({}, FIXTURES)


def test_config_validation():
    with pytest.raises(SchemaError):
        validate({"kind": "galois", "inputs": {}, "bogus": 1}, "config")
    with pytest.raises(SchemaError, match="needs a seed"):
        run({"kind": "galois", "inputs": {"action": "z2_swap.action.json"}}, FIXTURES)
    with pytest.raises(SchemaError, match="missing input"):
        run({"kind": "galois", "inputs": {"action": "nope.json"}, "seed": 1}, FIXTURES)


def test_mathematical_failure_becomes_a_check(tmp_path):
    shutil.copy(FIXTURES / "m2_trivial.correspondence.json", tmp_path)
    cfg = {"kind": "mostow", "inputs": {"correspondence": "m2_trivial.correspondence.json"}, "seed": 1,
           "params": {"side": "right", "gens": [[[0, 0], [0, 0], [0, 0], [0, 0]]]}}
    rep = run(cfg, tmp_path)
    assert not rep.ok
    assert rep.checks[-1].name == "mostow:error"
    assert rep.checks[-1].witness["error"] == "PreconditionError"


def test_determinism():
    a = run(FIXTURES / "z2_freeness.config.json")
    b = run(FIXTURES / "z2_freeness.config.json")
    assert json.dumps(numeric_view(a), sort_keys=True) == json.dumps(numeric_view(b), sort_keys=True)


def test_tolerance_override_is_scoped():
    cfg = load_json(FIXTURES / "z2_crossed.config.json")
    cfg["tolerances"] = {"eps": 1e-30}
    rep = run(cfg, FIXTURES)
    assert not rep.ok
    assert eps() == 1e-9
    with override(eps=1e-3):
        assert eps() == 1e-3
    assert eps() == 1e-9


def test_env_tolerance(monkeypatch):
    monkeypatch.setenv("CSLAB_TOL", "1e-6")
    assert eps() == 1e-6
    assert eps(1e-2) == 1e-2


def test_pristine_corpus():
    summary = corpus_regression(FIXTURES)
    assert len(summary["cases"]) == 14
    assert summary["drifts"] == [] and summary["failed_checks"] == [] and summary["missing_golden"] == []


def test_perturbed_golden_names_one_drift(tmp_path):
    for p in FIXTURES.glob("s3_simplicity.*"):
        shutil.copy(p, tmp_path)
    shutil.copy(FIXTURES / "s3_translation.action.json", tmp_path)
    gold = load_json(tmp_path / "s3_simplicity.golden.json")
    gold["results"]["center_dim"] = 2
    dump_json(gold, tmp_path / "s3_simplicity.golden.json")
    summary = corpus_regression(tmp_path)
    assert len(summary["drifts"]) == 1
    assert summary["drifts"][0]["case"] == "s3_simplicity"
    assert summary["drifts"][0]["path"] == "/results/center_dim"


def test_missing_golden_is_listed(tmp_path):
    shutil.copy(FIXTURES / "s3_simplicity.config.json", tmp_path)
    shutil.copy(FIXTURES / "s3_translation.action.json", tmp_path)
    summary = corpus_regression(tmp_path)
    assert summary["missing_golden"] == ["s3_simplicity"] and summary["drifts"] == []


def test_empty_corpus(tmp_path):
    assert corpus_regression(tmp_path) == {"cases": [], "drifts": [], "missing_golden": [], "failed_checks": []}


def test_cli_run_and_csv(tmp_path, capsys):
    out, table = tmp_path / "r.json", tmp_path / "r.csv"
    code = main(["run", "--config", str(FIXTURES / "scalar_moments.config.json"), "--out", str(out),
                 "--csv", str(table)])
    assert code == 0
    data = load_json(out)
    assert data["ok"] and list(data) == sorted(data)
    with open(table) as fh:
        rows = list(csv.DictReader(fh))
    assert {r["name"] for r in rows} >= {"moment:X X X X", "spanning"}


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["crossed", "simplicity", "--in", str(FIXTURES / "s3_translation.action.json"),
                 "--out", str(tmp_path / "s.json")]) == 0
    cfg = load_json(FIXTURES / "z2_crossed.config.json")
    cfg["inputs"]["action"] = str(FIXTURES / "z2_swap.action.json")
    cfg["tolerances"] = {"eps": 1e-30}
    dump_json(cfg, tmp_path / "strict.config.json")
    assert main(["run", "--config", str(tmp_path / "strict.config.json"), "--out", str(tmp_path / "x.json")]) == 1
    dump_json({}, tmp_path / "empty.config.json")
    assert main(["run", "--config", str(tmp_path / "empty.config.json")]) == 2
    assert "SchemaError" in capsys.readouterr().err


def test_cli_fock_moment(tmp_path):
    out = tmp_path / "m.json"
    code = main(["fock", "moment", "--in", str(FIXTURES / "scalar.covariance.json"), "--depth", "3",
                 "--word", "X X", "--word", "X X X X", "--vacuum-exact", "--out", str(out)])
    assert code == 0
    moments = load_json(out)["results"]["moments"]
    assert moments["X X X X"]["blocks"][0][0][0] == pytest.approx([2.0, 0.0], abs=1e-10)


def test_cli_schema(capsys):
    assert main(["schema", "--kind", "config"]) == 0
    schema = json.loads(capsys.readouterr().out)
    assert "kind" in schema["properties"]
