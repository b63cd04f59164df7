import json
import subprocess
import sys

import jsonschema
import pytest

from fmpomdp.cli import BUILTINS, ConfigError, RunConfig, main, run
from fmpomdp.envs import make_fj_counterexample
from fmpomdp.io import load_model, model_hash, model_to_dict, policy_to_dict, save_model
from fmpomdp.model import Policy
from fmpomdp.report import ERROR_SCHEMA, SCHEMA


def call(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


SMOKE = [
    ("validate",),
    ("diameter",),
    ("decodability", "--m", "3", "--n", "3"),
    ("identities", "--objective", "MIK_A", "--kmax", "1"),
    ("decoupling", "--h", "1"),
    ("discover", "--objective", "AH_A", "--kmax", "1"),
    ("simulate", "--length", "6", "--seed", "4"),
]


@pytest.mark.parametrize("argv", SMOKE, ids=[a[0] for a in SMOKE])
def test_reports_validate_and_repeat_byte_for_byte(capsys, argv):
    code1, out1 = call(capsys, *argv)
    code2, out2 = call(capsys, *argv)
    assert out1 == out2 and code1 == code2
    report = json.loads(out1)
    jsonschema.validate(report, SCHEMA)
    assert code1 == (0 if report["passed"] else 1)
    assert "wall_time_s" not in report


def test_identities_all_pass(capsys):
    code, out = call(capsys, "identities", "--model", "fj-counterexample", "--objective", "MIK_A", "--kmax", "3")
    rep = json.loads(out)
    assert code == 0 and rep["passed"]
    assert rep["results"]["MIK_A"]["max_discrepancy"] == "0/1"


def test_discover_fj_a_fails_with_merged_states(capsys):
    code, out = call(capsys, "discover", "--model", "fj-counterexample", "--objective", "FJ_A")
    rep = json.loads(out)
    assert code == 1 and not rep["passed"]
    res = rep["results"]["FJ_A"]
    assert res["classes"] == 1 and len(res["state_classes"][0]) == 8
    assert len(res["verdict"]["merged_pairs"]) == 28


def test_dump_ik_file(capsys, tmp_path):
    out = tmp_path / "ik.txt"
    code, text = call(capsys, "dump-ik", "--model", "fj-counterexample", "--k", "1..10", "--out", str(out))
    assert code == 0 and json.loads(text)["results"]["total"] == 16368
    first = out.read_bytes()
    assert len(first.decode().splitlines()) == 16368
    call(capsys, "dump-ik", "--k", "1..10", "--out", str(out))
    assert out.read_bytes() == first


def test_dump_ik_default_path(capsys, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    call(capsys, "dump-ik", "--k", "2")
    assert (tmp_path / "ik_examples.txt").read_text().count("\n") == 32


def test_decimal_rendering(capsys, tmp_path):
    # a policy that looks at the exogenous counter breaks decoupling with a non-trivial residual
    table = [[["3/4", "1/4"], ["1/4", "3/4"], ["1/2", "1/2"], ["1/2", "1/2"]] for _ in range(8)]
    pol = tmp_path / "exo.json"
    pol.write_text(json.dumps(policy_to_dict(Policy.exo_dependent(table))))
    _, exact = call(capsys, "decoupling", "--policy", str(pol), "--h", "2")
    _, dec = call(capsys, "decoupling", "--policy", str(pol), "--h", "2", "--decimal")
    r_exact = json.loads(exact)["results"]["2"]["max_residual"]
    r_dec = json.loads(dec)["results"]["2"]["max_residual"]
    assert r_exact != "0/1" and "/" not in r_dec
    num, den = map(int, r_exact.split("/"))
    assert abs(float(r_dec) - num / den) < 1e-6
    assert dec != exact and json.loads(dec)["passed"] is False


def test_timing_is_opt_in(capsys):
    _, out = call(capsys, "diameter", "--timing")
    rep = json.loads(out)
    jsonschema.validate(rep, SCHEMA)
    assert rep["wall_time_s"] >= 0


@pytest.mark.parametrize("argv", [
    ("bogus",),
    ("validate", "--model", "no-such-model"),
    ("validate", "--budget", "0"),
    ("identities", "--objective", "XYZ"),
    ("dump-ik", "--k", "3..1"),
    ("validate", "--policy", "nowhere.json"),
])
def test_config_errors(capsys, argv):
    code, out = call(capsys, *argv)
    assert code == 2
    jsonschema.validate(json.loads(out), ERROR_SCHEMA)


def test_budget_error_is_reported(capsys):
    code, out = call(capsys, "identities", "--objective", "MIK_A", "--kmax", "3", "--budget", "10")
    assert code == 2 and json.loads(out)["error"]["type"] == "BudgetExceeded"


def test_model_and_policy_files(capsys, tmp_path):
    ce = make_fj_counterexample()
    path = tmp_path / "ce.json"
    save_model(ce, path)
    assert load_model(path) == ce
    pol = tmp_path / "pol.json"
    pol.write_text(json.dumps(policy_to_dict(Policy.uniform(ce))))
    _, out = call(capsys, "diameter", "--model", str(path), "--policy", str(pol))
    rep = json.loads(out)
    assert rep["model"]["hash"] == model_hash(ce) and rep["results"]["diameter"] == 3
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(policy_to_dict(Policy([["1/2", "1/2"]]))))
    code, _ = call(capsys, "diameter", "--policy", str(bad))
    assert code == 2


def test_report_file_and_simulation_dump(capsys, tmp_path):
    rep, traj = tmp_path / "r.json", tmp_path / "t.tsv"
    code, out = call(capsys, "simulate", "--seed", "9", "--out", str(traj), "--report", str(rep))
    assert code == 0 and out == ""
    body = json.loads(rep.read_text())
    assert len(body["results"]["steps"]) == 10
    lines = traj.read_text().splitlines()
    assert lines[0] == f"# model={body['model']['hash']} seed=9" and len(lines) == 12


def test_builtins_load_and_validate():
    for name in BUILTINS:
        rep = run(RunConfig("validate", model=name))
        assert rep["model"]["name"] and isinstance(rep["passed"], bool)
    with pytest.raises(ConfigError):
        run(RunConfig("nope"))


def test_interchange_round_trip():
    ce = make_fj_counterexample(2)
    d = model_to_dict(ce)
    assert json.loads(json.dumps(d)) == d


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "fmpomdp", "diameter"], capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["results"]["diameter"] == 3
    proc = subprocess.run([sys.executable, "-m", "fmpomdp", "diameter", "--model", "navigation"],
                          capture_output=True, text=True)
    assert proc.returncode == 1 and json.loads(proc.stdout)["results"]["diameter"] is None
