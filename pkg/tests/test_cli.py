import csv
import json

import numpy as np
import pytest

from junta_probe import cli
from junta_probe.closedform import halfspace_mean


def _run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out


def _report(argv, capsys):
    code, out = _run(argv, capsys)
    lines = [l for l in out.out.splitlines() if l.strip()]
    assert len(lines) == 1
    return code, cli.parse_report(lines[0])


def test_constant_function_passes(capsys):
    code, rep = _report(["test", "--function", "gen:constant", "--dim", "4"], capsys)
    assert code == cli.EXIT_OK
    assert rep["status"] == "ok"
    assert rep["payload"]["verdict"] == "yes"
    assert rep["queries"]["total"] > 0
    assert {"seed", "version", "backend", "timings", "config"} <= set(rep)


def test_parity_is_rejected(capsys):
    code, rep = _report(["test", "--function", "gen:parity3", "--dim", "8", "--skip-gate"],
                        capsys)
    assert code == 0 and rep["payload"]["verdict"] == "no"


def test_same_seed_gives_identical_payloads(capsys):
    argv = ["test", "--function", "gen:halfspace", "--dim", "8", "--seed", "7"]
    _, a = _report(argv, capsys)
    _, b = _report(argv, capsys)
    assert cli.payload_bytes(a) == cli.payload_bytes(b)
    _, c = _report(argv[:-1] + ["8"], capsys)
    assert cli.payload_bytes(a) != cli.payload_bytes(c)


def test_budget_cap_exits_with_code_3(capsys):
    code, out = _run(["test", "--function", "gen:halfspace", "--max-queries", "10"], capsys)
    assert code == cli.EXIT_BUDGET
    rep = cli.parse_report(out.out.strip())
    assert rep["status"] == "budget_exceeded"
    assert rep["queries"]["total"] <= 10
    assert rep["payload"]["limit"] == 10
    assert "budget" in out.err


def test_precedence_flag_env_file_default(tmp_path, monkeypatch):
    conf = tmp_path / "run.conf"
    conf.write_text("# comment\neps = 0.3\nk = 2\ndim = 5\n")
    monkeypatch.setenv("JUNTA_PROBE_EPS", "0.2")
    monkeypatch.setenv("JUNTA_PROBE_DIM", "6")
    args = cli.build_parser().parse_args(["test", "--config", str(conf), "--dim", "7"])
    cfg = cli.resolve_config(args)
    assert cfg["dim"] == 7        # flag beats env and file
    assert cfg["eps"] == 0.2      # env beats file
    assert cfg["k"] == 2          # file beats default
    assert cfg["s"] == 2.0        # default


def test_unknown_config_key_is_a_usage_error(tmp_path, capsys):
    conf = tmp_path / "bad.conf"
    conf.write_text("colour = blue\n")
    code, out = _run(["test", "--config", str(conf)], capsys)
    assert code == cli.EXIT_USAGE
    assert "colour" in out.err


@pytest.mark.parametrize("argv,field", [
    (["test", "--function", "gen:halfspace", "--eps", "-1"], "eps"),
    (["test", "--function", "gen:halfspace", "--dim", "zero"], "dim"),
    (["test", "--function", "gen:nonesuch"], "function"),
    (["test"], "function"),
    (["test", "--function", '{"kind": "constant", "c": 1.0, "dim": 3}'], "dim"),
    (["test", "--function", "gen:halfspace", "--preset", "fast"], "preset"),
    (["lowerbound", "--s", "ten"], "s"),
    (["lowerbound", "--design", "hexagon:3"], "design"),
])
def test_usage_errors_name_the_field(argv, field, capsys):
    code, out = _run(argv, capsys)
    assert code == cli.EXIT_USAGE
    assert f"error: {field}:" in out.err
    assert out.out == ""


def test_report_round_trip(tmp_path, capsys):
    path = tmp_path / "r.jsonl"
    argv = ["test", "--function", "gen:constant", "--dim", "3", "--out", str(path)]
    assert cli.main(argv) == 0
    assert cli.main(argv) == 0
    lines = path.read_text().splitlines()
    assert len(lines) == 2
    rep = cli.parse_report(lines[0])
    assert cli.serialize_report(rep) == lines[0]
    assert cli.payload_bytes(rep) == cli.payload_bytes(cli.parse_report(lines[1]))


def test_inline_json_function(capsys):
    spec = json.dumps({"kind": "constant", "c": -1.0, "dim": 3})
    code, rep = _report(["test", "--function", spec, "--dim", "3"], capsys)
    assert code == 0 and rep["payload"]["verdict"] == "yes"


def test_learn_recovers_halfspace(capsys):
    code, rep = _report(["learn", "--function", "gen:halfspace", "--dim", "8",
                         "--hypotheses", "signed-thresholds:100", "--fresh", "300"], capsys)
    p = rep["payload"]
    assert code == 0 and p["ell"] == 1
    assert p["fresh_l1_error"] < 0.3
    assert p["learning_queries"] <= rep["queries"]["total"]


def test_structure_test_subcommand(capsys):
    code, rep = _report(["structure-test", "--function", "gen:rotated-sign", "--dim", "8",
                         "--hypotheses", "signed-thresholds:100"], capsys)
    assert code == 0 and rep["payload"]["verdict"] == "yes"


def test_lowerbound_csv(tmp_path, capsys):
    path = tmp_path / "lb.csv"
    code, out = _run(["lowerbound", "--s", "10,100", "--design", "spread:3", "--trials",
                      "5000", "--bootstrap", "20", "--out", str(path)], capsys)
    assert code == 0 and out.out == ""
    rows = list(csv.DictReader(path.open()))
    assert list(rows[0]) == ["s", "n", "tv", "tv_ci", "eventA_fail_rate"]
    assert [r["s"] for r in rows] == ["10", "100"]
    assert all(0 <= float(r["tv"]) <= 1 for r in rows)


def test_bench_estimators_halfspace(capsys):
    code, rep = _report(["bench-estimators", "--dim", "4"], capsys)
    rows = {r["quantity"]: r for r in rep["payload"]["rows"]}
    assert code == 0
    assert set(rows) == {"mean", "pt", "degree1_eval", "grad_inner_diag", "grad_inner",
                         "noise_sensitivity"}
    assert rows["mean"]["target"] == pytest.approx(halfspace_mean(1.0))
    assert rows["mean"]["target"] == pytest.approx(-0.6827, abs=1e-4)
    assert rows["mean"]["error"] < 0.05


def test_bench_estimators_constant(capsys):
    _, rep = _report(["bench-estimators", "--dim", "4", "--function", "gen:constant"], capsys)
    rows = {r["quantity"]: r for r in rep["payload"]["rows"]}
    for q in ("degree1_eval", "grad_inner_diag", "grad_inner", "noise_sensitivity"):
        assert rows[q]["estimate"] == 0.0
    assert rows["mean"]["estimate"] == 1.0


def test_jsonable_handles_numpy_and_nonfinite():
    out = cli._jsonable({"a": np.float64(np.inf), "b": np.arange(2), "c": np.bool_(True)})
    assert out == {"a": "inf", "b": [0, 1], "c": True}
