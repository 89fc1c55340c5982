import json
import math

import numpy as np
import pytest

from perspectra.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out.strip(), err


def test_persp(capsys):
    assert run(capsys, "persp", "--fn", "huber", "--param", "rho=1", "--eta", "2", "--y", "3") == (0, "2", "")
    code, out, _ = run(capsys, "persp", "--fn", "entropy", "--eta", "0", "--y", "1")
    assert (code, out) == (0, "inf")


def test_bad_param_is_usage_error(capsys):
    code, _, err = run(capsys, "persp", "--fn", "huber", "--param", "rho=-1", "--eta", "2", "--y", "3")
    assert code == 2 and "rho" in err
    assert run(capsys, "persp", "--fn", "nope", "--eta", "1", "--y", "1")[0] == 2
    assert run(capsys, "persp", "--fn", "huber", "--eta", "1", "--y", "a,b")[0] == 2
    assert run(capsys, "frobnicate")[0] == 2


def test_div(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    a.write_text("0.5\n0.5\n")
    b.write_text("0.25,0.75\n")
    code, out, _ = run(capsys, "div", "--phi", "kl", "--x", str(a), "--y", str(b))
    assert code == 0
    assert float(out) == pytest.approx(0.25 * math.log(0.5) + 0.75 * math.log(1.5), rel=1e-15)
    assert run(capsys, "div", "--phi", "power", "--param", "p=2", "--x", "1,0", "--y", "0,1")[1] == "2"
    code, out, _ = run(capsys, "div", "--phi", "entropy", "--x", "0.5,0.5", "--y", "0.25,0.75",
                       "--weights", "1,0")
    assert float(out) == pytest.approx(0.25 * math.log(0.5), rel=1e-15)
    assert run(capsys, "div", "--phi", "kl", "--x", str(tmp_path / "missing.csv"), "--y", "1")[0] == 3
    assert run(capsys, "div", "--phi", "kl", "--x", "1,2", "--y", "1")[0] == 3


def test_json_round_trip(capsys):
    for argv in (["eval", "--fn", "fair", "--param", "rho=1", "--param", "p=1", "--y", "1"],
                 ["persp", "--fn", "berhu", "--eta", "0.3", "--y", "2.2"],
                 ["persp", "--fn", "norm_pow", "--eta", "0", "--y", "1"]):
        _, plain, _ = run(capsys, *argv)
        _, js, _ = run(capsys, "--json", *argv)
        _, js2, _ = run(capsys, *argv, "--json")
        assert js == js2
        value = json.loads(js)["value"]
        assert float(value) == float(plain)


def test_demo_minseq(capsys):
    code, out, _ = run(capsys, "demo", "minseq", "--p", "1", "--n", "3")
    rows = [line.split(",") for line in out.splitlines()]
    assert code == 0 and len(rows) == 3
    assert [int(r[0]) for r in rows] == [0, 1, 2]
    assert [float(r[1]) for r in rows] == [1.0, 0.5, 1 / 3]
    assert [float(r[2]) for r in rows] == [1.0, 2.0, 3.0]
    assert run(capsys, "demo", "minseq", "--p", "60", "--n", "20000")[0] == 3


def test_demo_lsc(capsys):
    code, out, _ = run(capsys, "demo", "lsc", "--p", "2", "--steps", "6")
    lines = out.splitlines()
    assert code == 0 and lines[-1] == "origin,0"
    assert all(float(line.split(",")[1]) == 1 for line in lines[:-1])


def test_grids(capsys, tmp_path):
    g = tmp_path / "g.csv"
    g.write_text("0\n0\n1\n1\n")
    assert run(capsys, "tv", "--grid", str(g), "--h", "1") == (0, "1", "")
    assert run(capsys, "fisher", "--grid", str(g), "--h", "1")[1] == "inf"
    assert run(capsys, "tv", "--grid", str(tmp_path / "none.csv"), "--h", "1")[0] == 3


def test_marginal_and_subdiff(capsys):
    code, out, _ = run(capsys, "marginal", "--fn", "norm_pow", "--param", "p=2", "--K", "1,2", "--y", "4")
    assert code == 0 and float(out) == pytest.approx(8, rel=1e-9)
    code, out, _ = run(capsys, "--json", "subdiff", "--fn", "norm_pow", "--param", "p=2",
                       "--eta", "1", "--y", "1")
    assert json.loads(out) == {"kind": "hull", "pairs": [{"mu": -1.0, "u": [2.0]}]}
    assert run(capsys, "subdiff", "--fn", "norm_pow", "--eta", "-1", "--y", "0")[1] == "empty"


def test_check_single_function(capsys):
    code, out, _ = run(capsys, "check", "--fn", "huber", "--trials", "200")
    assert code == 0 and out.count("PASS") == 2
    code, out, _ = run(capsys, "--json", "check", "--fn", "huber", "--trials", "200", "--inject-defect", "2")
    assert code == 1 and not all(r["passed"] for r in json.loads(out))
    assert run(capsys, "check", "--trials", "10")[0] == 2


def test_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("PERSPECTRA_SEED", "99")
    _, out, _ = run(capsys, "--json", "check", "--fn", "berhu", "--trials", "50")
    assert {r["seed"] for r in json.loads(out)} == {99}
    monkeypatch.setenv("PERSPECTRA_SEED", "x")
    assert run(capsys, "check", "--fn", "berhu", "--trials", "5")[0] == 2


def test_check_all_on_correct_build(capsys):
    code, out, _ = run(capsys, "check", "--all", "--trials", "200")
    assert code == 0 and "FAIL" not in out
