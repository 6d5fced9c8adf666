import json
import math

import pytest

from nullgeo.cli import dumps, main


def run(tmp_path, *argv, name="out"):
    out = tmp_path / name
    code = main([*argv, "--out", str(out)])
    return code, (out.read_text() if out.exists() else None)


def test_report_cone(tmp_path):
    code, text = run(tmp_path, "report", "--surface", "cone", "--n", "2", "--grid", "3x3x3")
    assert code == 0
    doc = json.loads(text)
    assert doc["schema"] == "nullgeo/1" and doc["command"] == "report"
    assert len(doc["per_point"]) == 27
    for r in doc["per_point"]:
        u = r["p"][0]
        assert r["rho"] == pytest.approx(-1, abs=1e-9)
        assert r["varrho"] == pytest.approx(-1 / (2 * u * u), abs=1e-9)
    assert doc["verdicts"]["umbilic"] and not doc["verdicts"]["totally_geodesic"]
    assert len(doc["per_leaf"]) == 3


def test_report_hyperplane(tmp_path):
    code, text = run(tmp_path, "report", "--surface", "hyperplane", "--grid", "3x3x3")
    doc = json.loads(text)
    assert code == 0 and doc["verdicts"]["totally_geodesic"]
    for r in doc["per_point"]:
        assert max(abs(x) for row in r["B_screen"] for x in row) == 0
        assert max(abs(x) for row in r["C_screen"] for x in row) == 0


@pytest.mark.parametrize("argv", [
    ["report", "--surface", "cone", "--range", "u=-1:2"],
    ["report", "--surface", "nosuch"],
    ["report", "--grid", "3x3"],
    ["report", "--tol-verdict", "0"],
    ["verify", "--suite", "nosuch"],
    ["sweep", "--values", "abc"],
    ["frobnicate"],
])
def test_config_errors(tmp_path, argv):
    code, _ = run(tmp_path, *argv)
    assert code == 2


def test_bad_config_file(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"family": "cone", "radius": 3}))
    assert run(tmp_path, "report", "--config", str(cfg))[0] == 2


def test_config_file_matches_catalog(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"family": "cone", "n": 2}))
    _, a = run(tmp_path, "report", "--config", str(cfg), "--grid", "2x2x2", name="a")
    _, b = run(tmp_path, "report", "--surface", "cone", "--grid", "2x2x2", name="b")
    pa, pb = json.loads(a)["per_point"], json.loads(b)["per_point"]
    assert [r["rho"] for r in pa] == [r["rho"] for r in pb]


def test_verify_single_suite(tmp_path):
    code, text = run(tmp_path, "verify", "--surface", "cone", "--suite", "proposition",
                     "--grid", "3x3x3")
    doc = json.loads(text)
    assert code == 0 and [s["name"] for s in doc["suites"]] == ["proposition"]
    assert doc["suites"][0]["worst"] < 1e-8


def test_verify_twisted(tmp_path):
    code, text = run(tmp_path, "verify", "--surface", "twisted",
                     "--suite", "lemma,proposition,corollary,nabla_rperp", "--grid", "3x3x3")
    assert code == 0
    assert all(s["passed"] for s in json.loads(text)["suites"])


def test_sweep_cone(tmp_path):
    code, text = run(tmp_path, "sweep", "--surface", "cone", "--values", "1,2,4", "--grid", "3x3x3")
    rows = json.loads(text)["rows"]
    assert code == 0 and [r["r2"] for r in rows] == pytest.approx([1, 4, 16], abs=1e-9)
    for r in rows:
        assert r["kind"] == "sphere" and r["containment_residual"] < 1e-9
        assert r["psi"] == pytest.approx(1 / (2 * r["u"] ** 2), abs=1e-9)


def test_sweep_hyperplane(tmp_path):
    code, text = run(tmp_path, "sweep", "--surface", "hyperplane", "--grid", "3x3x3")
    rows = json.loads(text)["rows"]
    assert code == 0 and len(rows) == 3
    for r in rows:
        assert r["rho"] == 0 and r["varrho"] == 0 and r["r2"] is None


def test_single_value_sweep_equals_report_leaf(tmp_path):
    common = ["--surface", "cone", "--grid", "1x3x3", "--range", "u=2:2"]
    _, rep = run(tmp_path, "report", *common, name="r")
    _, swp = run(tmp_path, "sweep", *common, "--values", "2", name="s")
    assert json.loads(rep)["per_leaf"] == json.loads(swp)["rows"]


def test_sweep_out_of_domain(tmp_path):
    assert run(tmp_path, "sweep", "--surface", "cone", "--values", "-3")[0] == 2


def test_deterministic_and_parallel(tmp_path):
    argv = ["report", "--surface", "twisted", "--grid", "3x3x3"]
    _, a = run(tmp_path, *argv, name="a")
    _, b = run(tmp_path, *argv, name="b")
    _, c = run(tmp_path, *argv, "--jobs", "3", name="c")
    assert a == b == c


def test_csv_and_text(tmp_path):
    code, csv = run(tmp_path, "report", "--surface", "cone", "--grid", "2x2x2", "--format", "csv")
    lines = csv.strip().splitlines()
    assert code == 0 and len(lines) == 9
    assert "rho" in lines[0].split(",")
    code, text = run(tmp_path, "sweep", "--surface", "cone", "--grid", "2x2x2", "--format", "text",
                     name="t")
    assert code == 0 and "r2" in text


def test_float_formatting():
    s = dumps({"a": 0.1, "b": -0.0, "c": math.inf, "d": [1, 2.5]})
    doc = json.loads(s)
    assert doc == {"a": 0.1, "b": 0.0, "c": None, "d": [1, 2.5]}
    assert "0.10000000000000001" in s and "-0" not in s
