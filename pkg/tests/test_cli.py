import csv
import io
import json
import pathlib

import pytest

from lagdelta.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, main
from lagdelta.families.registry import FAMILIES
from lagdelta.report import SCAN_COLUMNS

CHARTS = pathlib.Path(__file__).resolve().parents[1] / "demos" / "charts"
FAST = ["--grid", "2", "--restarts", "8"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_verify_family_passes(capsys):
    code, out, err = run(capsys, "verify", "--family", "ratio4-extensor", *FAST)
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["summary"]["passed"]
    assert "equality" in doc["summary"]["criteria"]
    assert "FAIL" not in err


def test_verify_non_lagrangian_chart_fails(capsys):
    code, out, err = run(capsys, "verify", "--chart", str(CHARTS / "nonlagrangian.json"), *FAST)
    assert code == EXIT_FAIL
    assert not json.loads(out)["summary"]["criteria"]["lagrangian"]["passed"]


def test_verify_random_graph_chart(capsys):
    code, out, _ = run(capsys, "verify", "--chart", str(CHARTS / "random_graph.json"), *FAST)
    assert code == EXIT_OK
    assert "equality" not in json.loads(out)["summary"]["criteria"]


def test_reports_are_byte_stable(tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        assert main(["verify", "--family", "c5", *FAST, "--out", str(p)]) == EXIT_OK
    assert paths[0].read_bytes() == paths[1].read_bytes()


@pytest.mark.parametrize("argv", [
    ["delta", "--model", "flat", "--tuple", "4,2"],
    ["delta", "--model", "flat", "--tuple", "x"],
    ["delta", "--model", "ratio4", "--dim", "4"],
    ["delta"],
    ["verify"],
    ["verify", "--family", "no-such-family"],
    ["verify", "--chart", "/nonexistent.json"],
    ["verify", "--family", "c5", "--param", "c"],
    ["scan", "--family", "c5"],
    ["bogus"],
])
def test_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == EXIT_USAGE
    assert err


@pytest.mark.parametrize("argv, value", [
    (["--model", "ratio4", "--mu", "0.5"], 4.0),
    (["--model", "constant", "--c", "1"], 8.0),
    (["--model", "flat"], 0.0),
])
def test_delta_models(capsys, argv, value):
    code, out, _ = run(capsys, "delta", *argv, "--restarts", "8")
    assert code == EXIT_OK
    assert json.loads(out)["result"]["value"] == pytest.approx(value, abs=1e-10)


def test_delta_at_chart_point(capsys):
    code, out, _ = run(capsys, "delta", "--family", "ratio4-extensor", "--restarts", "8")
    assert code == EXIT_OK
    assert json.loads(out)["source"]["chart"]


def test_delta_tensor_file(tmp_path, capsys):
    path = tmp_path / "t.json"
    m = 4
    comps = []
    for i in range(m):
        for j in range(m):
            if i != j:
                comps += [[i, j, j, i, 1.0], [i, j, i, j, -1.0]]
    path.write_text(json.dumps({"dimension": m, "components": comps}))
    code, out, _ = run(capsys, "delta", "--tensor", str(path), "--tuple", "2", "--restarts", "8")
    assert code == EXIT_OK
    assert json.loads(out)["result"]["value"] == pytest.approx(5.0, abs=1e-10)


def test_delta_rejects_non_curvature_tensor(tmp_path, capsys):
    path = tmp_path / "t.json"
    path.write_text(json.dumps({"dimension": 3, "components": [[0, 1, 1, 0, 1.0]]}))
    assert run(capsys, "delta", "--tensor", str(path), "--tuple", "2")[0] == EXIT_USAGE


def test_scan_csv(capsys):
    code, out, _ = run(capsys, "scan", "--family", "ratio4-extensor", "--vary", "mu0",
                       "--values", "0.2:0.6:3", "--points", "2", "--restarts", "8")
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out)))
    assert list(rows[0]) == SCAN_COLUMNS
    assert [float(r["value"]) for r in rows] == pytest.approx([0.2, 0.4, 0.6])
    assert all(r["status"] == "ok" for r in rows)


def test_scan_rejects_decreasing_values(capsys):
    code, _, _ = run(capsys, "scan", "--family", "c5", "--vary", "c", "--values", "2,1")
    assert code == EXIT_USAGE


@pytest.mark.parametrize("family", ["c5", "cp5", "ch5"])
def test_scan_ode(capsys, family):
    code, out, _ = run(capsys, "scan", "--ode", family, "--span", "0.1", "--step", "0.01")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0].startswith("t,mu,nu,theta,first_integral_residual")
    assert len(lines) == 12
    assert lines[0].endswith("mu2_plus_nu2") == (family == "ch5")


@pytest.mark.parametrize("fmt", ["text", "json"])
def test_families_listing(capsys, fmt):
    code, out, _ = run(capsys, "families", "--format", fmt)
    assert code == EXIT_OK
    if fmt == "json":
        assert sorted(json.loads(out)) == sorted(FAMILIES)
    else:
        assert all(name in out for name in FAMILIES)


def test_version(capsys):
    assert run(capsys, "--version")[0] == EXIT_OK
