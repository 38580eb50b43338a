import json
import math
import subprocess
import sys

import pytest

from landau1d.cli import main, parse_field, read_table


def run(args, capsys):
    code = main(args)
    out, err = capsys.readouterr()
    return code, out, err


def test_potentials_table(tmp_path, capsys):
    out = tmp_path / "v.csv"
    code, _, _ = run(["potentials", "table", "--m", "0", "--xmin", "0", "--xmax", "5",
                      "--points", "6", "--out", str(out)], capsys)
    assert code == 0
    comments, cols, rows = read_table(out)
    assert comments[0].startswith("# landau1d ")
    assert any(c.startswith("# seed:") for c in comments)
    assert cols == ["x", "V_0"] and len(rows) == 6
    assert float(rows[0][1]) == pytest.approx(math.sqrt(math.pi), rel=1e-14)


def test_table_deterministic_and_diff(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        run(["potentials", "table", "--m", "0,3", "--points", "11", "--out", str(p)], capsys)
    # bodies are byte-identical; the header differs only by the output path
    body = [[ln for ln in p.read_text().splitlines() if not ln.startswith("#")] for p in (a, b)]
    assert body[0] == body[1]
    code, out, _ = run(["diff", str(a), str(b)], capsys)
    assert code == 0 and json.loads(out)["equal"]
    c = tmp_path / "c.csv"
    run(["potentials", "table", "--m", "0,4", "--points", "11", "--out", str(c)], capsys)
    assert run(["diff", str(a), str(c)], capsys)[0] == 1
    r = tmp_path / "r.csv"
    code, _, _ = run(["replot", str(a), "--x", "x", "--y", "V_3", "--out", str(r)], capsys)
    assert code == 0
    assert read_table(r)[1] == ["x", "V_3"]


def test_interactions(capsys):
    code, out, _ = run(["interactions", "coeffs", "--kind", "product", "--m", "1,1"], capsys)
    assert code == 0 and "1/2" in out
    code, _, err = run(["interactions", "verify", "--max-m", "4", "--x", "0.5,2"], capsys)
    assert code == 0 and json.loads(err.strip().splitlines()[-1])["pass"]


def test_solve_and_certify(capsys):
    code, out, _ = run(["solve", "--Z", "1", "--B", "100", "--N", "2"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["converged"] and doc["energy_scaled"] < -0.4
    code, out, _ = run(["certify", "--model", "m0", "--Z", "1", "--N", "1", "--B", "100"], capsys)
    assert code != 0 and json.loads(out)["verdict"] is False
    code, out, _ = run(["certify", "--Z", "0.01", "--N", "20", "--B", "1e3"], capsys)
    assert code == 0 and json.loads(out)["verdict"] is True


def test_params_env(tmp_path, capsys, monkeypatch):
    p = tmp_path / "params.json"
    p.write_text(json.dumps({"lambda": 1e9}))
    monkeypatch.setenv("LANDAU1D_PARAMS", str(p))
    code, out, _ = run(["certify", "--Z", "0.01", "--N", "20", "--B", "1e3"], capsys)
    doc = json.loads(out)
    assert code == 1 and doc["config"]["params_source"] == str(p)


def test_thresholds_field_expression(capsys):
    code, out, _ = run(["thresholds", "--Z", "5", "--B", "Z^4"], capsys)
    assert code == 0
    row = [ln for ln in out.splitlines() if ln.startswith("corollary3")][0]
    assert float(row.split(",")[1]) == pytest.approx(15 + 5 * math.log(5) ** 2, rel=1e-14)
    assert parse_field("2*Z^3.5", 4.0) == pytest.approx(2 * 4 ** 3.5)
    assert parse_field("Z**3", 2.0) == 8.0
    assert parse_field("1e7", None) == 1e7


def test_scan(tmp_path, capsys):
    out = tmp_path / "scan.csv"
    code, _, err = run(["scan", "nmax", "--Z", "1", "--B", "100", "--cap", "4",
                        "--out", str(out)], capsys)
    assert code == 0 and json.loads(err)["n_max"] == 2
    _, cols, rows = read_table(out)
    assert cols[:5] == ["N", "energy", "bound_flag", "iterations", "residual"]


def test_partition_check(capsys):
    code, out, err = run(["partition", "check", "--N", "4,8", "--samples", "2000",
                          "--seed", "7"], capsys)
    assert code == 0 and "# seed: 7" in out
    assert json.loads(err)["max_normalization_error"] < 1e-12


def test_errors_are_json(capsys):
    code, _, err = run(["solve", "--Z", "1", "--B", "Z^"], capsys)
    assert code == 2 and json.loads(err)["error"] == "invalid-input"
    code, _, err = run(["solve", "--Z", "-1", "--B", "100"], capsys)
    assert code == 2
    code, _, err = run(["certify", "--Z", "10", "--B", "100", "--N", "5"], capsys)
    assert code == 3 and json.loads(err)["type"] == "NearSingularError"
    code, _, err = run(["solve", "--Z", "1", "--B", "100", "--grid", "L=2,n=101"], capsys)
    assert code == 3 and json.loads(err)["suggested_L"] > 2


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "landau1d", "--version"], capture_output=True,
                       text=True)
    assert r.returncode == 0 and "landau1d" in r.stdout
