import csv
import json
import subprocess
import sys

import pytest

from cmaeig.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, load_config, main, UsageError


def run(tmp_path, *args):
    out = tmp_path / "out"
    return main([*args, "--out", str(out)]), out


def test_check_derivatives_writes_report(tmp_path, capsys):
    rc, out = run(tmp_path, "check-derivatives", "--count", "5", "--seed", "3")
    assert rc == EXIT_OK
    report = json.loads((out / "report.json").read_text())
    assert report["ok"] is True
    assert report["seed"] == 3
    assert "PASS" in capsys.readouterr().out


def test_check_derivatives_is_byte_identical_for_a_seed(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    for d in (a, b):
        assert main(["check-derivatives", "--count", "5", "--seed", "11", "--out", str(d)]) == EXIT_OK
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()


def test_check_derivatives_failure(tmp_path, capsys):
    rc, _ = run(tmp_path, "check-derivatives", "--count", "5", "--rtol", "1e-14")
    assert rc == EXIT_FAIL
    assert "failing check" in capsys.readouterr().err


@pytest.mark.parametrize("seed", range(10))
def test_verify_algebra_across_seeds(tmp_path, seed):
    rc, out = run(tmp_path, "verify-algebra", "--samples", "20", "--seed", str(seed))
    assert rc == EXIT_OK
    report = json.loads((out / "report.json").read_text())
    assert report["ok"] and report["mutate"] == "none"


def test_verify_algebra_detects_mutation(tmp_path):
    rc, out = run(tmp_path, "verify-algebra", "--samples", "20", "--mutate", "F12_sign")
    assert rc == EXIT_FAIL
    assert json.loads((out / "report.json").read_text())["ok"] is False


def test_solve_ball_outputs_and_scaling(tmp_path):
    rc1, out1 = main(["solve-ball", "--out", str(tmp_path / "r1")]), tmp_path / "r1"
    rc2, out2 = main(["solve-ball", "--radius", "2", "--out", str(tmp_path / "r2")]), tmp_path / "r2"
    assert rc1 == rc2 == EXIT_OK
    r1 = json.loads((out1 / "report.json").read_text())
    r2 = json.loads((out2 / "report.json").read_text())
    assert r1["lambda"] == pytest.approx(2.84459805720644, rel=1e-10)
    assert r1["Lambda"] == pytest.approx(16 * r1["lambda"])
    assert r2["lambda"] / r1["lambda"] == pytest.approx(1 / 16, rel=1e-9)
    with open(out1 / "radial.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["r", "u", "u_prime", "v", "v_prime", "v_second"]
    assert len(rows) > 100


def test_solve_domain_small_grid(tmp_path):
    rc, out = run(tmp_path, "solve-domain", "--grid-n", "33", "--domain", '{"type": "ball", "R": 1.0}')
    assert rc == EXIT_OK
    report = json.loads((out / "report.json").read_text())
    assert abs(report["lambda_rel_error"]) < 2e-3
    sol = json.loads((out / "solution.json").read_text())
    assert sol["grid_n"] == 33 and len(sol["u"]) == 33 * 33
    assert (out / "spectral.csv").exists()


@pytest.mark.parametrize("args", [
    ["solve-ball", "--radius", "-1"],
    ["solve-domain", "--grid-n", "32"],
    ["solve-domain", "--domain", "{not json"],
    ["solve-domain", "--domain", '{"type": "triangle"}'],
    ["check-derivatives", "--seed", "-1"],
    ["frobnicate"],
])
def test_usage_errors(tmp_path, args):
    rc, _ = run(tmp_path, *args)
    assert rc == EXIT_USAGE


def test_malformed_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"seed": 1, "solve_ball": {"radius": 1.0, "bogus": 2}}')
    rc, _ = run(tmp_path, "solve-ball", "--config", str(cfg))
    assert rc == EXIT_USAGE
    cfg.write_text("[1, 2")
    with pytest.raises(UsageError):
        load_config(str(cfg), {})


def test_config_file_is_read(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"seed": 5, "check_derivatives": {"count": 3}}')
    rc, out = run(tmp_path, "check-derivatives", "--config", str(cfg))
    assert rc == EXIT_OK
    assert json.loads((out / "report.json").read_text())["seed"] == 5


def test_console_script_help():
    proc = subprocess.run([sys.executable, "-m", "cmaeig.cli", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "solve-domain" in proc.stdout
