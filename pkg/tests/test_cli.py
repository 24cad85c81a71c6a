import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from roughheston.cli import main

ROOT = Path(__file__).resolve().parents[1]
FIXTURE = ROOT / "tests" / "fixtures" / "cf_paper_params.csv"
CONFIG = ROOT / "configs" / "paper_params.ini"


def _rows(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return lines[0], np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]])


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cf_matches_committed_fixture(capsys):
    code, out, _ = _run(capsys, "cf", "--config", str(CONFIG))
    assert code == 0
    head, rows = _rows(out)
    fhead, frows = _rows(FIXTURE.read_text())
    assert head == fhead == "a,t,re_cf,im_cf"
    assert np.allclose(rows, frows, rtol=1e-12, atol=1e-14)


def test_output_is_byte_identical_across_runs(capsys):
    first = _run(capsys, "cf", "--a", "0.5,-1", "--t", "0.3", "--steps", "200")[1]
    second = _run(capsys, "cf", "--a", "0.5,-1", "--t", "0.3", "--steps", "200")[1]
    assert first == second
    assert "# model.alpha = 0.6" in first and "# program = roughheston" in first


def test_flags_override_config_file(capsys):
    out = _run(capsys, "cf", "--config", str(CONFIG), "--alpha", "0.75", "--a", "1", "--t", "1")[1]
    assert "# model.alpha = 0.75" in out


def test_alpha_one_agrees_with_heston_oracle(capsys):
    args = ("cf", "--alpha", "1", "--a=-2,1,3", "--t", "1", "--steps", "2000")
    _, rough = _rows(_run(capsys, *args)[1])
    _, closed = _rows(_run(capsys, *args, "--oracle", "heston")[1])
    assert np.max(np.abs(rough - closed)) < 1e-6


def test_price_and_skew_files(tmp_path, capsys):
    code, out, _ = _run(capsys, "price", "--strikes", "0.9,1.1", "--maturity", "0.5", "--steps", "300", "--out", str(tmp_path))
    assert code == 0 and "wrote" in out
    head, rows = _rows((tmp_path / "price.csv").read_text())
    assert head == "maturity,strike,price,implied_vol" and rows.shape == (2, 4)
    code, _, _ = _run(capsys, "skew", "--maturities", "0.1,1", "--steps", "300", "--out", str(tmp_path))
    head, rows = _rows((tmp_path / "skew.csv").read_text())
    assert head == "maturity,atm_skew_alpha=1.0,atm_skew_alpha=0.6"
    assert abs(rows[0, 2]) > abs(rows[0, 1])


def test_smile_grid(capsys):
    code, out, _ = _run(capsys, "smile", "--maturities", "0.25,1", "--strikes", "0.9,1", "--steps", "200")
    _, rows = _rows(out)
    assert code == 0 and rows.shape == (4, 4)


def test_hawkes_summary_json(tmp_path, capsys):
    code, _, _ = _run(capsys, "hawkes", "--paths", "200", "--horizons", "25", "--seed", "4", "--steps", "200", "--out", str(tmp_path))
    report = json.loads((tmp_path / "hawkes.json").read_text())
    assert code == 0
    run = report["runs"][0]
    assert run["master_seed"] == 4 and run["n_paths"] == 200
    assert {row["a"] for row in run["empirical_cf"]} == {0.5, 1.0}
    assert all(row["se"] > 0 for row in run["empirical_cf"])
    assert report["metadata"]["hawkes.seed"] == 4


def test_validate_echoes_overrides_and_writes_json(tmp_path, capsys):
    code, out, _ = _run(capsys, "validate", "--only", "4", "--tol", "trivial=1e-13", "--out", str(tmp_path))
    assert code == 0
    assert "# tolerance.trivial = 1e-13 (override)" in out
    assert "criterion 4 [PASS]" in out
    report = json.loads((tmp_path / "validate.json").read_text())
    assert report["overrides"] == {"trivial": 1e-13} and report["results"][0]["passed"]


def test_validate_fails_with_impossible_tolerance(capsys):
    code, out, _ = _run(capsys, "validate", "--only", "1", "--tol", "alpha_one_gate=1e-15")
    assert code == 1 and "[FAIL]" in out


@pytest.mark.parametrize(
    "argv",
    [
        ["cf", "--rho", "1.5"],
        ["validate", "--tol", "no_such_key=1"],
        ["cf", "--config", "/nonexistent.ini"],
        ["price", "--strikes", "-1"],
    ],
)
def test_errors_exit_nonzero(argv, capsys):
    code, _, err = _run(capsys, *argv)
    assert code == 2 and err.startswith("error:")


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "roughheston", "cf", "--a", "0", "--t", "1", "--steps", "20"],
        capture_output=True, text=True, check=False,
    )
    assert res.returncode == 0 and res.stdout.rstrip().endswith("0.0,1.0,1.0,0.0")
