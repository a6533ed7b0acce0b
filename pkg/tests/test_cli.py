import csv
import json
import os
import subprocess
import sys

import pytest

from delaydiss.cli import (EXIT_CONFIG, EXIT_DIVERGENCE, EXIT_NO_CROSSING, EXIT_OK, EXIT_VERIFY, SWEEP_HEADER,
                           main)

SET1 = ["--I1", "0.8", "--I2", "0.5", "--I3", "0.4", "--alpha", "0.3", "--m", "1.5"]


def _cfg(tmp_path, body, name="run.cfg"):
    path = tmp_path / name
    path.write_text(body)
    return path


RB = """model = rigid_body
I1 = 0.8
I2 = 0.5
I3 = 0.4
alpha = {alpha}
m = 1.5
tau = 0.5
h = 0.01
t_end = {t_end}
initial = {initial}
eps = 0.1
"""


def test_simulate_equilibrium_zero_motion(tmp_path):
    cfg = _cfg(tmp_path, RB.format(alpha=0.0, t_end=5, initial="equilibrium"))
    assert main(["simulate", "--config", str(cfg)]) == EXIT_OK
    summary = json.loads((tmp_path / "run_summary.json").read_text())
    assert summary["schema_version"] == "1.0"
    assert summary["zero_motion"] is True
    assert summary["casimir_drift"] <= 1e-12
    assert (tmp_path / "run.csv").read_text().splitlines()[0] == "t,x1,x2,x3,dx1,dx2,dx3"


def test_simulate_is_deterministic(tmp_path):
    cfg = _cfg(tmp_path, RB.format(alpha=0.3, t_end=5, initial="perturbed"))
    out = []
    for k in range(2):
        csv_path = tmp_path / f"run{k}.csv"
        assert main(["simulate", "--config", str(cfg), "--output-csv", str(csv_path),
                     "--output-json", str(tmp_path / f"s{k}.json")]) == EXIT_OK
        out.append(csv_path.read_bytes())
    assert out[0] == out[1]


def test_simulate_logs_step_adjustment(tmp_path, caplog):
    cfg = _cfg(tmp_path, RB.format(alpha=0.3, t_end=1, initial="perturbed").replace("h = 0.01", "h = 0.003"))
    with caplog.at_level("WARNING"):
        assert main(["simulate", "--config", str(cfg)]) == EXIT_OK
    assert "adjusted" in caplog.text
    summary = json.loads((tmp_path / "run_summary.json").read_text())
    assert summary["h_adjusted"] is True and summary["h"] < 0.003


def test_simulate_config_error(tmp_path, capsys):
    cfg = _cfg(tmp_path, "model = rigidbody\nh = 0.1\nt_end = 1\n")
    assert main(["simulate", "--config", str(cfg)]) == EXIT_CONFIG
    assert "model" in capsys.readouterr().err


def test_simulate_divergence(tmp_path):
    body = "model = circle\nc = 0.5\nh = 0.01\nt_end = 5\ndivergence_guard = 0.1\n"
    cfg = _cfg(tmp_path, body)
    assert main(["simulate", "--config", str(cfg)]) == EXIT_DIVERGENCE
    assert json.loads((tmp_path / "run_summary.json").read_text())["diverged"] is True


def test_analyze_writes_report(tmp_path):
    out = tmp_path / "a.json"
    assert main(["analyze", *SET1, "--output", str(out)]) == EXIT_OK
    doc = json.loads(out.read_text())
    assert doc["spectral"]["residual"] <= 1e-10
    assert doc["hopf"]["beta2"] == 2 * doc["hopf"]["C1"]["re"]
    assert doc["discrepancies"]


def test_analyze_hypothesis_violation(tmp_path, capsys):
    args = ["analyze", "--I1", "0.4", "--I2", "0.5", "--I3", "0.3", "--alpha", "0.3", "--m", "1.5",
            "--output", str(tmp_path / "a.json")]
    assert main(args) == EXIT_CONFIG
    assert "I1 > I2" in capsys.readouterr().err


def test_analyze_no_crossing(tmp_path):
    out = tmp_path / "a.json"
    assert main(["analyze", *SET1, "--tau-max", "0.1", "--output", str(out)]) == EXIT_NO_CROSSING
    assert "root_tracking_evidence" in json.loads(out.read_text())["spectral"]


def test_verify_json_and_fault(tmp_path):
    out = tmp_path / "v.json"
    assert main(["verify", "--output", str(out)]) == EXIT_OK
    assert json.loads(out.read_text())["passed"] is True
    assert main(["verify", "--fault-inject", "structure_constant", "--output", str(out)]) == EXIT_VERIFY
    doc = json.loads(out.read_text())
    assert "algebra.jacobi" in doc["failed"]
    assert main(["verify", "--fault-inject", "nonsense"]) == EXIT_CONFIG


def _read_sweep(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == SWEEP_HEADER
    return [dict(zip(rows[0], r)) for r in rows[1:]]


def test_sweep_single_point_is_simulate_plus_detect(tmp_path):
    cfg = _cfg(tmp_path, RB.format(alpha=0.3, t_end=60, initial="perturbed"))
    out = tmp_path / "s.csv"
    assert main(["sweep", "--config", str(cfg), "--tau-min", "0.3", "--tau-max", "0.3", "--points", "1",
                 "--output", str(out)]) == EXIT_OK
    (row,) = _read_sweep(out)
    assert row["decayed"] == "true" and row["status"] == "equilibrium"


@pytest.mark.slow
def test_sweep_below_hopf_point_all_decay(tmp_path):
    cfg = _cfg(tmp_path, RB.format(alpha=0.3, t_end=100, initial="perturbed"))
    out = tmp_path / "s.csv"
    assert main(["sweep", "--config", str(cfg), "--tau-min", "0.1", "--tau-max", "0.5", "--points", "3",
                 "--workers", "2", "--output", str(out)]) == EXIT_OK
    rows = _read_sweep(out)
    assert [float(r["tau"]) for r in rows] == sorted(float(r["tau"]) for r in rows)
    assert all(r["decayed"] == "true" for r in rows)


def test_sweep_rejects_models_without_delay(tmp_path):
    cfg = _cfg(tmp_path, "model = circle\nc = 0.5\nh = 0.01\nt_end = 5\n")
    assert main(["sweep", "--config", str(cfg), "--tau-min", "0.1", "--tau-max", "0.5", "--points", "3"]) == EXIT_CONFIG


def test_sweep_row_failures_do_not_stop_the_sweep(tmp_path):
    cfg = _cfg(tmp_path, RB.format(alpha=0.3, t_end=5, initial="perturbed") + "divergence_guard = 1.6\n")
    out = tmp_path / "s.csv"
    code = main(["sweep", "--config", str(cfg), "--tau-min", "1.5", "--tau-max", "2.0", "--points", "2",
                 "--workers", "1", "--output", str(out)])
    rows = _read_sweep(out)
    assert len(rows) == 2
    assert code in (EXIT_OK, EXIT_DIVERGENCE)


def test_console_entry_point_runs():
    r = subprocess.run([sys.executable, "-m", "delaydiss", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "simulate" in r.stdout


@pytest.mark.slow
def test_default_demo_config_is_byte_identical(tmp_path):
    cfg = os.path.join(os.path.dirname(__file__), os.pardir, "demos", "rigid_body.cfg")
    blobs = []
    for k in range(2):
        out = tmp_path / f"d{k}.csv"
        assert main(["simulate", "--config", cfg, "--output-csv", str(out),
                     "--output-json", str(tmp_path / f"d{k}.json")]) == EXIT_OK
        blobs.append(out.read_bytes())
    assert blobs[0] == blobs[1]
