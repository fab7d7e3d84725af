import filecmp
import os
import subprocess
import sys

import pytest

from polyflow.cli import main
from polyflow.io import read_table

BASE = """flow.kind = polyharmonic
flow.m = 0
flow.modes = 16
flow.dt = 1e-3
flow.t_end = 0.1
initial.amplitude = 0.2
output.record_every = 10
output.snapshot_every = 50
output.snapshot_samples = 33
"""


def cfg_file(tmp_path, extra="", name="run.cfg"):
    p = tmp_path / name
    p.write_text(BASE + extra)
    return str(p)


def run(*argv):
    return main([str(a) for a in argv])


def test_simulate_outputs(tmp_path, capsys):
    out = tmp_path / "o"
    assert run("simulate", "--config", cfg_file(tmp_path), "--out", out) == 0
    names = sorted(os.listdir(out))
    for n in ("series.csv", "summary.txt", "checkpoint_final.txt", "snapshot_final.csv",
              "snapshot_0000.csv", "snapshot_0002.csv", "checkpoint_0001.txt"):
        assert n in names
    cols, rows = read_table(str(out / "series.csv"))
    assert cols[0] == "step" and [r[0] for r in rows] == list(range(0, 101, 10))
    assert "termination ReachedTEnd" in capsys.readouterr().out


def test_zero_amplitude_run_is_flat(tmp_path):
    out = tmp_path / "o"
    assert run("simulate", "--config", cfg_file(tmp_path, "initial.amplitude = 0\n"), "--out", out) == 0
    cols, rows = read_table(str(out / "series.csv"))
    for name in ("l2_k", "energy", "x_defect", "theta_defect", "dLdt_defect", "dEdt_defect"):
        j = cols.index(name)
        assert all(r[j] == 0.0 for r in rows)


def test_blowup_exit_code(tmp_path):
    extra = ("flow.kind = gradient\nflow.scheme = etd1\nflow.dt = 0.1\nflow.t_end = 5\n"
             "initial.amplitude = 10\noutput.record_every = 1\noutput.snapshot_every = 1000\n")
    assert run("simulate", "--config", cfg_file(tmp_path, extra), "--out", tmp_path / "o") == 2


def test_errors_exit_one(tmp_path, capsys):
    assert run("simulate", "--config", tmp_path / "missing.cfg") == 1
    assert "polyflow: error:" in capsys.readouterr().err
    assert run("simulate", "--config", cfg_file(tmp_path, "flow.nope = 1\n")) == 1
    assert run("simulate", "--config", cfg_file(tmp_path), "--modes", 12) == 1


def test_resume_byte_identical(tmp_path):
    cfg = cfg_file(tmp_path)
    full, part = tmp_path / "full", tmp_path / "part"
    assert run("simulate", "--config", cfg, "--out", full) == 0
    assert run("simulate", "--config", cfg, "--out", part, "--t-end", 0.05) == 0
    assert run("simulate", "--config", cfg, "--out", part, "--resume",
               part / "checkpoint_0001.txt") == 0
    for n in ("series.csv", "checkpoint_final.txt", "snapshot_final.csv", "snapshot_0002.csv"):
        assert filecmp.cmp(full / n, part / n, shallow=False), n


def test_resume_mismatch_rejected(tmp_path):
    cfg = cfg_file(tmp_path)
    out = tmp_path / "o"
    run("simulate", "--config", cfg, "--out", out)
    assert run("simulate", "--config", cfg, "--out", out, "--m", 1, "--resume",
               out / "checkpoint_final.txt") == 1


def test_deterministic(tmp_path):
    cfg = cfg_file(tmp_path)
    run("simulate", "--config", cfg, "--out", tmp_path / "a")
    run("simulate", "--config", cfg, "--out", tmp_path / "b")
    assert filecmp.cmp(tmp_path / "a" / "series.csv", tmp_path / "b" / "series.csv", shallow=False)


def test_check_subcommands(capsys):
    assert run("check-parity") == 0
    assert run("check-psw", "--trials", 50) == 0
    assert run("check-variation", "--states", 1, "--m", 1) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.count("PASS") > 30


def test_convergence_study(capsys):
    assert run("convergence-study") == 0
    assert "PASS spectral accuracy" in capsys.readouterr().out


def test_sweep(tmp_path):
    extra = "sweep.amplitudes = 0.05, 0.1\nflow.t_end = 0.5\nsweep.workers = 2\n"
    assert run("sweep", "--config", cfg_file(tmp_path, extra), "--out", tmp_path / "sw") == 0
    cols, rows = read_table(str(tmp_path / "sw" / "sweep.csv"))
    assert cols == ["amplitude", "verdict", "l2_k_ratio"]
    assert [r[1] for r in rows] == ["converged", "converged"]


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "polyflow", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "simulate" in r.stdout


def test_linear_regime_summary_reports_decay(tmp_path):
    cfg = cfg_file(tmp_path, "initial.amplitude = 0.1\nflow.t_end = 1.0\n")
    out = tmp_path / "o"
    assert run("simulate", "--config", cfg, "--out", out) == 0
    lines = dict(ln.split(" ", 1) for ln in (out / "summary.txt").read_text().splitlines())
    words = lines["decay_l2_k"].split()
    rate, r2 = float(words[1]), float(words[3])
    assert r2 > 0.999
    assert rate == pytest.approx(float(lines["linearized_rate"]), rel=0.1)
