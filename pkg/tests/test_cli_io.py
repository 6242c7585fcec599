import json
import os
import subprocess
import sys

import pytest

from foliated_link.cli import run
from foliated_link.io import GRID_COLUMNS, read_csv, render_csv, write_csv
from foliated_link.montecarlo import steane_single_hop_etr

from conftest import FIXTURES


@pytest.fixture
def cwd(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def test_code_gb(cwd, capsys):
    rc = run(["code", "gb", "--ell", "24", "--a", "0,2,8,15", "--b", "0,2,12,17", "--out", "gb48.json"])
    assert rc == 0
    report = json.loads(capsys.readouterr().out)
    assert report["k"] == 6
    assert json.loads((cwd / "gb48.json").read_text())["n"] == 48


def test_code_degenerate_is_domain_error(cwd, capsys):
    assert run(["code", "gb", "--ell", "2", "--a", "0", "--b", "0"]) == 1
    assert "no logical qubits" in capsys.readouterr().err


def test_argument_errors_exit_2(cwd, capsys):
    assert run([]) == 2
    assert run(["simulate", "--code", "steane", "--hops", "0", "--l0-km", "1"]) == 2
    assert run(["simulate", "--code", "steane", "--hops", "1", "--l0-km", "1", "--eta-r", "1.5"]) == 2
    assert run(["sweep", "--code", "steane", "--hops", "1", "--out", "x.csv"]) == 2
    assert "usage" in capsys.readouterr().err


def test_missing_code_file_exit_1(cwd):
    assert run(["simulate", "--code", "nope.json", "--hops", "1", "--l0-km", "1"]) == 1


def test_simulate_break_even_and_determinism(cwd):
    args = ["simulate", "--code", str(FIXTURES / "steane.json"), "--hops", "1", "--eta-r", "1.0",
            "--l0-km", "15.05", "--trials", "200000", "--seed", "7"]
    assert run(args + ["--out", "a.json"]) == 0
    assert run(args + ["--out", "b.json"]) == 0
    a = (cwd / "a.json").read_bytes()
    assert a == (cwd / "b.json").read_bytes()
    res = json.loads(a)
    target = steane_single_hop_etr(10 ** (-0.2 * 15.05 / 10))
    assert abs(res["eta_eff"] - target) <= 3 * res["stderr"]


def test_foliate_and_decode(cwd, capsys):
    assert run(["foliate", "--code", "steane", "--hops", "1", "--dump", "chain.json"]) == 0
    assert json.loads(capsys.readouterr().out)["total_qubits"] == 30
    assert run(["decode", "--chain", "chain.json", "--erasure", "0,1,3"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["success"] and out["primal"]["witness"]["0"]
    assert run(["decode", "--chain", "chain.json", "--erasure", "0,1,2", "--decoder", "greedy"]) == 0
    assert json.loads(capsys.readouterr().out)["primal"]["recoverable"] == []
    assert run(["decode", "--chain", "chain.json", "--erasure", "99"]) == 1


def test_sweep_loss_grid_matches_closed_form(cwd):
    losses = ",".join(f"{x / 10:g}" for x in range(10))
    assert run(["sweep", "--code", "steane", "--hops", "1", "--loss", losses,
                "--trials", "20000", "--out", "sweep.csv"]) == 0
    rows, meta = read_csv(cwd / "sweep.csv")
    assert len(rows) == 10 and meta["n"] == "7"
    for r in rows:
        eta = 10 ** (-0.2 * r["l0_km"] / 10)
        assert abs(r["eta_eff"] - steane_single_hop_etr(eta)) <= 3 * r["stderr"] + 1e-12
    assert run(["plot", "--kind", "loss-tolerance", "--in", "sweep.csv", "--out", "fig3.svg"]) == 0
    svg = (cwd / "fig3.svg").read_text()
    assert svg.startswith("<svg") and "direct" in svg and "single-photon loss" in svg


def test_sweep_resume_is_byte_identical(cwd):
    base = ["sweep", "--code", "toric2", "--l0-km", "2,6", "--eta-r", "0.9", "--trials", "500"]
    assert run(base + ["--hops", "1:3", "--out", "full.csv"]) == 0
    assert run(base + ["--hops", "1,3", "--out", "part.csv"]) == 0
    assert run(base + ["--hops", "1:3", "--out", "part.csv"]) == 0
    full = (cwd / "full.csv").read_text().splitlines()
    part = (cwd / "part.csv").read_text().splitlines()
    body = lambda lines: [l for l in lines if not l.startswith("#")]
    assert body(full) == body(part)


def test_empty_sweep_is_header_only(cwd):
    assert run(["sweep", "--code", "steane", "--hops", "1", "--l0-km", "", "--out", "e.csv"]) == 0
    rows, _ = read_csv(cwd / "e.csv")
    assert rows == []
    assert ",".join(GRID_COLUMNS) in (cwd / "e.csv").read_text()


def test_unwritable_output_exit_1(cwd):
    assert run(["sweep", "--code", "steane", "--hops", "1", "--l0-km", "1",
                "--trials", "10", "--out", "missing/dir/x.csv"]) == 1


def test_fit_optimize_plot_pipeline(cwd):
    assert run(["sweep", "--code", "toric3", "--hops", "2:6", "--eta-r", "0.95",
                "--l0-km", "1,2,3", "--trials", "2000", "--out", "grid.csv"]) == 0
    assert run(["fit", "--in", "grid.csv", "--out", "alpha.csv"]) == 0
    rows, meta = read_csv(cwd / "alpha.csv")
    assert [r["l0_km"] for r in rows] == [1.0, 2.0, 3.0]
    assert meta["n"] == "18" and meta["n_min"] == "2"
    assert run(["optimize", "--grid", "alpha.csv", "--distance-km", "10,100", "--out", "opt.csv"]) == 0
    opt, _ = read_csv(cwd / "opt.csv")
    assert [r["distance_km"] for r in opt] == [10.0, 100.0]
    assert all(1.0 <= r["l0_km"] <= 3.0 for r in opt)
    for kind, src in (("attenuation", "alpha.csv"), ("optimization", "opt.csv")):
        assert run(["plot", "--kind", kind, "--in", src, "--out", f"{kind}.svg"]) == 0
        assert "<polyline" in (cwd / f"{kind}.svg").read_text()


def test_optimize_outside_grid_exit_1(cwd):
    write_csv(cwd / "a.csv", ["code", "eta_r", "l0_km", "alpha_eff_db_per_km", "log10_prefactor", "rms_residual"],
              [{"code": "g", "eta_r": 0.9, "l0_km": 1.0, "alpha_eff_db_per_km": 0.0, "log10_prefactor": 0.0,
                "rms_residual": 0.0}, {"code": "g", "eta_r": 0.9, "l0_km": 2.0, "alpha_eff_db_per_km": 0.0,
                "log10_prefactor": 0.0, "rms_residual": 0.0}])
    assert run(["optimize", "--grid", "a.csv", "--distance-km", "10", "--n-max", "3", "--out", "o.csv"]) == 1


def test_csv_roundtrip(tmp_path):
    rows = [{"code": "x", "eta_r": 0.1 + 0.2, "l0_km": 1e-7, "hops": 3, "trials": 10, "seed": 2**63,
             "p_primal": 1 / 3, "p_dual": 1.0, "eta_eff": 1 / 3, "stderr": 0.0}]
    write_csv(tmp_path / "r.csv", GRID_COLUMNS, rows, {"n": 7})
    back, meta = read_csv(tmp_path / "r.csv")
    assert back == rows and meta["n"] == "7"
    assert render_csv(GRID_COLUMNS, rows) == render_csv(GRID_COLUMNS, back)


def test_module_entry_point(tmp_path):
    env = dict(os.environ, FOLIATED_LINK_THREADS="1")
    out = subprocess.run([sys.executable, "-m", "foliated_link", "code", "toric", "--d", "2"],
                         capture_output=True, text=True, cwd=tmp_path, env=env)
    assert out.returncode == 0
    assert json.loads(out.stdout)["k"] == 2
