import json
from pathlib import Path

import numpy as np
import pytest

from sunladder.cli import main
from sunladder.dataio import read_csv, read_columns, read_correlation_csv


def run_cli(args):
    return main(list(args))


def test_coupling_grid(tmp_path, capsys):
    out = tmp_path / "coupling"
    rc = run_cli(["coupling", "-o", str(out),
                  "--set", "coupling.V=[10.0, 20.0]"])
    assert rc == 0
    header, rows = read_csv(out / "coupling.csv")
    assert header[:5] == ["t", "U", "V", "N", "J"]
    assert len(rows) == 2
    # (1, 10, 10, 3) -> J = 0.1, AF
    assert float(rows[0][4]) == pytest.approx(0.1)
    assert rows[0][5] == "true"
    # V = U(N-1) = 20 is a pole row, marked but not fatal
    assert rows[1][7] == "true"
    assert (out / "config.json").exists()


def test_coupling_n2_literal(tmp_path):
    out = tmp_path / "c2"
    rc = run_cli(["coupling", "-o", str(out), "--set", "coupling.n_colors=[2]",
                  "--set", "coupling.t=[1.0]", "--set", "coupling.U=[2.0]",
                  "--set", "coupling.V=[0.5]"])
    assert rc == 0
    (j,) = read_columns(out / "coupling.csv", "J")
    assert j[0] == pytest.approx(1.0 * 2.0 / ((-0.5 - 2.0) * (0.5 - 2.0)))


def test_validation_error_exit_code(tmp_path):
    rc = run_cli(["spectrum", "-o", str(tmp_path / "x"),
                  "--set", "geometry.length=0"])
    assert rc == 1


def test_unknown_key_rejected(tmp_path):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("geometry:\n  length: 6\n  twist: 3\n")
    rc = run_cli(["spectrum", "-c", str(cfg), "-o", str(tmp_path / "x")])
    assert rc == 1


def test_wrong_experiment_in_config(tmp_path):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("experiment: quench\n")
    rc = run_cli(["spectrum", "-c", str(cfg), "-o", str(tmp_path / "x")])
    assert rc == 1


def test_spectrum_small_chain(tmp_path):
    out = tmp_path / "spec"
    rc = run_cli(["spectrum", "-o", str(out),
                  "--set", "geometry.length=6",
                  "--set", "spectrum.tau_points=5"])
    assert rc == 0
    taus, e0, e1, gap = read_columns(out / "spectrum.csv", "tau", "E0", "E1", "gap")
    assert len(taus) == 5
    assert e0[0] == pytest.approx(-16.0, abs=1e-8)
    assert gap[0] == pytest.approx(6.0, abs=1e-7)
    meta = json.loads((out / "metadata.json").read_text())
    assert meta["min_gap"] > 0


def test_spectrum_default_grid_row_count(tmp_path):
    # default config has 21 tau points; use a tiny chain to keep it fast
    out = tmp_path / "spec21"
    rc = run_cli(["spectrum", "-o", str(out), "--set", "geometry.length=4"])
    assert rc == 0
    header, rows = read_csv(out / "spectrum.csv")
    assert len(rows) == 21


def test_quench_zero_time(tmp_path):
    out = tmp_path / "q0"
    rc = run_cli(["quench", "-o", str(out),
                  "--set", "quench.t_max=0.0",
                  "--set", "geometry.length=6"])
    assert rc == 0
    ts, ds = read_columns(out / "quench_total.csv", "t", "D")
    assert len(ts) == 1
    assert ds[0] == pytest.approx(3 * 16 / 3, abs=1e-9)
    meta = json.loads((out / "metadata.json").read_text())
    assert meta["norm_drift"] < 1e-6


def test_quench_rejects_odd_length(tmp_path):
    rc = run_cli(["quench", "-o", str(tmp_path / "x"),
                  "--set", "geometry.length=7"])
    assert rc == 1


def test_quench_short_run_files(tmp_path):
    out = tmp_path / "q"
    rc = run_cli(["quench", "-o", str(out),
                  "--set", "geometry.length=6",
                  "--set", "quench.t_max=1.0"])
    assert rc == 0
    header, rows = read_csv(out / "quench_bonds.csv")
    assert header == ["t"] + [f"bond_{b}" for b in range(5)]
    assert len(rows) == 21
    meta = json.loads((out / "metadata.json").read_text())
    assert meta["energy_drift"] < 1e-6


def test_xi_insufficient_points_note(tmp_path):
    out = tmp_path / "xi1"
    rc = run_cli(["xi", "-o", str(out),
                  "--set", "geometry.length=16",
                  "--set", "geometry.legs=[2]",
                  "--set", "physics.beta=2.0",
                  "--set", "qmc.sweeps=600",
                  "--set", "qmc.thermalization=200",
                  "--set", "qmc.bins=20"])
    assert rc == 0
    header, rows = read_csv(out / "fit_report.csv")
    assert header == ["note"]
    assert "insufficient points" in rows[0][0]
    corr = read_correlation_csv(out / "corr_n2.csv")
    assert corr.length == 16
    assert corr.values[0] == pytest.approx(1.0)


def test_xi_byte_identical_reruns(tmp_path):
    args = lambda out: ["xi", "-o", str(out),
                        "--set", "geometry.length=16",
                        "--set", "geometry.legs=[2]",
                        "--set", "physics.beta=2.0",
                        "--set", "qmc.sweeps=500",
                        "--set", "qmc.thermalization=100",
                        "--set", "qmc.bins=20",
                        "--seed", "5"]
    assert run_cli(args(tmp_path / "a")) == 0
    assert run_cli(args(tmp_path / "b")) == 0
    for name in ("xi.csv", "corr_n2.csv", "fit_report.csv", "xi_long.csv"):
        a = (tmp_path / "a" / name).read_bytes()
        b = (tmp_path / "b" / name).read_bytes()
        assert a == b, name


def test_defect_sweep_shapes(tmp_path):
    out = tmp_path / "ds"
    rc = run_cli(["defect-sweep", "-o", str(out),
                  "--set", "geometry.length=12",
                  "--set", "geometry.legs=2",
                  "--set", "physics.beta=1.5",
                  "--set", "qmc.sweeps=500",
                  "--set", "qmc.thermalization=100",
                  "--set", "qmc.bins=10",
                  "--set", "defects.concentrations=[0.0, 0.05]",
                  "--set", "defects.realizations=2"])
    assert rc == 0
    header, rows = read_csv(out / "defect_sweep.csv")
    assert len(rows) == 2  # one row per concentration at this n
    header, rrows = read_csv(out / "realizations.csv")
    assert len(rrows) == 4
    meta = json.loads((out / "metadata.json").read_text())
    assert "0.05" in meta["ensembles"]
    # disorder realization files exist and round-trip
    files = sorted((out / "disorder").glob("*.txt"))
    assert len(files) == 4
    from sunladder.lattice import load_realization

    g, real = load_realization(files[-1])
    assert g.length == 12


def test_output_root_env(tmp_path, monkeypatch):
    monkeypatch.setenv("SUNLADDER_OUTPUT_ROOT", str(tmp_path))
    rc = run_cli(["coupling", "-o", "nested/coupling"])
    assert rc == 0
    assert (tmp_path / "nested/coupling/coupling.csv").exists()


def test_config_file_plus_flag_override(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text(
        "geometry: {length: 6, legs: 1, boundary_x: open}\n"
        "spectrum: {tau_points: 3}\n"
        "output: %s\n" % (tmp_path / "from_config")
    )
    out_flag = tmp_path / "from_flag"
    rc = run_cli(["spectrum", "-c", str(cfg), "-o", str(out_flag)])
    assert rc == 0
    assert (out_flag / "spectrum.csv").exists()  # flag wins
    assert not (tmp_path / "from_config").exists()
    resolved = json.loads((out_flag / "config.json").read_text())
    assert resolved["geometry"]["length"] == 6
    assert resolved["output"] == str(out_flag)
