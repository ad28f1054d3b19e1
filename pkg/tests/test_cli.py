import csv
import json
import subprocess
import sys

import pytest

from funcmart.cli import main


def run(tmp_path, *args):
    return main([*args, "--out", str(tmp_path / "out")])


def read(tmp_path, name):
    return json.loads((tmp_path / "out" / name).read_text())


def test_residual_exact(tmp_path):
    assert run(tmp_path, "residual", "--func", "linear:c=3", "--equation", "cauchy-additive") == 0
    rep = read(tmp_path, "residual.json")
    assert rep["sup_abs_residual"] == 0 and rep["pass"]


def test_residual_abel_triple(tmp_path):
    args = ["--func", "polynomial:c0=0.5,c2=0.5", "--func", "polynomial:c0=-0.5,c2=0.5", "--func", "affine:a=2,b=1"]
    assert run(tmp_path, "residual", "--equation", "abel", *args) == 0


def test_residual_failure(tmp_path):
    assert run(tmp_path, "residual", "--func", "cubic", "--equation", "quadratic") == 1


def test_martingale_quadratic_drift(tmp_path):
    code = run(tmp_path, "martingale", "--func", "quadratic:lambda=1", "--grid", "0.5,1.0")
    assert code == 1
    pairs = read(tmp_path, "martingale.json")["pairs"]
    const1 = next(p for p in pairs if p["instrument"] == "const1")
    assert (const1["s"], const1["t"]) == (0.5, 1.0)
    assert const1["mean"] == pytest.approx(0.5, abs=0.02)


def test_martingale_linear_passes(tmp_path):
    assert run(tmp_path, "martingale", "--func", "linear:c=2.5") == 0


@pytest.mark.parametrize(
    "args",
    [
        ["martingale", "--func", "linear:c=1", "--paths", "100"],
        ["martingale", "--func", "linear:c=1", "--transform", "log-fofw"],
        ["bernstein", "--func", "linear:c=1", "--paths", "100"],
    ],
)
def test_exit_3_for_samples_or_degenerate(tmp_path, args):
    assert run(tmp_path, *args) == 3


@pytest.mark.parametrize(
    "args",
    [
        ["martingale", "--func", "bogus"],
        ["martingale"],
        ["residual", "--func", "linear:c=1", "--equation", "nope"],
        ["martingale", "--func", "linear:c=1", "--grid", "1.0,0.5"],
        ["martingale", "--func", "linear:c=1", "--seed", "x"],
        ["theorem", "--theorem", "T9"],
        ["theorem"],
        ["martingale", "--func", "linear:c=1", "--config", "/nonexistent.ini"],
        ["emit-plot-data", "--report", "/nonexistent.json"],
        ["simulate", "--label", "Q"],
    ],
)
def test_exit_2_for_config_errors(tmp_path, args):
    assert run(tmp_path, *args) == 2


def test_kernel_transform_needs_two_functions(tmp_path):
    assert run(tmp_path, "martingale", "--transform", "kleft:y=1", "--func", "quadratic:lambda=0.5") == 2
    assert run(tmp_path, "martingale", "--transform", "kleft:y=1", "--func", "quadratic:lambda=0.5",
               "--func", "quadratic:lambda=0.5") == 0


def test_bernstein(tmp_path):
    assert run(tmp_path, "bernstein", "--func", "linear:c=1") == 0
    assert run(tmp_path, "bernstein", "--func", "cubic") == 1
    assert read(tmp_path, "bernstein.json")["statistics"]["z_z2_v2"] > 5


def test_kolmogorov_and_derivative(tmp_path):
    assert run(tmp_path, "kolmogorov", "--func", "quadratic:lambda=1", "--func", "linear:c=1") == 0
    rep = read(tmp_path, "kolmogorov_quadratic.json")
    assert rep["time_invariance"]["defect"] == pytest.approx(0.5, abs=1e-8)
    assert run(tmp_path, "kolmogorov", "--func", "exponential:c=1", "--tolerance", "1e-5") == 0
    assert run(tmp_path, "derivative", "--func", "linear:c=2.5") == 0
    assert run(tmp_path, "derivative", "--func", "quadratic:lambda=1") == 1


def test_simulate_writes_csv(tmp_path):
    assert run(tmp_path, "simulate", "--paths", "4", "--grid", "0.5,1", "--func", "exponential:c=1",
               "--transform", "log-fofw") == 0
    rows = list(csv.reader((tmp_path / "out" / "paths_W.csv").open()))
    proc = list(csv.reader((tmp_path / "out" / "process_W.csv").open()))
    assert rows[0] == ["path_index", "0.5", "1"] and len(rows) == 5
    assert [float(v) for v in proc[1][1:]] == pytest.approx([float(v) for v in rows[1][1:]], abs=1e-15)


def test_theorem_csv_format(tmp_path):
    assert run(tmp_path, "theorem", "--theorem", "A1", "--paths", "20000", "--format", "both") == 0
    out = tmp_path / "out"
    assert (out / "A1.json").exists()
    curves = sorted(p.name for p in (out / "A1").glob("curve_*.csv"))
    assert len(curves) == 5
    rows = list(csv.reader((out / "A1" / curves[0]).open()))
    assert len(rows) == 42
    zs = list(csv.reader((out / "A1" / "zscores.csv").open()))
    assert len(zs) > 1 and zs[0][0] == "candidate"


def test_theorem_with_too_few_paths_exits_3(tmp_path):
    assert run(tmp_path, "theorem", "--theorem", "T2_1", "--paths", "100") == 3


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[run]\nfunc = quadratic:lambda=1\ngrid = 0.5,1.0\npaths = 20000\n")
    assert main(["martingale", "--config", str(cfg), "--out", str(tmp_path / "a")]) == 1
    assert main(["martingale", "--config", str(cfg), "--func", "linear:c=1", "--out", str(tmp_path / "b")]) == 0
    bad = tmp_path / "bad.ini"
    bad.write_text("[run]\ncolour = blue\n")
    assert main(["martingale", "--config", str(bad)]) == 2


def test_persisted_config_reproduces_run(tmp_path):
    assert main(["theorem", "--theorem", "T5_1", "--theorem", "A2", "--paths", "20000",
                 "--out", str(tmp_path / "a")]) == 0
    ini = tmp_path / "a" / "run.ini"
    assert main(["theorem", "--config", str(ini), "--out", str(tmp_path / "b")]) == 0
    for name in ("T5_1.json", "A2.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_emit_plot_data_command(tmp_path):
    assert run(tmp_path, "martingale", "--func", "linear:c=1", "--grid", "0.5,1.0") == 0
    report = tmp_path / "out" / "martingale.json"
    assert main(["emit-plot-data", "--report", str(report), "--out", str(tmp_path / "plots")]) == 0
    rows = list(csv.reader((tmp_path / "plots" / "martingale" / "zscores.csv").open()))
    assert len(rows) == 1 + 5  # one pair, five instruments


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "funcmart", "residual", "--func", "linear:c=3", "--equation", "cauchy-additive",
         "--out", str(tmp_path)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "PASS" in proc.stdout
