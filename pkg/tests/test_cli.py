import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from diracred import cli


def _cfg(tmp_path, name="cfg.json", **d):
    p = tmp_path / name
    p.write_text(json.dumps(d))
    return str(p)


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


CP = {"system": "charged_particle", "T": 20, "N": 100}


def test_simulate_charged_particle(tmp_path, capsys):
    cfg = _cfg(tmp_path, **CP, outputs={"csv_path": "cp.csv", "diagnostics": True})
    assert cli.main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "cp.csv")
    assert rows[0] == ["k", "t", "x1", "x2", "x3", "g_abs1", "w1", "w2", "w3", "mu1", "E_d", "struct_residual", "newton_iters"]
    assert len(rows) == 1 + 101
    assert rows[-1][-3:] == ["", "", ""]
    assert rows[51][0] == "50" and float(rows[51][1]) == pytest.approx(10.0)
    assert max(float(r[11]) for r in rows[1:-1]) <= 1e-9
    assert "momentum drift: 0.000e+00" in capsys.readouterr().out
    raw = (tmp_path / "cp.csv").read_bytes()
    assert b"\r" not in raw
    # 17 significant digits round-trip every float exactly
    assert float(rows[10][2]) == float(format(float(rows[10][2]), ".17g"))


def test_simulate_is_deterministic(tmp_path):
    outs = []
    for i in range(2):
        d = tmp_path / f"run{i}"
        cfg = _cfg(tmp_path, f"c{i}.json", **CP, outputs={"svg_path": "e.svg"})
        assert cli.main(["simulate", "--config", cfg, "--out", str(d)]) == 0
        outs.append(d)
    for name in ("trajectory.csv", "e.svg", "e_x1.svg"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


def test_simulate_writes_svgs(tmp_path):
    cfg = _cfg(tmp_path, **CP, outputs={"svg_path": "plot.svg"})
    assert cli.main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == 0
    for name in ("plot.svg", "plot_x1.svg", "plot_x2.svg", "plot_x3.svg"):
        assert (tmp_path / name).read_text().lstrip().startswith("<?xml")


def test_simulate_minus_variant_and_connection(tmp_path):
    a = _cfg(tmp_path, "a.json", **CP, outputs={"csv_path": "a.csv"})
    b = _cfg(tmp_path, "b.json", **CP, variant="minus", connection={"type": "matrix", "H": [[0.3, -0.5, 0.7]]}, outputs={"csv_path": "b.csv"})
    assert cli.main(["simulate", "--config", a, "--out", str(tmp_path)]) == 0
    assert cli.main(["simulate", "--config", b, "--out", str(tmp_path)]) == 0
    ra, rb = _rows(tmp_path / "a.csv"), _rows(tmp_path / "b.csv")
    # shape coordinates are connection independent
    xa = np.array([[float(v) for v in r[2:5]] for r in ra[1:]])
    xb = np.array([[float(v) for v in r[2:5]] for r in rb[1:]])
    np.testing.assert_allclose(xa, xb, atol=1e-9)


def test_solver_failure_truncates(tmp_path, capsys):
    cfg = _cfg(tmp_path, **CP, solver={"max_iter": 1})
    assert cli.main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == 3
    rows = _rows(tmp_path / "trajectory.csv")
    assert rows[-1][0] == "#truncated"
    assert "solver failure" in capsys.readouterr().err


@pytest.mark.parametrize("bad", [
    {"system": "nope", "T": 1, "N": 1},
    {"system": "charged_particle", "T": 1},
    {"system": "charged_particle", "T": -1, "N": 5},
    {"system": "charged_particle", "T": 1, "N": 0},
    {"system": "charged_particle", "T": 1, "N": 5, "extra": 1},
    {"system": "charged_particle", "T": 1, "N": 5, "params": {"q": 1}},
    {"system": "charged_particle", "T": 1, "N": 5, "params": {"m": -1}},
    {"system": "charged_particle", "T": 1, "N": 5, "initial": {"x0": [1, 2]}},
    {"system": "charged_particle", "T": 1, "N": 5, "solver": {"tol": 0}},
    {"system": "charged_particle", "T": 1, "N": 5, "variant": "sideways"},
    {"system": "charged_particle", "T": 1, "N": 5, "connection": {"type": "matrix", "H": [[1, 2]]}},
    {"system": "double_pendulum", "T": 1, "N": 5, "initial": {"x0": [0, 1, 1]}},
    {"system": "custom-linear", "T": 1, "N": 5, "params": {"M": [[1, 0], [0, 1]]}},
])
def test_config_errors(tmp_path, bad):
    cfg = _cfg(tmp_path, **bad)
    assert cli.main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == 2


def test_unreadable_paths(tmp_path):
    assert cli.main(["simulate", "--config", str(tmp_path / "missing.json")]) == 2
    (tmp_path / "bad.json").write_text("{not json")
    assert cli.main(["simulate", "--config", str(tmp_path / "bad.json")]) == 2
    (tmp_path / "file").write_text("")
    cfg = _cfg(tmp_path, **CP)
    assert cli.main(["simulate", "--config", cfg, "--out", str(tmp_path / "file" / "sub")]) == 2
    cfg = _cfg(tmp_path, "c2.json", **CP, outputs={"csv_path": "no/such/dir.csv"})
    assert cli.main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == 2


def test_converge_table(tmp_path):
    cfg = _cfg(tmp_path, **CP)
    assert cli.main(["converge", "--config", cfg, "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "convergence.csv")
    assert rows[0] == ["N", "error", "observed_order"]
    assert [r[0] for r in rows[1:]] == ["10", "50", "100", "200"]
    for r, want in zip(rows[1:], (1.6781, 0.25971, 0.06626, 0.01664)):
        assert float(r[1]) == pytest.approx(want, rel=5e-3)
    assert rows[1][2] == ""
    assert 1.9 <= float(rows[4][2]) <= 2.1


def test_converge_single_and_validation(tmp_path):
    cfg = _cfg(tmp_path, **CP, converge={"Ns": [40]})
    assert cli.main(["converge", "--config", cfg, "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "convergence.csv")
    assert len(rows) == 2 and rows[1][2] == ""
    cfg = _cfg(tmp_path, "b.json", **CP, converge={"Ns": [10, 0]})
    assert cli.main(["converge", "--config", cfg, "--out", str(tmp_path)]) == 2
    cfg = _cfg(tmp_path, "c.json", system="double_pendulum", T=1, N=10)
    assert cli.main(["converge", "--config", cfg, "--out", str(tmp_path)]) == 2


def test_converge_preserves_input_order(tmp_path):
    cfg = cli.RunConfig.from_dict(dict(CP))
    rows = cli.converge(cfg, [200, 10, 100])
    assert [r[0] for r in rows] == [200, 10, 100]
    assert rows[1][1] == pytest.approx(1.6781, rel=5e-3)


def test_compare_pendulum(tmp_path):
    cfg = _cfg(tmp_path, system="double_pendulum", T=1, N=100)
    assert cli.main(["compare", "--config", cfg, "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "compare.csv")
    assert rows[0] == ["k", "t", "max_deviation", "energy_deviation"]
    assert len(rows) == 102
    assert max(float(r[2]) for r in rows[1:]) <= 1e-8
    assert max(float(r[3]) for r in rows[1:-1]) <= 1e-8
    timing = _rows(tmp_path / "compare_timing.csv")
    assert timing[0] == ["method", "steps", "seconds"]
    assert [r[0] for r in timing[1:]] == ["reduced", "unreduced"]
    first = (tmp_path / "compare.csv").read_bytes()
    assert cli.main(["compare", "--config", cfg, "--out", str(tmp_path)]) == 0
    assert (tmp_path / "compare.csv").read_bytes() == first


def test_check_passes(tmp_path, capsys):
    cfg = _cfg(tmp_path, system="custom-linear", T=1, N=10, params={"seed": 3}, check={"n_random": 3, "steps": 10})
    assert cli.main(["check", "--config", cfg, "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out
    rows = _rows(tmp_path / "check.csv")
    assert rows[0] == ["check", "value", "tol", "passed"]
    assert all(r[3] == "1" for r in rows[1:])


def test_check_reports_failures(tmp_path, capsys):
    cfg = _cfg(tmp_path, **CP, solver={"max_iter": 1}, check={"n_random": 1, "steps": 5})
    assert cli.main(["check", "--config", cfg, "--out", str(tmp_path)]) == 4
    assert "FAIL  charged_particle: run completed" in capsys.readouterr().out
    cfg = _cfg(tmp_path, "b.json", **CP, check={"bogus": 1})
    assert cli.main(["check", "--config", cfg, "--out", str(tmp_path)]) == 2


def test_custom_linear_explicit(tmp_path):
    cfg = _cfg(
        tmp_path, system="custom-linear", T=1, N=20,
        params={"M": [[2, 0.3, 0], [0.3, 1, 0.1], [0, 0.1, 1]], "K": [[1, 0], [0, 2]], "H": [[0.5, -0.2]], "beta": 0.1},
        initial={"w0": [0.2, -0.1], "mu0": [0.4]},
    )
    assert cli.main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "trajectory.csv")
    assert len(rows) == 22
    assert {r[7] for r in rows[1:]} == {"0.40000000000000002"}


def test_fmt():
    assert cli.fmt(float("nan")) == ""
    assert cli.fmt(3) == "3"
    assert cli.fmt(0.1) == "0.10000000000000001"


def test_module_entry_point(tmp_path):
    cfg = _cfg(tmp_path, **dict(CP, N=10))
    r = subprocess.run([sys.executable, "-m", "diracred", "simulate", "--config", cfg, "--out", str(tmp_path)], capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    r = subprocess.run([sys.executable, "-m", "diracred", "bogus"], capture_output=True, text=True)
    assert r.returncode == 2
