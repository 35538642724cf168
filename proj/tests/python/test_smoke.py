import math
import os
import subprocess
from pathlib import Path

import numpy as np
import pytest

import chemolimit as cl
from chemolimit.report import parse_report, read_report

EXE = os.environ.get("CHEMO_LIMIT_EXE")
CONFIGS = Path(os.environ.get("CHEMO_CONFIG_DIR", Path(__file__).resolve().parents[2] / "configs"))


def test_grid_and_quadrature():
    g = cl.Grid.interval(1.0, 101)
    assert g.size == 101
    assert cl.integrate(g, np.ones(g.size)) == pytest.approx(1.0, abs=1e-15)
    ball = cl.Grid.radial_ball(4, 1.0, 129)
    assert cl.integrate(ball, np.ones(ball.size)) == pytest.approx(math.pi**2 / 2, rel=1e-3)
    assert g.volumes.sum() == pytest.approx(g.total_volume)


def test_hand_elliptic_solve():
    g = cl.Grid.interval(1.0, 3)
    u = cl.elliptic_solve(g, 1.0, np.array([1.0, 0.0, 0.0]))
    np.testing.assert_allclose(u, np.array([49.0, 36.0, 32.0]) / 153.0, atol=1e-12)


def test_laplacian_and_flux():
    g = cl.Grid.interval(1.0, 21)
    lap = cl.laplacian(g, g.x**2)
    np.testing.assert_allclose(lap[1:-1], 2.0, rtol=1e-10)
    c = np.cos(3 * g.x)
    np.testing.assert_allclose(cl.chemotaxis_divergence(g, np.ones(g.size), c), cl.laplacian(g, c), atol=1e-10)


def test_errors_map_to_python_exceptions():
    g = cl.Grid.interval(1.0, 5)
    with pytest.raises(cl.InvalidArgument):
        cl.Grid.interval(1.0, 2)
    with pytest.raises(cl.InvalidArgument):
        cl.integrate(g, np.ones(4))
    with pytest.raises(cl.FitRejected):
        cl.fit_rate([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    with pytest.raises(cl.ConfigError):
        cl.run_sweep("/nonexistent.cfg")
    assert issubclass(cl.SimulationError, cl.Error)
    assert issubclass(cl.Error, RuntimeError)


def test_simulate_conserves_mass():
    g = cl.Grid.interval(1.0, 64)
    n0 = np.exp(-((g.x - 0.5) / 0.1) ** 2)
    n0 *= 0.5 / cl.integrate(g, n0)
    w0 = cl.elliptic_solve(g, 1.0, n0)
    c0 = cl.elliptic_solve(g, 1.0, w0)
    out = cl.simulate(g, cl.Full(0.1, 1.0), 1e-3, 0.05, n0, c0, w0, stride=10)
    assert len(out["t"]) == 6
    assert out["t"][-1] == pytest.approx(0.05)
    assert max(abs(m - 0.5) for m in out["mass"]) <= 1e-12
    assert min(e1 - e0 for e0, e1 in zip(out["energy"], out["energy"][1:])) <= 0.0
    assert all(a.shape == (g.size,) for a in out["n"])


def test_fit_rate():
    xs = [1e-1, 3e-2, 1e-2, 3e-3]
    slope, intercept, stderr = cl.fit_rate(xs, [math.sqrt(x) for x in xs])
    assert slope == pytest.approx(0.5, abs=1e-14)
    assert stderr < 1e-12


def test_sweep_csv_parses_back(tmp_path):
    cfg = tmp_path / "s.cfg"
    cfg.write_text(
        "[grid]\nnodes = 48\n[model]\ndt = 2e-3\nt_end = 0.05\n"
        "[sweep]\nkind = pes\nguard = none\neps = 1e-1, 3e-2, 1e-2, 3e-3\n"
    )
    rep = cl.run_sweep(str(cfg))
    assert rep["abscissa_name"] == "eps"
    assert rep["w_plateau"] in (True, False)
    parsed = parse_report(rep["csv"])
    xs, vs = parsed.series("err_n_LinfL2")
    assert xs == sorted(xs, reverse=True)
    assert vs == rep["metrics"]["err_n_LinfL2"]["values"]
    slope, _, npoints = parsed.slopes["err_n_LinfL2"]
    assert slope == rep["metrics"]["err_n_LinfL2"]["slope"]
    assert npoints == 4
    assert "dist" in parsed.metrics()


def test_report_reader_rejects_bad_schema():
    with pytest.raises(ValueError):
        parse_report("eps,metric,value,group\n")
    with pytest.raises(ValueError):
        parse_report("abscissa,metric,value,slope_group\n0.1,err,1\n")
    header_only = parse_report("abscissa,metric,value,slope_group\n")
    assert header_only.rows == [] and header_only.slopes == {}


@pytest.mark.skipif(EXE is None, reason="executable path not provided")
def test_cli_writes_reports(tmp_path):
    smoke = subprocess.run([EXE, "simulate", "--config", str(CONFIGS / "smoke.cfg"), "--out", str(tmp_path)],
                           capture_output=True, text=True)
    assert smoke.returncode == 0, smoke.stderr
    assert (tmp_path / "states.csv").stat().st_size > 0
    assert (tmp_path / "energy.csv").read_text().startswith("t,E,D,mass\n")

    missing = subprocess.run([EXE, "simulate", "--config", str(tmp_path / "none.cfg")], capture_output=True, text=True)
    assert missing.returncode == 2
    assert "none.cfg" in missing.stderr

    cfg = tmp_path / "r.cfg"
    cfg.write_text("[grid]\nnodes = 48\n[model]\ndt = 2e-3\nt_end = 0.05\n"
                   "[sweep]\nkind = pes\nguard = none\neps = 1e-1, 3e-2, 1e-2, 3e-3\n")
    rates = subprocess.run([EXE, "pes-rates", "--config", str(cfg), "--out", str(tmp_path)], capture_output=True, text=True)
    assert rates.returncode == 0, rates.stderr
    report = read_report(tmp_path / "pes_rates.csv")
    assert len(report.slopes) == 8
