import math

import numpy as np
import pytest

from irsnet import figures, metrics
from irsnet.config import ScenarioConfig

CFG = ScenarioConfig()
SMALL = ScenarioConfig(M=200, R=300.0, N=8)


def test_unknown_figure():
    with pytest.raises(ValueError):
        figures.emit_figure_data("fig3", CFG)
    with pytest.raises(ValueError):
        figures.emit_figure_data("fig2", CFG, trials=-1)


def test_fig7_schema_and_shape():
    d = figures.emit_figure_data("fig7", SMALL, trials=300, seed=3)
    for c in ("tau_dB", "C_ID_analytic", "C_ID_empirical", "C_D_analytic", "C_D_empirical",
              "C_ID_stderr", "C_D_stderr", "C_ID_wilson_lo", "C_D_wilson_hi"):
        assert c in d.header
    assert np.array_equal(d.column("tau_dB"), SMALL.tau_grid_db)
    for c in ("C_ID_analytic", "C_D_analytic", "C_ID_empirical", "C_D_empirical"):
        v = np.asarray(d.column(c))
        assert np.all(np.diff(v) <= 1e-9)
    assert d.meta["seed"] == 3 and d.meta["trials"] == 300
    assert all(len(r) == len(d.header) for r in d.rows)


def test_fig2_optimal_below_random():
    d = figures.emit_figure_data("fig2", SMALL, trials=0)
    assert d.header[:3] == ["s", "LT_opt_analytic", "LT_rand_analytic"]
    opt, rnd = np.asarray(d.column("LT_opt_analytic")), np.asarray(d.column("LT_rand_analytic"))
    assert np.all(opt <= rnd + 1e-12)
    assert "LT_opt_empirical" not in d.header


def test_fig2_empirical_columns():
    d = figures.emit_figure_data("fig2", SMALL, trials=2000, seed=1)
    gap = np.abs(np.asarray(d.column("LT_opt_analytic")) - np.asarray(d.column("LT_opt_empirical")))
    assert gap.max() < 0.05


def test_fig5_and_fig6_transforms_are_decreasing():
    for fid in ("fig5", "fig6"):
        d = figures.emit_figure_data(fid, SMALL, trials=0)
        for c in d.header[1:]:
            v = np.asarray(d.column(c))
            assert np.all((v >= 0) & (v <= 1)) and np.all(np.diff(v) <= 1e-12)
    d = figures.emit_figure_data("fig6", SMALL, trials=0)
    # more transmit power means more interference, hence a smaller transform
    assert np.all(np.asarray(d.column("LT_P20_analytic")) <= np.asarray(d.column("LT_P1_analytic")))


def test_fig8_axes_and_consistency():
    d = figures.emit_figure_data("fig8", CFG)
    assert np.array_equal(d.column("N"), figures.N_GRID)
    cond = metrics.median_conditioning(CFG)
    ref = metrics.ergodic_rate("indirect", CFG.replace(N=50, P_hat=1.0), cond)
    assert d.column("R_ID_Phat1")[4] == pytest.approx(ref, rel=1e-9)


def test_fig11_endpoints_and_columns():
    d = figures.emit_figure_data("fig11", CFG)
    assert np.array_equal(d.column("A"), figures.A_GRID)
    c, cd, cid = (np.asarray(d.column(k)) for k in ("C_N100", "C_D_N100", "C_ID_N100"))
    assert c[0] == cd[0] and c[-1] == cid[-1]


@pytest.mark.parametrize("fid", ["fig9", "fig10", "fig12", "fig13"])
def test_sweep_figures_are_finite(fid):
    d = figures.emit_figure_data(fid, CFG)
    arr = np.asarray(d.rows, dtype=float)
    assert arr.shape[1] == len(d.header) and np.all(np.isfinite(arr))
    assert "trials" not in d.meta or d.meta["trials"] == 0


def test_sweep_figure_with_empirical_points():
    d = figures.fig8(SMALL, trials=100, seed=3, N_values=(10, 20))
    assert "R_ID_empirical_Phat1" in d.header and len(d.rows) == 2
    assert all(math.isfinite(x) for x in d.column("R_ID_empirical_Phat5"))
