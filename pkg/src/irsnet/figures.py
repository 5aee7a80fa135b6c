"""
Plot-ready data for the evaluation figures.

Each builder returns a FigureData: a header, numeric rows and a metadata
dict. Analytic series are always present. Empirical series (with standard
errors) come from the Monte-Carlo oracle; for the LT and coverage figures
they are on by default, for the sweep figures only when a trial count is
given, since every grid point needs its own batch.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import metrics, montecarlo, signal
from .rng import stream

FIGURES = ("fig2", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "fig11", "fig12", "fig13")

N_GRID = tuple(range(10, 151, 10))
A_GRID = tuple(round(0.1 * k, 1) for k in range(11))
M_GRID = tuple(range(300, 3001, 300))


@dataclass
class FigureData:
    figure: str
    header: list
    rows: list
    meta: dict = field(default_factory=dict)

    def column(self, name):
        k = self.header.index(name)
        return np.array([r[k] for r in self.rows], dtype=float)


def _s_grid(mean, n=25, decades=3):
    return np.logspace(-decades, decades, n) / mean


def _trials(cfg, trials, default_on):
    if trials is None:
        return int(cfg.n_trials) if default_on else 0
    if trials < 0:
        raise ValueError("trials must be >= 0")
    return int(trials)


def _seed(cfg, seed):
    return int(cfg.seed if seed is None else seed)


# ---------------------------------------------------------------------------
# transform figures
# ---------------------------------------------------------------------------

def fig2(cfg, trials=None, seed=None):
    """Signal LT for optimal and uniformly random phases at median distances."""
    cond = metrics.median_conditioning(cfg)
    geo = metrics.cascade(cfg, cond)
    s = _s_grid(metrics.indirect_mean_power(cfg, cond))
    opt = metrics.lt_s_indirect(cfg, cond, s)
    rnd = signal.lt_signal_random(s, geo, cfg.N, stream(_seed(cfg, seed), 1 << 20))
    rnd_gg = signal.lt_signal_random(s, geo, cfg.N, stream(_seed(cfg, seed), 1 << 20), model="gg_sum")
    header = ["s", "LT_opt_analytic", "LT_rand_analytic", "LT_rand_published_weights"]
    cols = [s, opt, rnd, rnd_gg]
    n = _trials(cfg, trials, True)
    if n:
        rng = stream(_seed(cfg, seed), 0)
        amp = np.sqrt(rng.standard_exponential((n, cfg.N)) * rng.standard_exponential((n, cfg.N)))
        s_opt = geo.path_gain * amp.sum(1) ** 2
        ph = np.exp(2j * math.pi * rng.random((n, cfg.N)))
        s_rnd = geo.path_gain * np.abs((amp * ph).sum(1)) ** 2
        for tag, x in (("opt", s_opt), ("rand", s_rnd)):
            m, se = montecarlo.empirical_lt(None, x, s)
            header += [f"LT_{tag}_empirical", f"LT_{tag}_stderr"]
            cols += [m, se]
    meta = {"r00": cond.r00, "t0": cond.t0, "N": cfg.N, "trials": n}
    return FigureData("fig2", header, np.column_stack(cols).tolist(), meta)


def fig5(cfg, trials=None, seed=None, M_values=(300, 1500), P_values=(1.0, 20.0)):
    """IRS-interference LT seen by the indirect user, (M, P) grid."""
    n = _trials(cfg, trials, True)
    ref = metrics.mean_ir(cfg.replace(M=max(M_values), P=1.0), "indirect",
                          metrics.median_conditioning(cfg.replace(M=max(M_values))))
    s = _s_grid(ref)
    header, cols = ["s"], [s]
    for M in M_values:
        c1 = cfg.replace(M=int(M), P=1.0)
        cond = metrics.median_conditioning(c1)
        batch = None
        if n:
            batch = montecarlo.simulate_batch(c1, n, _seed(cfg, seed), cond=cond,
                                              phase_mode=cfg.interferer_phases, modes=("indirect",))
        for P in P_values:
            tag = f"M{M}_P{P:g}"
            header.append(f"LT_{tag}_analytic")
            cols.append(metrics.lt_ir(c1.replace(P=float(P)), "indirect", cond, s))
            if batch is not None:
                m, se = montecarlo.empirical_lt(batch, batch["I_R"] * P, s)
                header += [f"LT_{tag}_empirical", f"LT_{tag}_stderr"]
                cols += [m, se]
    meta = {"phase_mode": cfg.interferer_phases, "ir_model": cfg.ir_model, "trials": n}
    return FigureData("fig5", header, np.column_stack(cols).tolist(), meta)


def fig6(cfg, trials=None, seed=None, P_values=(1.0, 20.0)):
    """BS-interference LT seen by the direct user for several powers."""
    n = _trials(cfg, trials, True)
    cond = metrics.median_conditioning(cfg)
    c1 = cfg.replace(P_hat=1.0)
    s = _s_grid(metrics.mean_interference(c1.replace(M=1), "direct", cond))
    batch = None
    if n:
        # a single IRS keeps the (unused) IRS column cheap; I_B_hat does not depend on it
        batch = montecarlo.simulate_batch(c1.replace(M=1), n, _seed(cfg, seed), cond=cond,
                                          modes=("direct",))
    header, cols = ["s"], [s]
    for P in P_values:
        tag = f"P{P:g}"
        header.append(f"LT_{tag}_analytic")
        cols.append(metrics.lt_ib(c1.replace(P_hat=float(P)), "direct", cond, s))
        if batch is not None:
            m, se = montecarlo.empirical_lt(batch, batch["I_B_hat"] * P, s)
            header += [f"LT_{tag}_empirical", f"LT_{tag}_stderr"]
            cols += [m, se]
    meta = {"d0": cond.d0, "trials": n}
    return FigureData("fig6", header, np.column_stack(cols).tolist(), meta)


def fig7(cfg, trials=None, seed=None):
    """Conditional coverage against the SINR threshold."""
    n = _trials(cfg, trials, True)
    cond = metrics.median_conditioning(cfg)
    tau_db = np.asarray(cfg.tau_grid_db, dtype=float)
    tau = 10 ** (tau_db / 10)
    header = ["tau_dB", "C_ID_analytic", "C_D_analytic"]
    cols = [tau_db, [metrics.coverage_indirect(cfg, t, cond) for t in tau],
            [metrics.coverage_direct(cfg, t, cond) for t in tau]]
    if n:
        batch = montecarlo.simulate_batch(cfg, n, _seed(cfg, seed), cond=cond,
                                          phase_mode=cfg.interferer_phases)
        for tag, mode in (("ID", "indirect"), ("D", "direct")):
            cv = montecarlo.empirical_coverage(cfg, tau, mode=mode, batch=batch)
            header += [f"C_{tag}_empirical", f"C_{tag}_stderr", f"C_{tag}_wilson_lo", f"C_{tag}_wilson_hi"]
            cols += [cv.p, cv.stderr, cv.lo, cv.hi]
    meta = {"r00": cond.r00, "d0": cond.d0, "t0": cond.t0, "trials": n,
            "phase_mode": cfg.interferer_phases}
    return FigureData("fig7", header, np.column_stack(cols).tolist(), meta)


# ---------------------------------------------------------------------------
# sweep figures
# ---------------------------------------------------------------------------

def _empirical_point(c, cond, n, seed):
    """Monte-Carlo coverage at c.tau and rates for one grid point."""
    b = montecarlo.simulate_batch(c, n, seed, cond=cond, phase_mode=c.interferer_phases)
    out = {}
    for tag, mode in (("ID", "indirect"), ("D", "direct")):
        cv = montecarlo.empirical_coverage(c, [c.tau], mode=mode, batch=b)
        r = np.log2(1 + b.sinr(mode, c.noise))
        out[f"C_{tag}_empirical"] = float(cv.p[0])
        out[f"C_{tag}_stderr"] = float(cv.stderr[0])
        out[f"R_{tag}_empirical"] = montecarlo.empirical_rate(b, mode, c.noise)
        out[f"R_{tag}_stderr"] = float(r.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return out


def _rows_from_dicts(x_name, xs, blocks):
    """blocks: list of (suffix, list of dicts aligned with xs)."""
    header = [x_name]
    for suffix, dicts in blocks:
        header += [f"{k}{suffix}" for k in dicts[0]]
    rows = []
    for i, x in enumerate(xs):
        row = [x]
        for _, dicts in blocks:
            row += list(dicts[i].values())
        rows.append(row)
    return header, rows


def _element_blocks(cfg, N_values, P_hat_values, keys, n, seed, coverage=False):
    blocks = []
    for ph in P_hat_values:
        c = cfg.replace(P_hat=float(ph))
        cond = metrics.median_conditioning(c)
        sweep = metrics.element_sweep(c, N_values, cond, coverage=coverage)
        dicts = []
        for k, row in enumerate(sweep):
            d = {key: row[key] for key in keys}
            if n:
                d.update(_empirical_point(c.replace(N=int(row["N"])), cond, n, seed + k))
            dicts.append(d)
        blocks.append((f"_Phat{ph:g}", dicts))
    return blocks


def fig8(cfg, trials=None, seed=None, N_values=N_GRID, P_hat_values=(1.0, 5.0)):
    """Conditional ergodic rate against the element count."""
    n = _trials(cfg, trials, False)
    blocks = _element_blocks(cfg, N_values, P_hat_values, ("R_ID", "R_D"), n, _seed(cfg, seed))
    header, rows = _rows_from_dicts("N", list(N_values), blocks)
    return FigureData("fig8", header, rows, {"rate_units": "bits/s/Hz", "trials": n})


def fig9(cfg, trials=None, seed=None, N_values=N_GRID, P_hat_values=(1.0, 5.0)):
    """Energy efficiency against the element count."""
    n = _trials(cfg, trials, False)
    blocks = _element_blocks(cfg, N_values, P_hat_values,
                             ("R_ID", "R_D", "p_ID", "p_D", "EE_ID", "EE_D"), n, _seed(cfg, seed))
    header, rows = _rows_from_dicts("N", list(N_values), blocks)
    return FigureData("fig9", header, rows, {"rate_units": "bits/s/Hz", "ee_units": "bits/s/Hz/W",
                                             "trials": n})


def fig10(cfg, trials=None, seed=None, N_values=N_GRID, M_values=(300, 1500)):
    """Coverage, rate, power and EE against N for two IRS counts."""
    n = _trials(cfg, trials, False)
    seed = _seed(cfg, seed)
    keys = ("C_ID", "C_D", "R_ID", "R_D", "p_ID", "p_D", "EE_ID", "EE_D")
    blocks = []
    for M in M_values:
        c = cfg.replace(M=int(M))
        cond = metrics.median_conditioning(c)
        dicts = []
        for k, row in enumerate(metrics.element_sweep(c, N_values, cond)):
            d = {key: row[key] for key in keys}
            if n:
                d.update(_empirical_point(c.replace(N=int(row["N"])), cond, n, seed + k))
            dicts.append(d)
        blocks.append((f"_M{M}", dicts))
    header, rows = _rows_from_dicts("N", list(N_values), blocks)
    return FigureData("fig10", header, rows, {"trials": n})


def _mix_blocks(cfg, A_values, N_values, keys, n, seed):
    blocks = []
    for N in N_values:
        c = cfg.replace(N=int(N))
        pm = metrics.PowerModel.from_config(c)
        dicts = []
        for k, rep in enumerate(metrics.mix_sweep(c, A_values, rates=True)):
            row = rep.as_row()
            row.update(p_ID=pm.p_ID, p_D=pm.p_D, p=rep.A * pm.p_ID + (1 - rep.A) * pm.p_D)
            d = {key: row[key] for key in keys}
            if n:
                A = rep.A
                cc = c if A in (0.0, 1.0) else c.replace(M=metrics.irs_count_for_fraction(A, c))
                d.update(_empirical_point(cc, metrics.median_conditioning(cc), n, seed + k))
            dicts.append(d)
        blocks.append((f"_N{N}", dicts))
    return blocks


def fig11(cfg, trials=None, seed=None, A_values=A_GRID, N_values=(50, 100)):
    """Coverage and rate against the IRS-user fraction."""
    n = _trials(cfg, trials, False)
    blocks = _mix_blocks(cfg, A_values, N_values, ("C_ID", "C_D", "C", "R_ID", "R_D", "R"),
                         n, _seed(cfg, seed))
    header, rows = _rows_from_dicts("A", list(A_values), blocks)
    return FigureData("fig11", header, rows, {"trials": n, "tau": cfg.tau})


def fig12(cfg, trials=None, seed=None, A_values=A_GRID, N_values=(50, 100)):
    """Power consumption and EE against the IRS-user fraction."""
    n = _trials(cfg, trials, False)
    blocks = _mix_blocks(cfg, A_values, N_values, ("p_ID", "p_D", "p", "EE_ID", "EE_D", "EE"),
                         n, _seed(cfg, seed))
    header, rows = _rows_from_dicts("A", list(A_values), blocks)
    return FigureData("fig12", header, rows, {"trials": n})


def fig13(cfg, trials=None, seed=None, M_values=M_GRID, lambda_values=(1e-4, 0.5e-4), N=100):
    """Overall metrics against the IRS count for two BS intensities."""
    n = _trials(cfg, trials, False)
    seed = _seed(cfg, seed)
    keys = ("A", "C_ID", "C_D", "C", "R_ID", "R_D", "R", "EE_ID", "EE_D", "EE")
    blocks = []
    for lam in lambda_values:
        dicts = []
        for k, M in enumerate(M_values):
            c = cfg.replace(lambda_B=float(lam), M=int(M), N=int(N))
            cond = metrics.median_conditioning(c)
            row = metrics.overall_metrics(c, cond=cond).as_row()
            d = {key: row[key] for key in keys}
            if n:
                d.update(_empirical_point(c, cond, n, seed + k))
            dicts.append(d)
        blocks.append((f"_lam{lam:g}", dicts))
    header, rows = _rows_from_dicts("M", list(M_values), blocks)
    return FigureData("fig13", header, rows, {"trials": n, "N": N})


_BUILDERS = {f.__name__: f for f in (fig2, fig5, fig6, fig7, fig8, fig9, fig10, fig11, fig12, fig13)}


def emit_figure_data(fig_id, cfg, trials=None, seed=None):
    """Build the data behind one figure; unknown ids raise ValueError."""
    try:
        fn = _BUILDERS[fig_id]
    except KeyError:
        raise ValueError(f"unknown figure {fig_id!r}; choose from {', '.join(FIGURES)}") from None
    data = fn(cfg, trials=trials, seed=seed)
    data.meta.setdefault("seed", _seed(cfg, seed))
    return data
