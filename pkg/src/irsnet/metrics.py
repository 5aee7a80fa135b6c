"""
Coverage, ergodic rate, power consumption and energy efficiency for the
direct and IRS-assisted (indirect) users, plus the overall user mixture.

All analytic evaluation happens in normalised power units: every power is
divided by a reference level before transforms are inverted, which keeps
the Gil-Pelaez and Hamdi integrals well scaled.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry, specfun
from .interference import (IrLtParams, KernelIrParams, lt_bs_interference, lt_irs_interference,
                           lt_irs_kernel, mean_bs_interference, mean_irs_interference, pair_kernel,
                           y_moments, z_stats)
from .channel import noncentral_stats
from .signal import CascadeGeometry, lt_signal, mean_var_signal_optimal

LN2 = math.log(2.0)


# ---------------------------------------------------------------------------
# power model and user mix
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PowerModel:
    p_BS: float
    p_U: float
    P: float
    P_hat: float
    P_r_b: float
    N: int

    def __post_init__(self):
        if min(self.p_BS, self.p_U, self.P, self.P_hat, self.P_r_b, self.N) < 0:
            raise ValueError("power model entries must be >= 0")

    @classmethod
    def from_config(cls, cfg):
        return cls(cfg.p_BS, cfg.p_U, cfg.P, cfg.P_hat, cfg.P_r_b, cfg.N)

    @property
    def p_IRS(self):
        return self.N * self.P_r_b

    @property
    def p_ID(self):
        return self.p_BS + self.p_U + self.P + self.p_IRS

    @property
    def p_D(self):
        return self.p_BS + self.p_U + self.P_hat


def power_consumption(model, mode):
    if mode == "indirect":
        return model.p_ID
    if mode == "direct":
        return model.p_D
    raise ValueError(f"unknown mode {mode!r}")


@dataclass(frozen=True)
class UserMix:
    A: float
    source: str = "intensity_ratio"

    def __post_init__(self):
        if not 0.0 <= self.A <= 1.0:
            raise ValueError("A must lie in [0, 1]")


def user_fraction(source, cfg=None, blockage_params=None, d0=None, lambda_R=None, lambda_B=None):
    """Fraction of IRS-assisted users."""
    if source == "intensity_ratio":
        lr = cfg.lambda_R if lambda_R is None else lambda_R
        lb = cfg.lambda_B if lambda_B is None else lambda_B
        return UserMix(lr / (lr + lb), source)
    if source == "blockage":
        if blockage_params is None and cfg is not None:
            blockage_params = (cfg.blockage_eta, cfg.blockage_u)
        if blockage_params is None or d0 is None:
            raise ValueError("blockage mode needs (eta, u) and d0")
        eta, u = blockage_params
        if eta < 0 or u < 0:
            raise ValueError("eta and u must be >= 0")
        return UserMix(-math.expm1(-(eta * d0 + u)), source)
    raise ValueError(f"unknown source {source!r}")


# ---------------------------------------------------------------------------
# conditioning distances
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Conditioning:
    r00: float      # 3-D user to nearest IRS
    d0: float       # 3-D user to nearest BS
    t0: float       # 3-D nearest IRS to serving BS

    def ell00(self, cfg):
        return float(geometry.planar(self.r00, cfg.H_R))

    def ell0(self, cfg):
        return float(geometry.planar(self.d0, cfg.H_B))


def serving_irs_bs_distance(r00, d0, cfg, rule=None):
    rule = rule or cfg.t0_rule
    dp = cfg.deployment
    ell0 = float(geometry.planar(d0, cfg.H_B))
    if rule == "midpoint":
        return float(geometry.midpoint_distance(ell0, dp))
    if rule == "rms":
        ell00 = float(geometry.planar(r00, cfg.H_R))
        return math.sqrt(ell00 ** 2 + ell0 ** 2 + dp.height_gap ** 2)
    raise ValueError(f"unknown t0 rule {rule!r}")


def median_conditioning(cfg):
    dp = cfg.deployment
    r00 = float(geometry.nearest_irs_quantile(0.5, dp))
    d0 = float(geometry.nearest_bs_quantile(0.5, dp))
    return Conditioning(r00, d0, serving_irs_bs_distance(r00, d0, cfg))


def marginal_nodes(cfg, n_r=12, n_d=12):
    """Product Gauss-Legendre nodes in quantile space for (r00, d0)."""
    dp = cfg.deployment
    xr, wr = np.polynomial.legendre.leggauss(n_r)
    xd, wd = np.polynomial.legendre.leggauss(n_d)
    ur, ud = (xr + 1) / 2, (xd + 1) / 2
    rs = geometry.nearest_irs_quantile(ur, dp)
    ds = geometry.nearest_bs_quantile(ud, dp)
    out = []
    for r, a in zip(rs, wr / 2):
        for d, b in zip(ds, wd / 2):
            out.append((Conditioning(float(r), float(d), serving_irs_bs_distance(r, d, cfg)), a * b))
    return out


# ---------------------------------------------------------------------------
# transform building blocks (physical units)
# ---------------------------------------------------------------------------

def ir_params(cfg, mode, cond=None):
    """Parameters of the IRS-interference transform seen by the chosen user type.

    Returns IrLtParams (per-BS gaussian, distance rule) or KernelIrParams
    (exact pair moments, gamma per BS) according to cfg.ir_model, or None
    when no IRS interferes.
    """
    dp = cfg.deployment
    if mode == "indirect":
        M_eff, P = cfg.M - 1, cfg.P
    elif mode == "direct":
        M_eff, P = cfg.M, cfg.P_hat
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if M_eff <= 0:
        return None
    conditioned = cfg.condition_fields and cond is not None
    inner_irs = cond.ell00(cfg) if conditioned and mode == "indirect" else 0.0
    power = P * cfg.beta_gain ** 2
    if cfg.ir_model == "kernel":
        ell0 = cond.ell0(cfg) if conditioned else 0.0
        kern = pair_kernel(cfg.alpha, cfg.H_R, dp.height_gap, cfg.R, inner_irs, ell0)
        ym = y_moments(cfg.N, cfg.interferer_phases)
        return KernelIrParams(kern, M_eff, ym[0], ym[1], power, cfg.lambda_B, cfg.R,
                              inner_radius=ell0, fixed_bs=(ell0,) if conditioned else ())
    inner_bs, fixed = 0.0, ()
    if conditioned and cfg.ir_bs_exclusion:
        ell0 = cond.ell0(cfg)
        inner_bs, fixed = ell0, (ell0,)
    variant = "disk" if inner_irs > 0 else cfg.r_moment_variant
    er, er2 = (geometry.moment_r_inv_alpha(i, cfg.alpha, dp, variant, inner_irs) for i in (1, 2))
    ys = noncentral_stats(cfg.N) if cfg.z_form == "published" else y_moments(cfg.N, cfg.interferer_phases)
    zs = z_stats(M_eff, 1.0, cfg.alpha, ys, (er, er2), form=cfg.z_form)
    return IrLtParams(
        mu_coeff=zs.mu_coeff, var_coeff=zs.var_coeff, power=power,
        lambda_B=cfg.lambda_B, alpha=cfg.alpha, gap=dp.height_gap, R=cfg.R,
        t_scale=0.5 if cfg.t_rule == "midpoint" else 1.0,
        inner_radius=inner_bs, fixed_bs=fixed, taylor_order=cfg.taylor_order)


def lt_ir(cfg, mode, cond, s):
    p = ir_params(cfg, mode, cond)
    if p is None:
        return np.ones_like(np.asarray(s), dtype=complex if np.iscomplexobj(s) else float)
    if isinstance(p, KernelIrParams):
        return lt_irs_kernel(s, p)
    return lt_irs_interference(s, p, sign=cfg.ir_sign)


def mean_ir(cfg, mode, cond):
    """E[I_R] implied by the configured IRS-interference model."""
    p = ir_params(cfg, mode, cond)
    if p is None:
        return 0.0
    return p.mean() if isinstance(p, KernelIrParams) else mean_irs_interference(p)


def lt_ib(cfg, mode, cond, s):
    P = cfg.P if mode == "indirect" else cfg.P_hat
    return lt_bs_interference(s, cond.d0, cfg.lambda_B, P, cfg.alpha, cfg.beta_gain)


def cascade(cfg, cond):
    return CascadeGeometry(cond.r00, cond.t0, cfg.alpha, cfg.P, cfg.beta_gain)


def lt_s_indirect(cfg, cond, s):
    route = "quad"
    return lt_signal(s, cascade(cfg, cond), N=cfg.N, model=cfg.signal_model, route=route)


def direct_mean_power(cfg, cond):
    return cfg.P_hat * cfg.beta_gain ** 2 * cond.d0 ** (-cfg.alpha)


def indirect_mean_power(cfg, cond):
    return mean_var_signal_optimal(cascade(cfg, cond), cfg.N, form="coherent")[0]


def mean_interference(cfg, mode, cond):
    P = cfg.P if mode == "indirect" else cfg.P_hat
    ib = mean_bs_interference(cond.d0, cfg.lambda_B, P, cfg.alpha, cfg.beta_gain)
    return ib + mean_ir(cfg, mode, cond)


def indirect_scale(cfg, tau, cond):
    """Spread scale of S - tau (I + N0) used to normalise the inversion."""
    return indirect_mean_power(cfg, cond) + tau * (mean_interference(cfg, "indirect", cond) + cfg.noise)


def _blockage_A(cfg, cond):
    return user_fraction("blockage", cfg, d0=cond.d0).A


# ---------------------------------------------------------------------------
# coverage
# ---------------------------------------------------------------------------

def _gp_quad(cfg):
    return specfun.QuadratureSpec(rel_tol=cfg.gp_rel_tol, abs_tol=cfg.gp_abs_tol,
                                  max_subdivisions=40, upper_cutoff=2.0)


def indirect_char_fn(cfg, tau, cond, ref):
    """w -> E[exp(-j w V / ref)] for V = S - tau (I_B + I_R + N0)."""
    def phi(w):
        w = np.asarray(w, dtype=float) / ref
        return (lt_s_indirect(cfg, cond, 1j * w)
                * lt_ir(cfg, "indirect", cond, -1j * w * tau)
                * lt_ib(cfg, "indirect", cond, -1j * w * tau)
                * np.exp(1j * w * tau * cfg.noise))
    return phi


def coverage_indirect(cfg, tau, cond=None):
    """Pr(SINR_ID >= tau). cond=None marginalises over (r00, d0)."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    if cond is None:
        nodes = marginal_nodes(cfg)
        ref = indirect_scale(cfg, tau, median_conditioning(cfg))

        def phi(w):
            return sum(wt * indirect_char_fn(cfg, tau, c, ref)(w) for c, wt in nodes)
        return specfun.gil_pelaez_ccdf(phi, 0.0, _gp_quad(cfg))
    ref = indirect_scale(cfg, tau, cond)
    return specfun.gil_pelaez_ccdf(indirect_char_fn(cfg, tau, cond, ref), 0.0, _gp_quad(cfg))


def coverage_direct(cfg, tau, cond=None, mix=None, n_nodes=64):
    """Pr(SINR_D >= tau) for a Rayleigh direct link.

    The blockage-scaled SINR is used only when cfg.blockage_scaling is on;
    its fraction comes from ``mix`` or the blockage model at d0.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    if cond is None:
        x, w = np.polynomial.legendre.leggauss(n_nodes)
        ds = geometry.nearest_bs_quantile((x + 1) / 2, cfg.deployment)
        tot = 0.0
        for d, wt in zip(ds, w / 2):
            c = Conditioning(cfg.H_R, float(d), serving_irs_bs_distance(cfg.H_R, d, cfg))
            tot += wt * coverage_direct(cfg, tau, c, mix)
        return tot
    scale = 1.0
    if cfg.blockage_scaling:
        A = mix.A if mix is not None else _blockage_A(cfg, cond)
        if A <= 0:
            return 0.0
        scale = A
    s = tau * cond.d0 ** cfg.alpha / (scale * cfg.beta_gain ** 2 * cfg.P_hat)
    val = math.exp(-s * cfg.noise) * float(lt_ib(cfg, "direct", cond, s)) * float(lt_ir(cfg, "direct", cond, s))
    return min(1.0, max(0.0, val))


# ---------------------------------------------------------------------------
# ergodic rate (Hamdi) and the coverage-integral cross-check
# ---------------------------------------------------------------------------

def _hamdi(lt_interf, lt_sig, noise, ref, spread):
    quad = specfun.QuadratureSpec(rel_tol=1e-8, abs_tol=1e-10, max_subdivisions=80)

    def f(u):
        s = np.asarray(u) / ref
        li = lt_interf(s)
        return li * (1.0 - lt_sig(s)) / np.asarray(u) * np.exp(-noise * s)

    # the integrand in ln u peaks near u = E[S] / (E[S] + E[I] + N0)
    val, _ = specfun.integrate_semiinf(f, quad, scale=ref / spread)
    return max(0.0, float(np.real(val)))


def ergodic_rate(mode, cfg, cond=None, units="bits"):
    """Ergodic rate through Hamdi's identity; nats internally, bits by default."""
    if cond is None:
        nodes = marginal_nodes(cfg, 10, 10) if mode == "indirect" else None
        if mode == "indirect":
            r = sum(w * ergodic_rate(mode, cfg, c, "nats") for c, w in nodes)
        else:
            x, w = np.polynomial.legendre.leggauss(32)
            ds = geometry.nearest_bs_quantile((x + 1) / 2, cfg.deployment)
            r = sum(wt * ergodic_rate(mode, cfg, Conditioning(cfg.H_R, float(d), 1.0), "nats")
                    for d, wt in zip(ds, w / 2))
        return r / LN2 if units == "bits" else r
    if mode == "indirect":
        ref = indirect_mean_power(cfg, cond)
        r = _hamdi(lambda s: lt_ib(cfg, mode, cond, s) * lt_ir(cfg, mode, cond, s),
                   lambda s: lt_s_indirect(cfg, cond, s), cfg.noise, ref,
                   ref + mean_interference(cfg, mode, cond) + cfg.noise)
    elif mode == "direct":
        ref = direct_mean_power(cfg, cond)
        r = _hamdi(lambda s: lt_ib(cfg, mode, cond, s) * lt_ir(cfg, mode, cond, s),
                   lambda s: 1.0 / (1.0 + s * ref), cfg.noise, ref,
                   ref + mean_interference(cfg, mode, cond) + cfg.noise)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return r / LN2 if units == "bits" else r


def rate_via_coverage(mode, cfg, cond, units="bits", n_nodes=48, t_range=(1e-5, 1e4)):
    """E[ln(1 + SINR)] = int_0^inf Pr(SINR > t) / (1 + t) dt by quadrature in ln t."""
    x, w = np.polynomial.legendre.leggauss(n_nodes)
    a, b = math.log(t_range[0]), math.log(t_range[1])
    u = a + (b - a) * (x + 1) / 2
    cov = coverage_indirect if mode == "indirect" else coverage_direct
    total = 0.0
    for ui, wi in zip(u, w * (b - a) / 2):
        t = math.exp(ui)
        total += wi * cov(cfg, t, cond) * t / (1 + t)
    # below t_range[0] coverage is ~1: int_0^a dt/(1+t) = ln(1+a)
    total += math.log1p(t_range[0])
    return total / LN2 if units == "bits" else total


# ---------------------------------------------------------------------------
# energy efficiency and overall metrics
# ---------------------------------------------------------------------------

def energy_efficiency(mode, cfg, cond=None, rate=None):
    pm = PowerModel.from_config(cfg)
    p = power_consumption(pm, mode)
    if p <= 0:
        raise ValueError("power consumption must be positive")
    if rate is None:
        rate = ergodic_rate(mode, cfg, cond)
    return rate / p


@dataclass
class MetricReport:
    C_ID: float
    C_D: float
    C: float
    R_ID: float
    R_D: float
    R: float
    EE_ID: float
    EE_D: float
    EE: float
    A: float
    rate_units: str = "bits"
    conditioning: str = "conditional"
    error_bars: dict = field(default_factory=dict)

    def as_row(self):
        return {k: getattr(self, k) for k in
                ("A", "C_ID", "C_D", "C", "R_ID", "R_D", "R", "EE_ID", "EE_D", "EE")}


def mix_report(A, c_id, c_d, r_id, r_d, ee_id, ee_d, conditioning="conditional"):
    def mix(x_id, x_d):
        if A == 0:
            return x_d
        if A == 1:
            return x_id
        return (1 - A) * x_d + A * x_id
    return MetricReport(c_id, c_d, mix(c_id, c_d), r_id, r_d, mix(r_id, r_d),
                        ee_id, ee_d, mix(ee_id, ee_d), A, conditioning=conditioning)


def overall_metrics(cfg, mix=None, cond=None, tau=None):
    tau = cfg.tau if tau is None else tau
    if mix is None:
        mix = user_fraction(cfg.mix_source, cfg, d0=(cond or median_conditioning(cfg)).d0)
    c_id = coverage_indirect(cfg, tau, cond)
    c_d = coverage_direct(cfg, tau, cond, mix)
    r_id = ergodic_rate("indirect", cfg, cond)
    r_d = ergodic_rate("direct", cfg, cond)
    return mix_report(mix.A, c_id, c_d, r_id, r_d,
                      energy_efficiency("indirect", cfg, rate=r_id),
                      energy_efficiency("direct", cfg, rate=r_d),
                      "marginal" if cond is None else "conditional")


def irs_count_for_fraction(A, cfg):
    """IRS count on the disk whose intensity ratio gives an IRS-user fraction A."""
    if not 0.0 < A < 1.0:
        raise ValueError("A must lie strictly inside (0, 1)")
    lam_r = A / (1.0 - A) * cfg.lambda_B
    return max(2, int(round(lam_r * math.pi * cfg.R ** 2)))


def mix_sweep(cfg, A_values, tau=None, rates=False):
    """Overall metrics along the IRS-user fraction.

    Interior points redeploy M so the intensity ratio matches A and
    condition on the median distances of that deployment. A = 0 and A = 1
    report the pure direct and pure indirect metrics of ``cfg`` itself.
    """
    tau = cfg.tau if tau is None else tau
    out = []
    for A in A_values:
        A = float(A)
        c = cfg if A in (0.0, 1.0) else cfg.replace(M=irs_count_for_fraction(A, cfg))
        cond = median_conditioning(c)
        c_id = coverage_indirect(c, tau, cond)
        c_d = coverage_direct(c, tau, cond)
        if rates:
            r_id, r_d = ergodic_rate("indirect", c, cond), ergodic_rate("direct", c, cond)
            ee_id = energy_efficiency("indirect", c, rate=r_id)
            ee_d = energy_efficiency("direct", c, rate=r_d)
        else:
            r_id = r_d = ee_id = ee_d = math.nan
        out.append(mix_report(A, c_id, c_d, r_id, r_d, ee_id, ee_d))
    return out


def crossings(x, a, b):
    """Abscissae where a - b changes sign, by linear interpolation."""
    x = np.asarray(x, dtype=float)
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    out = []
    for i in range(len(d) - 1):
        if d[i] == 0:
            out.append(float(x[i]))
        elif d[i] * d[i + 1] < 0:
            out.append(float(x[i] + (x[i + 1] - x[i]) * d[i] / (d[i] - d[i + 1])))
    if len(d) and d[-1] == 0:
        out.append(float(x[-1]))
    return out


def element_sweep(cfg, N_values, cond=None, tau=None, coverage=True):
    """Per-mode metrics along the element count at fixed conditioning."""
    cond = cond or median_conditioning(cfg)
    tau = cfg.tau if tau is None else tau
    rows = []
    for n in N_values:
        c = cfg.replace(N=int(n))
        pm = PowerModel.from_config(c)
        r_id, r_d = ergodic_rate("indirect", c, cond), ergodic_rate("direct", c, cond)
        row = {"N": int(n), "R_ID": r_id, "R_D": r_d,
               "EE_ID": r_id / pm.p_ID, "EE_D": r_d / pm.p_D, "p_ID": pm.p_ID, "p_D": pm.p_D}
        if coverage:
            row["C_ID"] = coverage_indirect(c, tau, cond)
            row["C_D"] = coverage_direct(c, tau, cond)
        rows.append(row)
    return rows
