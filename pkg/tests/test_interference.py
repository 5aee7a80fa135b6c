import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from irsnet import interference as itf
from irsnet.channel import noncentral_stats
from irsnet.rng import stream
from irsnet.specfun import SeriesError


def _pgfl_oracle(s, d0, lam, P, alpha, beta):
    # exp(-2 pi lam int_{d0}^inf (1 - 1/(1 + s P beta^2 x^-alpha)) x dx), x the 3-D distance
    c = s * P * beta ** 2
    v, _ = integrate.quad(lambda x: c * x ** (1 - alpha) / (1 + c * x ** (-alpha)), d0, np.inf,
                          epsabs=0, epsrel=1e-12, limit=200)
    return math.exp(-2 * math.pi * lam * v)


@pytest.mark.parametrize("alpha", [3.0, 3.7, 4.0, 5.0])
@pytest.mark.parametrize("s", [1e6, 1e9, 1e11, 1e13])
def test_bs_lt_matches_pgfl_quadrature(alpha, s):
    d0, lam, P, beta = 51.0, 1e-4, 20.0, 1e-2
    got = itf.lt_bs_interference(s, d0, lam, P, alpha, beta)
    assert got == pytest.approx(_pgfl_oracle(s, d0, lam, P, alpha, beta), rel=1e-9, abs=1e-300)


@given(st.floats(1e-3, 1e6), st.floats(21.0, 300.0))
@settings(max_examples=50)
def test_alpha4_fast_path_equals_general(c, d0):
    fast = itf.lt_bs_interference(c, d0, 1e-4, 1.0, 4.0, 1.0, path="arctan")
    gen = itf.lt_bs_interference(c, d0, 1e-4, 1.0, 4.0, 1.0, path="quad")
    assert abs(fast - gen) < 1e-9


def test_bs_lt_complex_paths_agree():
    s = np.array([1e3j, 1e5 + 2e5j, 3e6j])
    a = itf.lt_bs_interference(s, 40.0, 1e-4, 1.0, 4.0, 1.0)
    b = itf.lt_bs_interference(s, 40.0, 1e-4, 1.0, 4.0, 1.0, path="quad")
    assert np.max(np.abs(a - b)) < 1e-10


def test_bs_lt_errors_and_trivial():
    assert itf.lt_bs_interference(0.0, 30.0, 1e-4, 1.0) == 1.0
    with pytest.raises(ValueError):
        itf.lt_bs_interference(1.0, 30.0, 1e-4, 1.0, alpha=2.0)
    with pytest.raises(ValueError):
        itf.lt_bs_interference(-1.0, 30.0, 1e-4, 1.0)
    with pytest.raises(ValueError):
        itf.lt_bs_interference(1.0, 0.0, 1e-4, 1.0)


def test_mean_bs_interference_is_lt_slope():
    d0, lam, P, beta = 45.0, 1e-4, 20.0, 1e-2
    m = itf.mean_bs_interference(d0, lam, P, 4.0, beta)
    s = 1e-6 / m
    assert (1 - itf.lt_bs_interference(s, d0, lam, P, 4.0, beta)) / s == pytest.approx(m, rel=1e-5)
    # Campbell with the planar variable
    H = 20.0
    ell0 = math.sqrt(d0 * d0 - H * H)
    v, _ = integrate.quad(lambda l: (l * l + H * H) ** -2 * l, ell0, np.inf)
    assert m == pytest.approx(2 * math.pi * lam * P * beta ** 2 * v, rel=1e-10)


def test_y_moments_dispatch():
    assert itf.y_moments(4, "random") == (4.0, 2 * 16 + 4 * 2.0)
    assert itf.y_moments(1, "aligned")[0] == pytest.approx(1.0)
    with pytest.raises(ValueError):
        itf.y_moments(4, "other")


def test_z_stats_matched_by_simulation():
    rng = stream(21)
    M, N, t, a = 60, 8, 30.0, 4.0
    n = 20000
    rad = np.sqrt(rng.random((n, M))) * 200.0
    r = np.sqrt(rad ** 2 + 100.0)
    y = (np.sqrt(rng.standard_exponential((n, M, N)) * rng.standard_exponential((n, M, N))).sum(-1)) ** 2
    z = (r ** (-a) * y).sum(1) * t ** (-a)
    er = 2 * (10.0 ** -2 - (200 ** 2 + 100) ** -1) / (2 * 200 ** 2)
    er2 = 2 * (10.0 ** -6 - (200 ** 2 + 100) ** -3) / (6 * 200 ** 2)
    zs = itf.z_stats(M, t, a, itf.y_moments(N), (er, er2))
    assert z.mean() == pytest.approx(zs.mu_Z, rel=0.03)
    assert z.var() == pytest.approx(zs.var_Z, rel=0.2)
    assert zs.mu_coeff == pytest.approx(zs.mu_Z * t ** a)


def test_z_stats_forms_and_errors():
    pub = itf.z_stats(10, 20.0, 4.0, noncentral_stats(8), (1e-4, 1e-7), form="published")
    assert pub.mu_Z > 0 and pub.var_Z > 0
    with pytest.raises(ValueError):
        itf.z_stats(0, 20.0, 4.0, (1, 2), (1e-4, 1e-7))
    with pytest.raises(ValueError):
        itf.z_stats(5, 20.0, 4.0, (1, 2), (1e-4, 1e-7), form="other")
    with pytest.raises(ValueError):
        itf.ZStats(0.0, 1.0, 1, 1.0, 4.0)


def _ir_params(**kw):
    base = dict(mu_coeff=3.0, var_coeff=5.0, power=1.0, lambda_B=1e-4, alpha=4.0, gap=10.0,
                R=700.0, t_scale=1.0)
    base.update(kw)
    return itf.IrLtParams(**base)


@pytest.mark.parametrize("t_scale", [0.5, 1.0])
def test_ir_series_equals_quadrature(t_scale):
    p = _ir_params(t_scale=t_scale)
    m = itf.mean_irs_interference(p)
    # stay where k1 X0 is moderate so the alternating series is exact
    s = np.logspace(-3, 0, 6) * 3.0 / (p.power * p.mu_coeff * p.X0)
    a = itf.lt_irs_interference(s, p, method="series")
    b = itf.lt_irs_interference(s, p, method="quad")
    assert a == pytest.approx(b, rel=1e-8)
    assert itf.lt_irs_interference(s, p) == pytest.approx(b, rel=1e-8)


def test_ir_series_refuses_cancellation():
    p = _ir_params(t_scale=0.5)
    s = 200.0 / (p.power * p.mu_coeff * p.X0)
    with pytest.raises(SeriesError):
        itf.lt_irs_interference(s, p, method="series")
    assert 0.0 <= itf.lt_irs_interference(s, p) < 1.0


def test_ir_mean_is_lt_slope_with_fixed_bs():
    p = _ir_params(inner_radius=30.0, fixed_bs=(30.0,))
    m = itf.mean_irs_interference(p)
    s = 1e-7 / m
    assert (1 - itf.lt_irs_interference(s, p)) / s == pytest.approx(m, rel=1e-5)


def test_ir_published_sign_clamps_and_warns():
    p = _ir_params()
    s = 1.0 / itf.mean_irs_interference(p)
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        v = itf.lt_irs_interference(s, p, sign="published")
    assert v == 1.0
    assert any("clamped" in str(w.message) for w in rec)
    with pytest.raises(ValueError):
        itf.lt_irs_interference(s, p, sign="other")
    with pytest.raises(ValueError):
        itf.lt_irs_interference(s, p, method="other")


def test_ir_lt_complex_argument_bounded():
    p = _ir_params()
    w = np.logspace(-2, 2, 5) / itf.mean_irs_interference(p)
    v = itf.lt_irs_interference(1j * w, p)
    assert np.all(np.abs(v) <= 1 + 1e-9)


@given(st.integers(1, 6), st.integers(1, 4), st.integers(1, 8), st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_worst_case_bound_never_violated(M, B, N, seed):
    rng = stream(seed)
    r = rng.uniform(10, 100, M)
    t = rng.uniform(10, 100, (M, B))
    g = (rng.standard_normal((M, N)) + 1j * rng.standard_normal((M, N))) / math.sqrt(2)
    f = (rng.standard_normal((M, B, N)) + 1j * rng.standard_normal((M, B, N))) / math.sqrt(2)
    th = rng.random((M, N)) * 2 * math.pi
    amp = np.einsum("mn,mbn,mn->mb", g, f, np.exp(1j * th))
    actual = float(np.sum(r[:, None] ** -4.0 * t ** -4.0 * np.abs(amp) ** 2))
    bound = itf.worst_case_ir_bound(r, t, np.abs(g), np.abs(f), 1.0)
    assert actual <= bound * (1 + 1e-12)
    assert itf.worst_case_ir_bound(np.array([]), np.zeros((0, 1)), np.zeros((0, 1)),
                                   np.zeros((0, 1, 1)), 1.0) == 0.0


@pytest.mark.parametrize("p", [1.0, 2.0, 3.0, 2.5, 1.7])
def test_angular_closed_form(p):
    A, B = 5.0, 3.2
    ref, _ = integrate.quad(lambda ph: (A - B * math.cos(ph)) ** -p, 0, 2 * math.pi, epsrel=1e-13)
    assert float(itf._angular(A, B, p)) == pytest.approx(ref, rel=1e-11)


def test_pair_kernel_against_direct_quadrature():
    alpha, H, gap, R = 4.0, 10.0, 10.0, 300.0
    kern = itf.pair_kernel(alpha, H, gap, R)
    for ell in (0.0, 25.0, 120.0):
        def f(ph, rho):
            r2 = rho * rho + H * H
            t2 = rho * rho + ell * ell - 2 * rho * ell * math.cos(ph) + gap * gap
            return rho * (r2 * t2) ** (-alpha / 2) / (math.pi * R * R)
        ref, _ = integrate.dblquad(f, 0, R, 0, 2 * math.pi, epsrel=1e-9)
        assert float(kern(ell)[0]) == pytest.approx(ref, rel=1e-5)
    with pytest.raises(ValueError):
        itf.pair_kernel(alpha, H, gap, R, irs_inner=R)


def test_kernel_params_mean_and_lt():
    kern = itf.pair_kernel(4.0, 10.0, 10.0, 700.0)
    y1, y2 = itf.y_moments(8)
    p = itf.KernelIrParams(kern, 200, y1, y2, 1.0, 1e-4, 700.0, inner_radius=40.0, fixed_bs=(40.0,))
    m = p.mean()
    s = 1e-7 / m
    assert (1 - itf.lt_irs_kernel(s, p)) / s == pytest.approx(m, rel=1e-4)
    v = itf.lt_irs_kernel(np.logspace(-2, 2, 5) / m, p)
    assert np.all(np.diff(v) < 0)
    c = itf.lt_irs_kernel(1j * np.logspace(-2, 2, 5) / m, p)
    assert np.all(np.abs(c) <= 1 + 1e-9)
