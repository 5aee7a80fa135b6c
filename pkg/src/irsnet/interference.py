"""
Laplace transforms of aggregate interference.

BS interference follows the PPP probability generating functional with
Rayleigh fading. IRS interference uses the worst-case (phase-aligned)
bound, a Gaussian law for the per-BS sum Z_j and a PGFL over BSs, whose
integral is evaluated either by the Taylor series in X = t^-alpha or by
direct quadrature.

A second model (``lt_irs_kernel``) keeps the exact pair moments of
r^-alpha t^-alpha for each BS position and uses a gamma law per BS.

Transform arguments may be complex with Re s >= 0; the Gaussian factor
uses exp(-s mu - |s|^2 var / 2), which is the Gaussian characteristic
function on the imaginary axis and the usual form on the real axis.
"""

import functools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, interpolate, special

from . import specfun
from .channel import aligned_sum_moments, random_phase_sum_moments


# ---------------------------------------------------------------------------
# BS interference
# ---------------------------------------------------------------------------

def _check_alpha(alpha):
    if not alpha > 2:
        raise ValueError(f"alpha must exceed 2, got {alpha}")


def lt_bs_interference(s, d0, lambda_B, P_tx, alpha=4.0, beta_gain=1.0, path="auto"):
    """E[exp(-s I)] for Rayleigh-faded PPP interferers beyond 3-D distance d0.

    Real s uses the hypergeometric closed form, or the arctan form when
    alpha = 4 and its argument is below one. Complex s uses the arctan
    form for alpha = 4 and quadrature of the PGFL otherwise.
    """
    _check_alpha(alpha)
    if d0 <= 0:
        raise ValueError("d0 must be positive")
    s_arr = np.atleast_1d(np.asarray(s))
    K = P_tx * beta_gain ** 2
    if np.iscomplexobj(s_arr):
        if alpha == 4 and path != "quad":
            out = _arctan_form(s_arr * K, d0, lambda_B)
        else:
            out = np.exp(-2 * math.pi * lambda_B * _pgfl_integral(s_arr * K, d0, alpha))
    else:
        if np.any(s_arr < 0):
            raise ValueError("s must be >= 0")
        out = np.empty(s_arr.shape)
        for k, sv in enumerate(s_arr.ravel()):
            out.flat[k] = _lt_bs_real(float(sv) * K, d0, lambda_B, alpha, path)
    return out if np.ndim(s) else out[0]


def _arctan_form(c, d0, lam):
    rc = np.sqrt(c)
    with np.errstate(invalid="ignore", divide="ignore"):
        val = np.exp(-math.pi * lam * rc * np.arctan(rc / d0 ** 2))
    return np.where(c == 0, 1.0, val)


def _lt_bs_real(c, d0, lam, alpha, path):
    if c == 0:
        return 1.0
    z = -c * d0 ** (-alpha)
    if path in ("auto", "arctan") and alpha == 4:
        X = math.sqrt(-z)
        if path == "arctan" or X < 1:
            return math.exp(-math.pi * lam * math.sqrt(c) * math.atan(X))
    if path == "quad":
        return float(np.exp(-2 * math.pi * lam * _pgfl_integral(np.array([c]), d0, alpha))[0])
    f = specfun.gauss_2f1(1.0, (alpha - 2) / alpha, 2 - 2 / alpha, z)
    return math.exp(-2 * math.pi * lam * d0 ** (2 - alpha) * c / (alpha - 2) * f)


def _pgfl_integral(c, d0, alpha):
    """int_{d0}^inf (1 - 1/(1 + c x^-alpha)) x dx, vectorised over c."""
    c = np.atleast_1d(c)

    def f(v):  # x = d0 / v
        cv = c[:, None] * d0 ** (-alpha) * v[None, :] ** alpha
        return cv / (1 + cv) * d0 ** 2 / v[None, :] ** 3

    val, _ = specfun.adaptive_gk(f, 0.0, 1.0, abs_tol=1e-13, rel_tol=1e-11, initial=4)
    return val


# ---------------------------------------------------------------------------
# Gaussian statistics of the per-BS IRS sum
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ZStats:
    """Normal law of Z_j = sum_m r_m^-alpha t_j^-alpha Y_m at one t_j.

    ``mu_coeff`` and ``var_coeff`` are mu_Z t_j^alpha and var_Z t_j^(2 alpha),
    which do not depend on t_j.
    """

    mu_Z: float
    var_Z: float
    M_eff: int
    t_j: float
    alpha: float

    def __post_init__(self):
        if not (self.mu_Z > 0 and self.var_Z > 0):
            raise ValueError("mu_Z and var_Z must be positive")

    @property
    def mu_coeff(self):
        return self.mu_Z * self.t_j ** self.alpha

    @property
    def var_coeff(self):
        return self.var_Z * self.t_j ** (2 * self.alpha)


def y_moments(N, phase_mode="aligned"):
    """Exact (E[Y], E[Y^2]) of one interfering IRS's normalised power."""
    if phase_mode == "aligned":
        return aligned_sum_moments(N)
    if phase_mode == "random":
        return random_phase_sum_moments(N)
    raise ValueError(f"unknown phase mode {phase_mode!r}")


def z_stats(M_eff, t_j, alpha, y_stats, r_moments, form="matched"):
    """Mean and variance of Z_j.

    y_stats: (E[Y], E[Y^2]) for form="matched", or a NoncentralChiSqStats
    for form="published". r_moments: (E[r^-alpha], E[r^-2 alpha]).

    form="published" evaluates the published expressions
        mu = E[r] (M t^2)^(-alpha/2) mu_Y, var = V[r] (M t^2)^-alpha sigma_Y^2
    form="matched" uses the moments of a sum of M_eff i.i.d. terms
        mu = M E[r] t^-alpha E[Y], var = M (E[r^2] E[Y^2] - E[r]^2 E[Y]^2) t^-2alpha
    """
    if M_eff < 1:
        raise ValueError("M_eff must be >= 1")
    er, er2 = r_moments
    if form == "published":
        mu = er * (M_eff * t_j ** 2) ** (-alpha / 2) * y_stats.mean
        var = (er2 - er * er) * (M_eff * t_j ** 2) ** (-alpha) * y_stats.variance
    elif form == "matched":
        ey, ey2 = y_stats
        mu = M_eff * er * t_j ** (-alpha) * ey
        var = M_eff * (er2 * ey2 - er * er * ey * ey) * t_j ** (-2 * alpha)
    else:
        raise ValueError(f"unknown form {form!r}")
    return ZStats(mu, var, M_eff, t_j, alpha)


# ---------------------------------------------------------------------------
# IRS interference transform
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IrLtParams:
    """Ingredients of the IRS-interference transform.

    k1(s) = s P beta^2 mu_coeff, k2(s) = |s|^2 (P beta^2)^2 var_coeff / 2.
    BSs form a PPP of intensity lambda_B on the planar range
    [inner_radius, R]; extra BSs at fixed planar distances ``fixed_bs``
    contribute deterministic factors. t(l) = sqrt(scale^2 l^2 + gap^2),
    with scale 1/2 for the midpoint rule and 1 for the co-located rule.
    """

    mu_coeff: float
    var_coeff: float
    power: float            # P beta^2
    lambda_B: float
    alpha: float
    gap: float              # H_B - H_R
    R: float
    t_scale: float = 0.5
    inner_radius: float = 0.0
    fixed_bs: tuple = field(default_factory=tuple)
    taylor_order: int = 20

    def t_of(self, ell):
        return np.sqrt((self.t_scale * np.asarray(ell)) ** 2 + self.gap ** 2)

    @property
    def X0(self):
        return float(self.t_of(self.inner_radius)) ** (-self.alpha)

    @property
    def XR(self):
        return float(self.t_of(self.R)) ** (-self.alpha)

    def k1(self, s):
        return np.asarray(s) * self.power * self.mu_coeff

    def k2(self, s):
        return 0.5 * np.abs(np.asarray(s)) ** 2 * self.power ** 2 * self.var_coeff


def lt_irs_interference(s, params, method="auto", sign="corrected", rel_tol=1e-10,
                        max_order=2560):
    """Laplace transform of the worst-case IRS interference.

    The exponent is 2 pi lambda (4/alpha) sum_i b_i (X0^p - XR^p)/p with
    p = i - 2/alpha, b_i the Taylor coefficients of exp(-k1 X - k2 X^2).
    sign="published" uses the published (XR^p - X0^p) ordering, which yields
    values above one; these are clamped. method="quad" integrates the
    PGFL exponent directly, "series" forces the Taylor series and "auto"
    picks the series only where it is numerically safe.
    """
    s_arr = np.atleast_1d(np.asarray(s))
    cplx = np.iscomplexobj(s_arr)
    k1 = params.k1(s_arr)
    k2 = params.k2(s_arr)
    X0, XR = params.X0, params.XR
    size = np.abs(k1) * X0 + np.abs(k2) * X0 ** 2
    if method == "series":
        use_series = np.ones(s_arr.shape, bool)
    elif method == "quad":
        use_series = np.zeros(s_arr.shape, bool)
    elif method == "auto":
        use_series = size <= 12.0
    else:
        raise ValueError(f"unknown method {method!r}")

    expo = np.zeros(s_arr.shape, dtype=complex)
    for idx in np.flatnonzero(use_series):
        expo.flat[idx] = _series_integral(complex(k1.flat[idx]), float(k2.flat[idx]), params,
                                          rel_tol, max_order)
    rest = np.flatnonzero(~use_series)
    if rest.size:
        expo.flat[rest] = _quad_integral(k1.flat[rest], k2.flat[rest], params)
    # expo holds  int (1 - e^{-g}) l dl  over the PPP range
    if sign == "corrected":
        val = np.exp(-2 * math.pi * params.lambda_B * expo)
    elif sign == "published":
        val = np.exp(2 * math.pi * params.lambda_B * expo)
    else:
        raise ValueError(f"unknown sign {sign!r}")
    for ell in params.fixed_bs:
        x = float(params.t_of(ell)) ** (-params.alpha)
        val = val * np.exp(-(k1 * x + k2 * x * x))
    if not cplx:
        val = val.real
        if np.any(val > 1 + 1e-9):
            warnings.warn("IRS-interference transform exceeded 1 and was clamped", RuntimeWarning)
        val = np.clip(val, 0.0, 1.0)
    return val if np.ndim(s) else val[0]


def _series_integral(k1, k2, params, rel_tol, max_order):
    """int_{inner}^{R} (1 - e^{-g(t)}) l dl through the Taylor series in X."""
    a = params.alpha
    X0, XR = params.X0, params.XR
    jac = 1.0 / (a * params.t_scale ** 2)       # l dl = -jac X^(-2/a - 1) dX
    order = params.taylor_order
    prev = None
    # expand in y = X / X0 in [XR/X0, 1] so the coefficients stay bounded
    ratio = XR / X0
    k1y, k2y = k1 * X0, k2 * X0 * X0
    while True:
        with np.errstate(over="ignore", invalid="ignore"):
            b = specfun.taylor_exp_quad(k1y if k1y.imag else k1y.real, k2y, order).coeffs
        i = np.arange(1, order + 1)
        p = i - 2.0 / a
        terms = b * (1.0 - ratio ** p) / p * X0 ** (-2.0 / a)
        total = -jac * terms.sum()
        tail = abs(terms[-1]) * jac
        # alternating terms far above the sum leave only rounding noise
        if not np.all(np.isfinite(terms)) or np.max(np.abs(terms)) * jac * 1e-15 > rel_tol * max(abs(total), 1e-300):
            raise specfun.SeriesError(
                f"IRS-interference series cancels catastrophically at order {order}")
        if tail <= rel_tol * max(abs(total), 1e-300) and (prev is None or
                                                          abs(total - prev) <= rel_tol * abs(total) + 1e-300):
            return total
        if order >= max_order:
            raise specfun.SeriesError(
                f"IRS-interference series unstable at order {order}: total={total}, tail={tail}")
        prev = total
        order *= 2


def _quad_integral(k1, k2, params):
    k1 = np.asarray(k1)
    k2 = np.asarray(k2)
    if k1.size > 256:
        return np.concatenate([_quad_integral(k1[i:i + 256], k2[i:i + 256], params)
                               for i in range(0, k1.size, 256)])
    a = params.alpha

    def f(ell):
        x = params.t_of(ell) ** (-a)
        g = k1[:, None] * x[None, :] + k2[:, None] * x[None, :] ** 2
        return -np.expm1(-g) * ell[None, :]

    # the integrand varies on the scale of the height gap near the origin
    lo, hi = params.inner_radius, params.R
    edges = np.unique(np.clip(np.concatenate([[lo], params.gap * np.array([1, 3, 10, 30]) / params.t_scale, [hi]]), lo, hi))
    total = np.zeros(k1.shape, dtype=complex)
    for l0, l1 in zip(edges[:-1], edges[1:]):
        v, _ = specfun.adaptive_gk(f, l0, l1, abs_tol=1e-12, rel_tol=1e-11, initial=2,
                                   max_intervals=200000)
        total = total + v
    return total


def mean_bs_interference(d0, lambda_B, P_tx, alpha=4.0, beta_gain=1.0):
    """E[I] for unit-mean fading and interferers beyond 3-D distance d0."""
    _check_alpha(alpha)
    return 2 * math.pi * lambda_B * P_tx * beta_gain ** 2 * d0 ** (2 - alpha) / (alpha - 2)


def mean_irs_interference(params):
    """E[I] implied by the Gaussian model (derivative of the transform at 0)."""
    a, sc = params.alpha, params.t_scale
    t_in = float(params.t_of(params.inner_radius))
    t_R = float(params.t_of(params.R))
    field_int = (t_in ** (2 - a) - t_R ** (2 - a)) / (sc * sc * (a - 2))
    fixed = sum(float(params.t_of(l)) ** (-a) for l in params.fixed_bs)
    return params.power * params.mu_coeff * (2 * math.pi * params.lambda_B * field_int + fixed)


def worst_case_ir_bound(r, t, g_abs, f_abs, P_tx, alpha=4.0, beta_gain=1.0):
    """IRS interference with every residual phase zeroed.

    r: (M,) user-IRS distances; t: (M, B) IRS-BS distances; g_abs: (M, N)
    IRS-user magnitudes; f_abs: (M, B, N) BS-IRS magnitudes. Upper-bounds the
    phase-bearing interference on the same draw (triangle inequality).
    """
    r = np.asarray(r, dtype=float)
    if r.size == 0:
        return 0.0
    amp = np.einsum("mn,mbn->mb", np.asarray(g_abs), np.asarray(f_abs))
    w = r[:, None] ** (-alpha) * np.asarray(t, dtype=float) ** (-alpha)
    return P_tx * beta_gain ** 2 * float(np.sum(w * amp ** 2))


# ---------------------------------------------------------------------------
# IRS interference from exact pair moments (kernel model)
# ---------------------------------------------------------------------------

def _angular(A, B, p):
    """int_0^{2 pi} (A - B cos phi)^-p dphi for A > B >= 0."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    q = np.sqrt((A - B) * (A + B))
    if float(p).is_integer():
        # Legendre form, exact for integer p
        return 2 * math.pi * q ** (-p) * special.eval_legendre(int(p) - 1, A / q)
    return 2 * math.pi * A ** (-p) * special.hyp2f1(p / 2, (p + 1) / 2, 1.0, (B / A) ** 2)


@dataclass(frozen=True)
class PairKernel:
    """Pair moments of r^-alpha t^-alpha for an IRS uniform on an annulus.

    k1(l) = E[r^-a t^-a], k2(l) = E[r^-2a t^-2a] when the BS sits at planar
    distance l from the user; tabulated on a grid in asinh(l / gap) and
    interpolated in log space.
    """

    u: np.ndarray
    log_k1: np.ndarray
    log_k2: np.ndarray
    gap: float

    def __call__(self, ell):
        u = np.arcsinh(np.asarray(ell, dtype=float) / self.gap)
        return (np.exp(interpolate.CubicSpline(self.u, self.log_k1)(u)),
                np.exp(interpolate.CubicSpline(self.u, self.log_k2)(u)))


@functools.lru_cache(maxsize=64)
def pair_kernel(alpha, H_R, gap, R, irs_inner=0.0, bs_inner=0.0, n_grid=96):
    """Tabulate the pair kernel for BSs on [bs_inner, R] and IRSs on [irs_inner, R]."""
    _check_alpha(alpha)
    if not (0 <= irs_inner < R and 0 <= bs_inner < R and gap > 0):
        raise ValueError("need 0 <= inner radii < R and gap > 0")
    area = math.pi * (R * R - irs_inner * irs_inner)
    u = np.linspace(math.asinh(bs_inner / gap), math.asinh(R / gap), n_grid)
    ells = gap * np.sinh(u)
    out = np.empty((2, n_grid))
    for i, ell in enumerate(ells):
        for k, order in enumerate((1, 2)):
            p = order * alpha / 2

            def f(rho):
                A = rho * rho + ell * ell + gap * gap
                return rho * (rho * rho + H_R * H_R) ** (-p) * _angular(A, 2 * rho * ell, p)
            pts = [ell] if irs_inner < ell < R else None
            v, _ = integrate.quad(f, irs_inner, R, points=pts, limit=400, epsabs=0, epsrel=1e-10)
            out[k, i] = v / area
    return PairKernel(u, np.log(out[0]), np.log(out[1]), gap)


@dataclass(frozen=True)
class KernelIrParams:
    """IRS interference with exact per-BS moments and a gamma law per BS.

    Given a BS at planar distance l, Z = sum_m r^-a t^-a Y_m over M_eff
    IRSs has mean M_eff E[Y] k1(l) and variance M_eff (E[Y^2] k2 - E[Y]^2 k1^2);
    the per-BS factor is the matching gamma transform (1 + s P theta)^-k.
    """

    kernel: PairKernel
    M_eff: int
    y_mean: float
    y_second: float
    power: float
    lambda_B: float
    R: float
    inner_radius: float = 0.0
    fixed_bs: tuple = field(default_factory=tuple)

    def moments(self, ell):
        k1, k2 = self.kernel(ell)
        mu = self.M_eff * self.y_mean * k1
        var = self.M_eff * (self.y_second * k2 - (self.y_mean * k1) ** 2)
        return mu, np.maximum(var, 1e-300)

    def per_bs_lt(self, s, ell):
        return np.exp(self._log_per_bs(s, ell))

    def _log_per_bs(self, s, ell):
        mu, var = self.moments(ell)
        shape, scale = mu * mu / var, var / mu
        return -shape * np.log1p(np.asarray(s)[..., None] * self.power * scale)

    def mean(self):
        gap = self.kernel.gap
        f = lambda u: (self.moments(gap * np.sinh(u))[0] * gap * gap
                       * np.sinh(u) * np.cosh(u))
        v, _ = specfun.adaptive_gk(f, math.asinh(self.inner_radius / gap),
                                   math.asinh(self.R / gap), abs_tol=0, rel_tol=1e-10)
        fixed = sum(float(self.moments(l)[0]) for l in self.fixed_bs)
        return self.power * (2 * math.pi * self.lambda_B * float(v) + fixed)


def lt_irs_kernel(s, params, rel_tol=1e-9):
    """exp(-2 pi lambda int (1 - L_BS(s; l)) l dl) times the fixed-BS factors."""
    s_arr = np.atleast_1d(np.asarray(s))
    cplx = np.iscomplexobj(s_arr)
    gap = params.kernel.gap
    flat = s_arr.ravel()

    def f(u):
        ell = gap * np.sinh(u)
        # expm1 keeps 1 - L accurate when s is small
        return -np.expm1(params._log_per_bs(flat, ell)) * ell * gap * np.cosh(u)

    v, _ = specfun.adaptive_gk(f, math.asinh(params.inner_radius / gap), math.asinh(params.R / gap),
                               abs_tol=1e-14, rel_tol=rel_tol, initial=8)
    val = np.exp(-2 * math.pi * params.lambda_B * v)
    for ell in params.fixed_bs:
        val = val * params.per_bs_lt(flat, np.array([ell]))[..., 0]
    val = val.reshape(s_arr.shape)
    if not cplx:
        val = np.clip(val.real, 0.0, 1.0)
    return val if np.ndim(s) else val[0]
