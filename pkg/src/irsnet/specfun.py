"""
Special functions and quadrature machinery.

Everything here is a pure function of its arguments. The quadrature
helpers are vectorised: integrands receive a 1-D array of abscissae and
return an array whose last axis matches it, so a whole family of
integrals (for example one per transform argument) is integrated in a
single adaptive pass.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special


class QuadratureError(ArithmeticError):
    """Adaptive integration did not reach the requested tolerance."""

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class SeriesError(ArithmeticError):
    """A power series did not converge within the allowed number of terms."""


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances for the adaptive integrators.

    ``upper_cutoff`` is the first truncation point of a semi-infinite
    oscillatory integral; it is extended by doubling until the last panel
    is negligible, at most ``max_subdivisions`` times.
    """

    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    max_subdivisions: int = 60
    upper_cutoff: float = 1.0

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("rel_tol and abs_tol must be positive")
        if self.upper_cutoff <= 0:
            raise ValueError("upper_cutoff must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


@dataclass(frozen=True)
class TaylorCoeffs:
    """Coefficients c_1..c_order of exp(-k1 x - k2 x^2) = sum_i c_i x^i."""

    coeffs: np.ndarray
    k1: complex
    k2: complex

    @property
    def order(self):
        return len(self.coeffs)


# ---------------------------------------------------------------------------
# Gamma function
# ---------------------------------------------------------------------------

def ln_gamma(x):
    """ln Gamma(x) for x > 0."""
    if not x > 0:
        raise ValueError(f"ln_gamma requires x > 0, got {x!r}")
    return math.lgamma(x)


# ---------------------------------------------------------------------------
# Gauss hypergeometric function on the negative real axis
# ---------------------------------------------------------------------------

_MAX_SERIES_TERMS = 10_000


def _hyp2f1_series(a, b, c, z, tol=1e-17):
    term = 1.0
    total = 1.0
    for n in range(_MAX_SERIES_TERMS):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1)) * z
        total += term
        if term == 0.0 or abs(term) <= tol * abs(total):
            return total
    raise SeriesError(f"2F1 series did not converge for z={z}")


def _is_nonpos_int(x):
    return x <= 0 and float(x).is_integer()


def gauss_2f1(a, b, c, z):
    """Gauss hypergeometric function 2F1(a, b; c; z) for real z <= 0.

    |z| <= 1/2 uses the defining series, -2 <= z < -1/2 the Pfaff
    transformation onto z/(z-1) in [1/3, 2/3], and z < -2 the inversion
    formula onto 1/z.
    """
    if _is_nonpos_int(c):
        raise ValueError("c must not be a non-positive integer")
    if z > 0:
        raise ValueError(f"gauss_2f1 supports z <= 0 only, got {z!r}")
    if z == 0:
        return 1.0
    if _is_nonpos_int(a) or _is_nonpos_int(b) or z >= -0.5:
        # terminating polynomial, or inside the comfortable disc
        return _hyp2f1_series(a, b, c, z)
    if z >= -2.0:
        w = z / (z - 1.0)
        return (1.0 - z) ** (-a) * _hyp2f1_series(a, c - b, c, w)
    d = a - b
    if float(d).is_integer():
        raise ValueError("inversion formula needs a - b non-integer")
    inv = 1.0 / z
    # rgamma is zero at the poles, where the matching term drops out
    g, rg = special.gamma, special.rgamma
    t1 = g(c) * g(b - a) * rg(b) * rg(c - a) * (-z) ** (-a) * _hyp2f1_series(a, a - c + 1.0, 1.0 + d, inv)
    t2 = g(c) * g(a - b) * rg(a) * rg(c - b) * (-z) ** (-b) * _hyp2f1_series(b, b - c + 1.0, 1.0 - d, inv)
    return t1 + t2


# ---------------------------------------------------------------------------
# Parabolic cylinder function of non-positive order
# ---------------------------------------------------------------------------

def _log_pcf_integral(nu, z):
    """log of int_0^inf t^(nu-1) exp(-t^2/2 - z t) dt, nu > 0, z > 0."""
    # normalise by the integrand peak so that huge or tiny values stay finite
    if nu > 1:
        peak = 0.5 * (-z + math.sqrt(z * z + 4.0 * (nu - 1.0)))
    else:
        peak = 0.0
    if peak > 0:
        logmax = (nu - 1.0) * math.log(peak) - 0.5 * peak * peak - z * peak
    else:
        logmax = 0.0

    def g(t):
        if t <= 0:
            return 0.0
        return math.exp((nu - 1.0) * math.log(t) - 0.5 * t * t - z * t - logmax)

    width = 1.0 / math.sqrt(1.0 + abs(nu - 1.0) / max(peak, 1e-300) ** 2) if peak > 0 else 1.0
    split = peak + 10.0 * max(width, 1.0 / (z + 1.0))
    if nu < 1:
        # integrable singularity at 0 handled by the algebraic weight
        def g_reg(t):
            return math.exp(-0.5 * t * t - z * t)

        head, _ = integrate.quad(g_reg, 0.0, split, weight="alg", wvar=(nu - 1.0, 0.0),
                                 epsabs=0.0, epsrel=1e-13, limit=200)
    else:
        pts = [peak] if 0 < peak < split else None
        head, _ = integrate.quad(g, 0.0, split, points=pts, epsabs=0.0, epsrel=1e-13, limit=200)
    tail, _ = integrate.quad(g, split, np.inf, epsabs=0.0, epsrel=1e-13, limit=200)
    return logmax + math.log(head + tail)


def parabolic_cylinder_D(order, z):
    """Parabolic cylinder function D_order(z) for order <= 0 and z > 0.

    Uses D_{-nu}(z) = exp(-z^2/4) / Gamma(nu) * int_0^inf t^(nu-1)
    exp(-t^2/2 - z t) dt.
    """
    if order > 0:
        raise ValueError(f"order must be <= 0, got {order!r}")
    if not z > 0:
        raise ValueError(f"z must be positive, got {z!r}")
    if order == 0:
        return math.exp(-0.25 * z * z)
    nu = -order
    return math.exp(-0.25 * z * z - math.lgamma(nu) + _log_pcf_integral(nu, z))


def log_gamma_square_lt(nu, x):
    """log E[exp(-x G^2)] for G ~ Gamma(nu, 1) and real x > 0.

    This is the parabolic-cylinder form: with z = 1/sqrt(2x) the
    transform equals z^nu / Gamma(nu) * exp(z^2/4) * Gamma(nu) * D_{-nu}(z),
    which simplifies to z^nu / Gamma(nu) * int t^(nu-1) exp(-t^2/2 - z t) dt.
    """
    z = 1.0 / math.sqrt(2.0 * x)
    return nu * math.log(z) - math.lgamma(nu) + _log_pcf_integral(nu, z)


# ---------------------------------------------------------------------------
# Taylor coefficients of exp(-k1 x - k2 x^2)
# ---------------------------------------------------------------------------

def taylor_exp_quad(k1, k2, order):
    """Taylor coefficients c_1..c_order of exp(-k1 x - k2 x^2) about 0.

    i c_i = -k1 c_{i-1} - 2 k2 c_{i-2}, c_0 = 1. Complex k1, k2 are
    accepted (used for characteristic functions).
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    dtype = complex if isinstance(k1, complex) or isinstance(k2, complex) else float
    c = np.zeros(order + 1, dtype=dtype)
    c[0] = 1.0
    c[1] = -k1
    for i in range(2, order + 1):
        c[i] = (-k1 * c[i - 1] - 2.0 * k2 * c[i - 2]) / i
    return TaylorCoeffs(coeffs=c[1:], k1=k1, k2=k2)


# ---------------------------------------------------------------------------
# Vectorised adaptive Gauss-Kronrod
# ---------------------------------------------------------------------------

_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])       # 15 ascending nodes
_WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
_WG15 = np.zeros(15)
_WG15[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])


def _gk_pass(f, a, b):
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    x = (c[:, None] + h[:, None] * _NODES[None, :]).ravel()
    fx = np.asarray(f(x))
    fx = fx.reshape(fx.shape[:-1] + (len(a), 15))
    k = np.einsum("...ij,j->...i", fx, _WK) * h
    g = np.einsum("...ij,j->...i", fx, _WG15) * h
    err = np.abs(k - g)
    if err.ndim > 1:
        err = err.reshape(-1, len(a)).max(axis=0)
    return k, err


def adaptive_gk(f, a, b, abs_tol=1e-10, rel_tol=1e-8, max_intervals=4000, initial=1):
    """Integrate a vectorised f over [a, b]; returns (value, error).

    ``f`` maps an array of abscissae to an array whose last axis matches;
    leading axes are integrated simultaneously and share the error budget.
    """
    edges = np.linspace(a, b, initial + 1)
    lo, hi = edges[:-1], edges[1:]
    done_val = 0.0
    done_err = 0.0
    while True:
        k, err = _gk_pass(f, lo, hi)
        total = done_val + k.sum(axis=-1)
        total_err = done_err + err.sum()
        tol = max(abs_tol, rel_tol * float(np.max(np.abs(total))))
        if total_err <= tol:
            return total, total_err
        budget = tol * (hi - lo) / (b - a)
        keep = err <= budget
        done_val = done_val + k[..., keep].sum(axis=-1)
        done_err = done_err + err[keep].sum()
        lo, hi = lo[~keep], hi[~keep]
        if 2 * len(lo) > max_intervals:
            raise QuadratureError(
                f"adaptive quadrature on [{a}, {b}] exceeded {max_intervals} intervals",
                estimate=total, error=total_err)
        mid = 0.5 * (lo + hi)
        lo, hi = np.concatenate([lo, mid]), np.concatenate([mid, hi])


def integrate_semiinf(f, quad=QuadratureSpec(), scale=1.0):
    """Integrate f over (0, inf) by adaptive quadrature in log-space.

    ``scale`` is the characteristic abscissa where the integrand lives.
    Panels of width 2 in u = ln x are added to both sides of ln(scale)
    until two consecutive panels are negligible. Returns (value, error).
    """
    u0 = math.log(scale)

    def g(u):
        x = np.exp(u)
        return np.asarray(f(x)) * x

    def panel(lo, hi, tol):
        return adaptive_gk(g, lo, hi, abs_tol=tol, rel_tol=quad.rel_tol, initial=2)

    val, err = panel(u0 - 1.0, u0 + 1.0, quad.abs_tol)
    for direction in (+1, -1):
        edge = u0 + direction
        quiet = 0
        for _ in range(quad.max_subdivisions):
            lo, hi = sorted((edge, edge + 2.0 * direction))
            pv, pe = panel(lo, hi, quad.abs_tol / 4)
            val = val + pv
            err += pe
            edge += 2.0 * direction
            small = max(quad.abs_tol, quad.rel_tol * float(np.max(np.abs(val)))) / 10
            quiet = quiet + 1 if float(np.max(np.abs(pv))) < small else 0
            if quiet >= 2:
                break
        else:
            raise QuadratureError("semi-infinite integral tail did not decay",
                                  estimate=val, error=err)
    return val, err


def gil_pelaez_ccdf(char_fn, threshold, quad=QuadratureSpec(abs_tol=1e-6, rel_tol=1e-6),
                    eps=1e-8):
    """Pr(X >= threshold) from char_fn(w) = E[exp(-j w X)].

    Evaluates 1/2 - (1/pi) int_0^inf Im[char_fn(w) exp(j w t)] / w dw.
    The removable singularity at w = 0 is covered by the limit value on
    [0, eps]; the upper limit starts at ``quad.upper_cutoff`` and doubles
    until two consecutive panels contribute less than abs_tol / 10.
    ``char_fn`` must accept an array of w.

    Distributions with atoms have characteristic functions that do not
    decay, and the panels then shrink only like 1/w. Each doubling panel
    [L, 2L] is therefore also integrated against the taper 2 - w/L, which
    cancels the leading oscillating term of the remainder; when two
    successive tapered estimates agree to abs_tol / 10 that estimate is
    returned.
    """
    def h(w):
        w = np.asarray(w, dtype=float)
        return np.imag(np.asarray(char_fn(w)) * np.exp(1j * w * threshold)) / w

    head = float(h(np.array([eps]))[0]) * eps
    val, err = adaptive_gk(h, eps, quad.upper_cutoff, abs_tol=quad.abs_tol / 4,
                           rel_tol=quad.rel_tol, max_intervals=20000, initial=4)
    val = float(val) + head
    lo = quad.upper_cutoff
    quiet = 0
    tapered_prev = None
    agree = 0
    for _ in range(quad.max_subdivisions):
        def pair(w, L=lo):
            hw = h(w)
            return np.stack([hw, hw * (2.0 - w / L)])

        pv, pe = adaptive_gk(pair, lo, 2 * lo, abs_tol=quad.abs_tol / 4, rel_tol=quad.rel_tol,
                             max_intervals=200000, initial=8)
        tapered = val + float(pv[1])
        val += float(pv[0])
        err += pe
        lo *= 2
        quiet = quiet + 1 if abs(float(pv[0])) < quad.abs_tol / 10 else 0
        if quiet >= 2:
            break
        if tapered_prev is not None and abs(tapered - tapered_prev) < quad.abs_tol / 10:
            agree += 1
            if agree >= 2:
                val = tapered
                break
        else:
            agree = 0
        tapered_prev = tapered
    else:
        raise QuadratureError("Gil-Pelaez integral did not settle",
                              estimate=0.5 - val / math.pi, error=err / math.pi)
    return min(1.0, max(0.0, 0.5 - val / math.pi))
