"""
Desired signal through the nearest IRS: phase configuration, received
power, Laplace transform and optimal-phase moments.

Two analytic models are available for the signal Laplace transform:

``coherent``  the per-element products |g_n||f_n| are gamma(kappa, zeta)
              and, with aligned phases, their sum is gamma(N kappa, zeta)
              exactly; the power is the square of that sum.
``gg_sum``    the published product of N^2 independent generalized-gamma
              factors weighted by |a_q|.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline

from . import specfun
from .channel import gamma_approx_of_product

TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class PhaseConfig:
    thetas: np.ndarray
    mode: str = "custom"     # optimal | random | custom

    def __post_init__(self):
        if self.mode not in ("optimal", "random", "custom"):
            raise ValueError(f"unknown phase mode {self.mode!r}")
        t = np.asarray(self.thetas, dtype=float)
        if t.ndim != 1:
            raise ValueError("thetas must be one-dimensional")
        if np.any(t < 0) or np.any(t >= TWO_PI):
            raise ValueError("thetas must lie in [0, 2 pi)")
        object.__setattr__(self, "thetas", t)

    @property
    def N(self):
        return len(self.thetas)


@dataclass(frozen=True)
class CascadeGeometry:
    r00: float             # user to serving IRS, m
    t0j: float             # serving IRS to serving BS, m
    alpha: float = 4.0
    P: float = 20.0        # BS transmit power in IRS-assisted mode, W
    beta_gain: float = 1.0 # reference power gain at 1 m

    def __post_init__(self):
        if not (self.r00 > 0 and self.t0j > 0 and self.P > 0 and self.beta_gain > 0):
            raise ValueError("distances, power and gain must be positive")
        if self.alpha < 2:
            raise ValueError("alpha must be >= 2")

    @property
    def path_gain(self):
        """P beta^2 (r00 t0j)^-alpha, the deterministic factor of the power."""
        return self.P * self.beta_gain ** 2 * (self.r00 * self.t0j) ** (-self.alpha)


@dataclass(frozen=True)
class AqWeights:
    a: np.ndarray

    @property
    def N(self):
        return math.isqrt(len(self.a))


def wrap_phase(x):
    return np.mod(x, TWO_PI)


def optimal_phases(g_phases, f_phases):
    """Phase shifts that zero every residual phase theta_n - psi_n - phi_n."""
    g_phases = np.asarray(g_phases, dtype=float)
    f_phases = np.asarray(f_phases, dtype=float)
    if g_phases.shape != f_phases.shape:
        raise ValueError("g_phases and f_phases differ in length")
    return PhaseConfig(wrap_phase(g_phases + f_phases), "optimal")


def random_phases(N, rng):
    return PhaseConfig(rng.random(N) * TWO_PI, "random")


def residual_phases(phases, g, f):
    """beta_n = theta_n - psi_n - phi_n for g = |g|e^{-j phi}, f = |f|e^{-j psi}."""
    return phases.thetas + np.angle(g) + np.angle(f)


def received_amplitude(g, f, phases):
    return np.sum(g * f * np.exp(1j * phases.thetas), axis=-1)


def signal_power(g, f, phases, geo, normalized=False):
    """P beta^2 (r00 t0j)^-alpha |sum_n f_n g_n e^{j theta_n}|^2.

    ``g`` and ``f`` are complex fading coefficients of length N (leading
    axes broadcast). ``normalized=True`` drops the deterministic factor.
    """
    g = np.asarray(g)
    f = np.asarray(f)
    if g.shape[-1] != f.shape[-1] or g.shape[-1] != phases.N:
        raise ValueError("inconsistent element counts")
    p = np.abs(received_amplitude(g, f, phases)) ** 2
    return p if normalized else geo.path_gain * p


def aq_weights(beta_residuals):
    """cos(beta_n - beta_k) for all (n, k), flattened n-major."""
    b = np.asarray(beta_residuals, dtype=float)
    return AqWeights(np.cos(b[:, None] - b[None, :]).ravel())


# ---------------------------------------------------------------------------
# transforms of squared gamma variables
# ---------------------------------------------------------------------------

_CHUNK = 256


def gamma_square_lt(nu, x, rel_tol=1e-10, abs_tol=1e-13, log=False):
    """E[exp(-x G^2)], G ~ Gamma(nu, 1), for an array of x with Re x >= 0.

    The integral over G is taken along the ray through the saddle point of
    the log-integrand (in u = ln G). The integrand is analytic and decays in
    the sector swept by the rotation, so the value is exact; on that ray the
    curvature at the saddle has argument within pi/4 of pi, which removes
    the oscillation that makes the real-axis integral hopeless for large
    imaginary x. ``log=True`` returns the (principal) logarithm, which stays
    finite where the value underflows.
    """
    x = np.atleast_1d(np.asarray(x))
    if x.size > _CHUNK:
        return np.concatenate([gamma_square_lt(nu, x[i:i + _CHUNK], rel_tol, abs_tol, log)
                               for i in range(0, x.size, _CHUNK)])
    cplx = np.iscomplexobj(x)
    xc = x.astype(complex)
    q = np.sqrt(1.0 + 8.0 * nu * xc)
    g_star = 2.0 * nu / (1.0 + q)                 # saddle of nu u - G - x G^2
    psi = np.angle(g_star)
    u_star = np.log(np.abs(g_star))
    curv = np.abs(2.0 * nu * q / (1.0 + q))
    w = 1.0 / np.sqrt(curv)
    lg = math.lgamma(nu)

    def H(u):
        g = np.exp(u + 1j * psi[:, None])
        return nu * (u + 1j * psi[:, None]) - g - xc[:, None] * g * g

    h_star = H(u_star[:, None])[:, 0]
    # lower tail falls like exp(nu u); upper tail faster than gaussian
    z_lo = -max(14.0, float(np.max(45.0 / (nu * w))))
    z_hi = 14.0

    def f(z):
        u = u_star[:, None] + w[:, None] * z[None, :]
        return np.exp(H(u) - h_star[:, None])

    val, _ = specfun.adaptive_gk(f, z_lo, z_hi, abs_tol=abs_tol, rel_tol=rel_tol,
                                 max_intervals=4000, initial=8)
    if log:
        out = np.log(val * w) + h_star - lg
    else:
        out = val * w * np.exp(h_star - lg)
    return out if cplx else out.real


def gamma_square_lt_pcf(nu, x):
    """Real-argument E[exp(-x G^2)] through the parabolic cylinder function."""
    if x <= 0:
        return 1.0
    if x < 1e-12 / (nu * (nu + 1)):
        return 1.0 - x * nu * (nu + 1)
    return math.exp(specfun.log_gamma_square_lt(nu, x))


# ---------------------------------------------------------------------------
# signal Laplace transform
# ---------------------------------------------------------------------------

def _unit_gamma():
    return gamma_approx_of_product().scaled(1.0)


def lt_signal(s, geo, weights=None, N=None, model="coherent", route="pcf"):
    """Laplace transform of the IRS-assisted signal power at s (array ok).

    ``weights`` gives the a_q of one phase draw (default: all ones, i.e.
    optimal phases, which needs ``N``). Complex s is evaluated by
    quadrature; ``route="pcf"`` uses parabolic cylinder functions for
    real arguments.
    """
    g = _unit_gamma()
    if weights is None:
        if N is None:
            raise ValueError("give weights or N")
        a = np.ones(N * N)
    else:
        a = np.abs(np.asarray(weights.a, dtype=float))
        N = weights.N
    s_arr = np.atleast_1d(np.asarray(s))
    cplx = np.iscomplexobj(s_arr)
    if not cplx and np.any(s_arr < 0):
        raise ValueError("s must be >= 0")
    c = geo.path_gain * g.zeta ** 2
    if model == "coherent":
        if not np.allclose(a, 1.0):
            raise ValueError("the coherent model needs aligned phases")
        x = s_arr * c
        out = _square_lt(N * g.kappa, x, route, cplx)
    elif model == "gg_sum":
        vals, counts = np.unique(np.round(a, 14), return_counts=True)
        keep = vals > 0          # zero-weight factors contribute 1
        vals, counts = vals[keep], counts[keep]
        x = np.multiply.outer(s_arr * c, vals).ravel()
        f = _square_lt(g.kappa, x, route, cplx).reshape(len(s_arr), len(vals))
        out = np.prod(f ** counts, axis=1)
    else:
        raise ValueError(f"unknown signal model {model!r}")
    return out if np.ndim(s) else out[0]


@lru_cache(maxsize=16)
def _square_lt_spline(nu, lo=-23.0, hi=23.0, n=801):
    u = np.linspace(lo, hi, n)
    return CubicSpline(u, gamma_square_lt(nu, np.exp(u), log=True))


def gamma_square_lt_spline(nu, x):
    """Spline of log E[exp(-x G^2)] in log x (about 1e-9 relative).

    Below the table the first-order term -x E[G^2] is used, above it the
    x^(-nu/2) power law fixed to the last node.
    """
    sp = _square_lt_spline(float(nu))
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    lo, hi = sp.x[0], sp.x[-1]
    with np.errstate(divide="ignore"):
        u = np.log(x)
    small, big = u < lo, u > hi
    mid = ~(small | big)
    out[mid] = sp(u[mid])
    out[small] = -x[small] * nu * (nu + 1)
    out[big] = sp(hi) - nu / 2 * (u[big] - hi)
    return np.exp(out)


def _square_lt(nu, x, route, cplx):
    if cplx or route == "quad":
        return gamma_square_lt(nu, x)
    if route == "spline":
        return gamma_square_lt_spline(nu, x)
    if route == "pcf":
        return np.array([gamma_square_lt_pcf(nu, float(v)) for v in x])
    raise ValueError(f"unknown route {route!r}")


def _lt_gaussian_phasor(t, beta, g):
    """E[exp(-t |sum_n X_n e^{j beta_n}|^2)] with the sum taken as a 2-D normal.

    X_n ~ Gamma(kappa, zeta) i.i.d.; for v ~ N(m, C) in the plane
    E[exp(-t v.v)] = prod_i (1 + 2 t l_i)^(-1/2) exp(-t m_i^2 / (1 + 2 t l_i))
    in the eigenbasis (l_i) of C.
    """
    u = np.column_stack([np.cos(beta), np.sin(beta)])
    m = g.kappa * g.zeta * u.sum(0)
    lam, vec = np.linalg.eigh(g.kappa * g.zeta ** 2 * (u.T @ u))
    mi = vec.T @ m
    d = 1.0 + 2.0 * np.multiply.outer(t, np.maximum(lam, 0.0))
    return np.exp(-0.5 * np.log(d).sum(-1) - (t[:, None] * mi ** 2 / d).sum(-1))


def lt_signal_random(s, geo, N, rng, n_draws=64, route="spline", model="gaussian"):
    """Signal transform averaged over uniformly random residual phases.

    model="gaussian" treats the phasor sum of the gamma-approximated
    magnitudes as a planar normal vector (exact transform of its squared
    norm). model="gg_sum" is the published |a_q|-weighted sum of N^2
    independent terms; with phases spread over the full circle it
    overstates the power, since the cross terms no longer cancel.
    """
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    acc = np.zeros_like(s_arr)
    g = _unit_gamma()
    for _ in range(n_draws):
        beta = rng.random(N) * TWO_PI
        if model == "gaussian":
            acc += _lt_gaussian_phasor(s_arr * geo.path_gain, beta, g)
        elif model == "gg_sum":
            acc += lt_signal(s_arr, geo, aq_weights(beta), model="gg_sum", route=route)
        else:
            raise ValueError(f"unknown model {model!r}")
    out = acc / n_draws
    return out if np.ndim(s) else out[0]


def mean_var_signal_optimal(geo, N, form="coherent"):
    """(mean, variance) of the optimal-phase signal power.

    form="published": the published N^2 composition of GG moments.
    form="coherent": moments of A (sum of N gamma variables)^2.
    """
    g = _unit_gamma()
    A = geo.path_gain
    if form == "published":
        from .channel import gg_from_gamma, gg_moments
        mu, var = gg_moments(gg_from_gamma(g), form="published")
        return A * N * N * mu, A * A * N * N * var
    if form == "coherent":
        nu = N * g.kappa
        z2 = g.zeta ** 2
        m2 = nu * (nu + 1) * z2
        m4 = nu * (nu + 1) * (nu + 2) * (nu + 3) * z2 * z2
        return A * m2, A * A * (m4 - m2 * m2)
    raise ValueError(f"unknown form {form!r}")
