"""
Fading primitives and the distribution approximations used for the
cascaded (user-IRS-BS) channel.

Convention: simulated links are unit-power Rayleigh, |h|^2 ~ Exp(1), i.e.
the standard Rayleigh scale is 1/sqrt(2). The published product constants
(kappa, zeta) describe links with E|h|^2 = 2; ``GammaApproxParams.scaled``
maps them to any other link power.
"""

import math
from dataclasses import dataclass

import numpy as np

from .rng import as_generator

UNIT_POWER_SIGMA = 1.0 / math.sqrt(2.0)

# magnitude moments E|g|^k of a unit-power Rayleigh link, k = 1..4
_UNIT_RAYLEIGH_ABS_MOMENTS = (math.sqrt(math.pi) / 2, 1.0, math.gamma(2.5), 2.0)


@dataclass(frozen=True)
class GammaApproxParams:
    kappa: float
    zeta: float

    def __post_init__(self):
        if not (self.kappa > 0 and self.zeta > 0):
            raise ValueError("kappa and zeta must be positive")

    @property
    def mean(self):
        return self.kappa * self.zeta

    def scaled(self, link_power=1.0):
        """Same shape for a product of two links of power ``link_power`` each."""
        return GammaApproxParams(self.kappa, self.zeta * link_power / 2.0)


@dataclass(frozen=True)
class GGParams:
    a: float   # scale
    d: float   # shape
    p: float   # power

    def __post_init__(self):
        if not (self.a > 0 and self.d > 0 and self.p > 0):
            raise ValueError("GG parameters must be positive")

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        a, d, p = self.a, self.d, self.p
        return p / (a ** d * math.gamma(d / p)) * x ** (d - 1) * np.exp(-(x / a) ** p)

    def raw_moment(self, k):
        return self.a ** k * math.gamma((self.d + k) / self.p) / math.gamma(self.d / self.p)


@dataclass(frozen=True)
class NoncentralChiSqStats:
    """Moments of Y = scale * chi'^2(dof, lambda_ncp)."""

    lambda_ncp: float
    mean: float
    variance: float
    dof: int = 1
    scale: float = 1.0

    @property
    def second_moment(self):
        return self.variance + self.mean ** 2


def sample_rayleigh(sigma, rng, size=None):
    """Rayleigh magnitudes with E[X] = sigma sqrt(pi/2), E[X^2] = 2 sigma^2."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    return as_generator(rng).rayleigh(sigma, size)


def sample_cn(rng, size=None):
    """Unit-power circularly symmetric complex Gaussian draws."""
    rng = as_generator(rng)
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) * UNIT_POWER_SIGMA


def rayleigh_product_moments(sigma):
    """Published (mean, variance) of |g||f|: (sigma pi/2, 4 sigma^2 (1 - pi^2/16)).

    These are exact when ``sigma`` is the squared standard Rayleigh scale,
    so unit-power links correspond to sigma = 1/2.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    return sigma * math.pi / 2, 4 * sigma ** 2 * (1 - math.pi ** 2 / 16)


def independent_product_moments(sigma):
    """Exact (mean, variance) of the product of two i.i.d. Rayleigh(sigma)."""
    m1 = sigma * math.sqrt(math.pi / 2)
    m2 = 2 * sigma ** 2
    return m1 * m1, m2 * m2 - m1 ** 4


def unit_product_raw_moments():
    """E[X^k], k = 1..4, for X = |g||f| with unit-power links."""
    return tuple(m * m for m in _UNIT_RAYLEIGH_ABS_MOMENTS)


def gamma_approx_of_product():
    """Published gamma fit of the Rayleigh product magnitude."""
    return GammaApproxParams(kappa=1.6467, zeta=0.9539)


def gg_from_gamma(g):
    return GGParams(a=g.zeta ** 2, d=g.kappa / 2, p=0.5)


def gg_moments(p, form="published"):
    """(mean, variance) of the generalized-gamma building block.

    form="published" reproduces the published expressions literally, with
    var = zeta^4 (Gamma(k+4)/Gamma(k) - mu^2). form="exact" returns the
    true moments of GG(a, d, p).
    """
    kappa, zeta2 = 2 * p.d, p.a
    r2 = math.exp(math.lgamma(kappa + 2) - math.lgamma(kappa))
    r4 = math.exp(math.lgamma(kappa + 4) - math.lgamma(kappa))
    mean = zeta2 * r2
    if form == "published":
        return mean, zeta2 ** 2 * (r4 - mean ** 2)
    if form == "exact":
        return mean, zeta2 ** 2 * (r4 - r2 ** 2)
    raise ValueError(f"unknown form {form!r}")


def noncentral_stats(N, sigma=0.5, normalization="published"):
    """Statistics of Y = |sum_n X_n|^2 under the first Gaussian approximation.

    normalization="published": lambda = mu_x / (2 sigma_x^2), unit scale,
    mean 1 + lambda, variance 2 (1 + 2 lambda).
    normalization="physical": the sum is N(N mu_x, N sigma_x^2) so
    Y = N sigma_x^2 chi'^2(1, N mu_x^2 / sigma_x^2).
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    mu_x, var_x = rayleigh_product_moments(sigma)
    if normalization == "published":
        lam = 0.5 * (N * mu_x) / (N * var_x)
        return NoncentralChiSqStats(lam, 1 + lam, 2 * (1 + 2 * lam))
    if normalization == "physical":
        lam = N * mu_x ** 2 / var_x
        sc = N * var_x
        return NoncentralChiSqStats(lam, sc * (1 + lam), sc * sc * 2 * (1 + 2 * lam), 1, sc)
    raise ValueError(f"unknown normalization {normalization!r}")


def aligned_sum_moments(N):
    """Exact (E[Y], E[Y^2]) of Y = (sum_n |g_n||f_n|)^2, unit-power links."""
    m1, m2, m3, m4 = unit_product_raw_moments()
    n = N
    ey = n * m2 + n * (n - 1) * m1 ** 2
    ey2 = (n * m4 + 4 * n * (n - 1) * m3 * m1 + 3 * n * (n - 1) * m2 ** 2
           + 6 * n * (n - 1) * (n - 2) * m2 * m1 ** 2
           + n * (n - 1) * (n - 2) * (n - 3) * m1 ** 4)
    return ey, ey2


def random_phase_sum_moments(N):
    """Exact (E[Y], E[Y^2]) of Y = |sum_n g_n f_n e^{j theta_n}|^2, uniform phases."""
    m2, m4 = 1.0, 4.0
    return N * m2, 2 * (N * m2) ** 2 + N * (m4 - 2 * m2 ** 2)
