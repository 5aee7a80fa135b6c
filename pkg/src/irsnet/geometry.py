"""
Deployment geometry: point-process samplers, nearest-node distance laws,
the midpoint IRS-BS distance rule and inverse path-loss moments.

Distances are in metres. Planar samplers return an (n, 2) array.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .rng import as_generator


@dataclass(frozen=True)
class DeploymentParams:
    lambda_B: float          # BS intensity per m^2
    M: int                   # IRS count in the disk
    R: float                 # coverage radius, m
    H_B: float = 20.0        # BS height, m
    H_R: float = 10.0        # IRS height, m

    def __post_init__(self):
        if not self.lambda_B > 0:
            raise ValueError("lambda_B must be positive")
        if self.M < 1:
            raise ValueError("M must be >= 1")
        if not self.R > 0:
            raise ValueError("R must be positive")
        if not (self.H_B > self.H_R >= 0):
            raise ValueError("heights must satisfy H_B > H_R >= 0")

    @property
    def lambda_R(self):
        return self.M / (math.pi * self.R ** 2)

    @property
    def height_gap(self):
        return self.H_B - self.H_R


# ---------------------------------------------------------------------------
# samplers
# ---------------------------------------------------------------------------

def sample_annulus(n, r_in, r_out, rng):
    """n i.i.d. uniform points on the annulus r_in <= |x| <= r_out."""
    rng = as_generator(rng)
    u = rng.random(n)
    rad = np.sqrt(r_in ** 2 + u * (r_out ** 2 - r_in ** 2))
    ang = rng.random(n) * (2 * math.pi)
    return np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])


def sample_ppp_disk(lam, R, rng, r_in=0.0):
    """Homogeneous PPP of intensity ``lam`` on the disk (or annulus from r_in)."""
    if not (lam > 0 and R > 0):
        raise ValueError("lam and R must be positive")
    rng = as_generator(rng)
    n = rng.poisson(lam * math.pi * (R ** 2 - r_in ** 2))
    return sample_annulus(n, r_in, R, rng)


def sample_bpp_disk(M, R, rng):
    """Exactly M i.i.d. uniform points on the disk."""
    if M < 1:
        raise ValueError("M must be >= 1")
    return sample_annulus(M, 0.0, R, as_generator(rng))


# ---------------------------------------------------------------------------
# nearest-node distance laws (3-D distances)
# ---------------------------------------------------------------------------

def irs_support(params):
    return params.H_R, math.sqrt(params.R ** 2 + params.H_R ** 2)


def nearest_irs_pdf(r, params):
    """Density of the 3-D distance from the origin to the nearest of M IRSs."""
    r = np.asarray(r, dtype=float)
    lo, hi = irs_support(params)
    if np.any(r < lo * (1 - 1e-12)) or np.any(r > hi * (1 + 1e-12)):
        raise ValueError(f"r outside support [{lo}, {hi}]")
    base = np.clip(1.0 - (r ** 2 - params.H_R ** 2) / params.R ** 2, 0.0, 1.0)
    return 2.0 * params.M * r / params.R ** 2 * base ** (params.M - 1)


def nearest_irs_cdf(r, params):
    r = np.asarray(r, dtype=float)
    base = np.clip(1.0 - (r ** 2 - params.H_R ** 2) / params.R ** 2, 0.0, 1.0)
    return 1.0 - base ** params.M


def nearest_irs_quantile(u, params):
    u = np.asarray(u, dtype=float)
    frac = -np.expm1(np.log1p(-u) / params.M)       # 1 - (1-u)^(1/M)
    return np.sqrt(params.H_R ** 2 + params.R ** 2 * frac)


def nearest_bs_pdf(d, params):
    """Density of the 3-D distance to the nearest BS of the PPP."""
    d = np.asarray(d, dtype=float)
    if np.any(d < params.H_B * (1 - 1e-12)):
        raise ValueError(f"d must be >= H_B = {params.H_B}")
    lam = params.lambda_B
    return 2 * math.pi * lam * d * np.exp(-math.pi * lam * (d ** 2 - params.H_B ** 2))


def nearest_bs_cdf(d, params):
    d = np.asarray(d, dtype=float)
    return -np.expm1(-math.pi * params.lambda_B * (d ** 2 - params.H_B ** 2))


def nearest_bs_quantile(u, params):
    u = np.asarray(u, dtype=float)
    return np.sqrt(params.H_B ** 2 - np.log1p(-u) / (math.pi * params.lambda_B))


def planar(dist3d, height):
    """Horizontal distance from a 3-D distance and the height offset."""
    return np.sqrt(np.maximum(np.asarray(dist3d, dtype=float) ** 2 - height ** 2, 0.0))


# ---------------------------------------------------------------------------
# IRS-BS distance rules
# ---------------------------------------------------------------------------

def midpoint_distance(ell_j, params):
    """IRS-BS distance when the IRS sits halfway between user and BS."""
    ell_j = np.asarray(ell_j, dtype=float)
    if np.any(ell_j < 0):
        raise ValueError("ell_j must be >= 0")
    return np.sqrt((ell_j / 2) ** 2 + params.height_gap ** 2)


def colocated_distance(ell_j, params):
    """IRS-BS distance when the IRS sits above the user (horizontal gap ell_j)."""
    ell_j = np.asarray(ell_j, dtype=float)
    return np.sqrt(ell_j ** 2 + params.height_gap ** 2)


def cascade_distance(irs_xy, bs_xy, params):
    """Exact 3-D IRS-BS distances, shape (n_irs, n_bs)."""
    diff = irs_xy[:, None, :] - bs_xy[None, :, :]
    return np.sqrt((diff ** 2).sum(-1) + params.height_gap ** 2)


# ---------------------------------------------------------------------------
# inverse path-loss moments of a uniformly placed IRS
# ---------------------------------------------------------------------------

def moment_r_inv_alpha(i, alpha, params, variant="published", inner_radius=0.0):
    """E[(r^-alpha)^i] for an IRS uniform on the disk at height H_R.

    variant="published" is the published closed form. variant="disk" integrates
    against the uniform density 2 l / (R^2 - inner^2) on inner <= l <= R,
    which also supports conditioning on a nearer serving IRS.
    """
    ia = i * alpha
    if i < 1 or ia <= 2:
        raise ValueError("requires i >= 1 and i*alpha > 2")
    H, R = params.H_R, params.R
    if variant == "published":
        if inner_radius:
            raise ValueError("inner_radius is only supported by variant='disk'")
        return (-2 * (H ** 2 + R ** 2) ** (-1 - ia / 2) + 2 * H ** (2 - ia)) / ((ia - 2) * R ** 2)
    if variant == "disk":
        a2 = inner_radius ** 2
        lo = (a2 + H ** 2) ** (1 - ia / 2)
        hi = (R ** 2 + H ** 2) ** (1 - ia / 2)
        return 2 * (lo - hi) / ((ia - 2) * (R ** 2 - a2))
    raise ValueError(f"unknown variant {variant!r}")


def moment_r_inv_alpha_limit(i, alpha, params):
    """R -> infinity form of the published moment."""
    ia = i * alpha
    if ia <= 2:
        raise ValueError("requires i*alpha > 2")
    return 2 * params.H_R ** (2 - ia) / ((ia - 2) * params.R ** 2)


def moment_r_inv_alpha_literal(i, alpha, params):
    """Quadrature of the published integrand with weight l^2 / (pi R^2)."""
    H, R = params.H_R, params.R
    val, _ = integrate.quad(lambda l: (l * l + H * H) ** (-i * alpha / 2) * l * l / (math.pi * R * R),
                            0.0, R, epsabs=0, epsrel=1e-12, limit=200, points=[H])
    return val
