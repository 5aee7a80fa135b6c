import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from irsnet import geometry
from irsnet.geometry import DeploymentParams
from irsnet.rng import stream

DP = DeploymentParams(lambda_B=1e-4, M=1500, R=700.0)


def test_params_validation():
    with pytest.raises(ValueError, match="heights"):
        DeploymentParams(1e-4, 10, 100.0, H_B=10.0, H_R=30.0)
    with pytest.raises(ValueError):
        DeploymentParams(0.0, 10, 100.0)
    with pytest.raises(ValueError):
        DeploymentParams(1e-4, 0, 100.0)
    assert DP.lambda_R == pytest.approx(1500 / (math.pi * 700 ** 2))
    assert DP.height_gap == 10.0


def test_samplers_stay_in_disk_and_count():
    rng = stream(3)
    pts = geometry.sample_bpp_disk(500, 50.0, rng)
    assert pts.shape == (500, 2)
    assert np.all(np.hypot(*pts.T) <= 50.0)
    ann = geometry.sample_annulus(400, 10.0, 20.0, rng)
    r = np.hypot(*ann.T)
    assert r.min() >= 10.0 and r.max() <= 20.0
    counts = [len(geometry.sample_ppp_disk(1e-3, 100.0, rng)) for _ in range(400)]
    lam_area = 1e-3 * math.pi * 100 ** 2
    assert np.mean(counts) == pytest.approx(lam_area, abs=4 * math.sqrt(lam_area / 400))


def test_bpp_radial_law_is_uniform_on_disk():
    pts = geometry.sample_bpp_disk(20000, 1.0, stream(4))
    r2 = (pts ** 2).sum(1)
    # r^2 is uniform on [0, 1]
    assert np.mean(r2) == pytest.approx(0.5, abs=0.01)
    assert np.mean(r2 ** 2) == pytest.approx(1 / 3, abs=0.01)


def test_nearest_pdfs_integrate_to_one():
    lo, hi = geometry.irs_support(DP)
    v, _ = integrate.quad(lambda r: float(geometry.nearest_irs_pdf(r, DP)), lo, hi,
                          points=[lo + 5, lo + 20], limit=200)
    assert v == pytest.approx(1.0, abs=1e-9)
    v, _ = integrate.quad(lambda d: float(geometry.nearest_bs_pdf(d, DP)), DP.H_B, np.inf)
    assert v == pytest.approx(1.0, abs=1e-9)


@given(st.floats(0.001, 0.999))
def test_quantiles_invert_cdfs(u):
    r = geometry.nearest_irs_quantile(u, DP)
    assert float(geometry.nearest_irs_cdf(r, DP)) == pytest.approx(u, rel=1e-9)
    d = geometry.nearest_bs_quantile(u, DP)
    assert float(geometry.nearest_bs_cdf(d, DP)) == pytest.approx(u, rel=1e-9)


def test_pdf_support_errors():
    with pytest.raises(ValueError):
        geometry.nearest_irs_pdf(1.0, DP)
    with pytest.raises(ValueError):
        geometry.nearest_bs_pdf(5.0, DP)


def test_nearest_distance_laws_match_simulation():
    small = DeploymentParams(lambda_B=1e-3, M=50, R=100.0)
    rng = stream(5)
    r_min = []
    d_min = []
    for _ in range(3000):
        irs = geometry.sample_bpp_disk(small.M, small.R, rng)
        r_min.append(np.sqrt((irs ** 2).sum(1) + small.H_R ** 2).min())
        bs = geometry.sample_ppp_disk(small.lambda_B, 400.0, rng)
        d_min.append(np.sqrt((bs ** 2).sum(1) + small.H_B ** 2).min())
    for u in (0.25, 0.5, 0.75):
        assert np.mean(np.asarray(r_min) <= geometry.nearest_irs_quantile(u, small)) == pytest.approx(u, abs=0.03)
        assert np.mean(np.asarray(d_min) <= geometry.nearest_bs_quantile(u, small)) == pytest.approx(u, abs=0.03)


def test_distance_rules():
    assert float(geometry.midpoint_distance(40.0, DP)) == pytest.approx(math.hypot(20.0, 10.0))
    assert float(geometry.colocated_distance(40.0, DP)) == pytest.approx(math.hypot(40.0, 10.0))
    with pytest.raises(ValueError):
        geometry.midpoint_distance(-1.0, DP)
    irs = np.array([[0.0, 0.0], [3.0, 4.0]])
    bs = np.array([[0.0, 0.0]])
    t = geometry.cascade_distance(irs, bs, DP)
    assert t[:, 0] == pytest.approx([10.0, math.hypot(5.0, 10.0)])


@pytest.mark.parametrize("i", [1, 2])
def test_disk_moment_matches_uniform_density(i):
    a = 4.0
    ref, _ = integrate.quad(lambda l: (l * l + 100.0) ** (-i * a / 2) * 2 * l / 700 ** 2, 0, 700,
                            epsabs=0, epsrel=1e-12, points=[10.0], limit=200)
    assert geometry.moment_r_inv_alpha(i, a, DP, "disk") == pytest.approx(ref, rel=1e-10)
    # the published form carries exponent -1 - i a/2 on the outer term, which
    # only drops a term of relative size (H/R)^(i a - 2)
    assert geometry.moment_r_inv_alpha(i, a, DP, "published") == pytest.approx(ref, rel=1e-3)


def test_published_moment_is_the_closed_form():
    H, R, ia = 10.0, 700.0, 4.0
    ref = (-2 * (H * H + R * R) ** (-1 - ia / 2) + 2 * H ** (2 - ia)) / ((ia - 2) * R * R)
    assert geometry.moment_r_inv_alpha(1, 4.0, DP, "published") == pytest.approx(ref, rel=1e-14)


def test_disk_moment_with_inner_radius():
    a, inner = 4.0, 30.0
    ref, _ = integrate.quad(lambda l: (l * l + 100.0) ** (-a / 2) * 2 * l / (700 ** 2 - inner ** 2),
                            inner, 700, epsabs=0, epsrel=1e-12)
    assert geometry.moment_r_inv_alpha(1, a, DP, "disk", inner) == pytest.approx(ref, rel=1e-10)
    with pytest.raises(ValueError):
        geometry.moment_r_inv_alpha(1, a, DP, "published", inner)
    with pytest.raises(ValueError):
        geometry.moment_r_inv_alpha(1, 2.0, DP)


def test_literal_weight_differs_from_density():
    # the l^2/(pi R^2) weight is not a probability density on the disk
    lit = geometry.moment_r_inv_alpha_literal(1, 4.0, DP)
    disk = geometry.moment_r_inv_alpha(1, 4.0, DP, "disk")
    assert lit != pytest.approx(disk, rel=0.1)


def test_limit_form_close_for_large_disk():
    big = DeploymentParams(1e-4, 10, 1e5)
    assert geometry.moment_r_inv_alpha_limit(1, 4.0, big) == pytest.approx(
        geometry.moment_r_inv_alpha(1, 4.0, big), rel=1e-6)


@given(st.floats(0.0, 500.0), st.floats(0.1, 40.0))
@settings(max_examples=30)
def test_planar_roundtrip(ell, h):
    assert float(geometry.planar(math.hypot(ell, h), h)) == pytest.approx(ell, abs=1e-9 * (1 + ell))
