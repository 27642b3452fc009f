import math

import numpy as np
import pytest
from scipy import stats as sps
from scipy.integrate import trapezoid

from ris_keygen.analytic import (
    gaussian_mi_bits,
    independence_condition,
    noise_var_from_snr_db,
    predict_distribution,
    quadrature_cdfs,
    rayleigh_cdf,
    reference_cdfs,
    reference_pdfs,
    rician_cdf,
    skr_closed_form,
    skr_per_quadrature,
    snr_db_from_noise_var,
    dips_one_bit_moments,
)
from ris_keygen.errors import NoClosedForm, NonSquareGeometry, NotDivisible
from ris_keygen.geometry import AnglePair, RisGeometry
from ris_keygen.weights import PhaseScheme

from conftest import CASE_1_DEG, CASE_2_DEG, naive_one_bit_moments

CIPS, CGPS2, CGPS4 = PhaseScheme.cips(), PhaseScheme.cgps(2), PhaseScheme.cgps(4)
B1, B2, B3 = PhaseScheme.dips(1), PhaseScheme.dips(2), PhaseScheme.dips(3)


def test_cips_prediction(ura8, case1):
    p = predict_distribution(CIPS, ura8, case1)
    assert (p.mean_re, p.mean_im, p.var_re, p.var_im, p.covariance, p.var_total) == (0, 0, 32, 32, 0, 64)
    assert p.magnitude_law.kind == "rayleigh" and p.phase_law == "uniform"
    assert p.magnitude_law.scale == pytest.approx(math.sqrt(32))


def test_dips_b2_same_as_cips(ura8, case1):
    assert predict_distribution(B2, ura8, case1) == predict_distribution(CIPS, ura8, case1)


def test_direct_path_makes_rician(ura8, case1):
    p = predict_distribution(CIPS, ura8, case1, 3 + 4j)
    assert p.magnitude_law.kind == "rician" and p.magnitude_law.nu == 5.0
    assert (p.mean_re, p.mean_im) == (3.0, 4.0)
    assert p.var_total == 64


@pytest.mark.parametrize("q, total", [(1, 64), (2, 128), (4, 256), (64, 4096)])
def test_cgps_prediction(ura8, case1, q, total):
    p = predict_distribution(PhaseScheme.cgps(q), ura8, case1)
    assert p.var_total == total and p.var_re == total / 2


def test_cgps_prediction_not_divisible(case1):
    with pytest.raises(NotDivisible):
        predict_distribution(PhaseScheme.cgps(3), RisGeometry(8, 8), case1)


@pytest.mark.parametrize("deg", [CASE_1_DEG, CASE_2_DEG])
def test_one_bit_matches_double_sum(ura8, deg):
    angles = AnglePair.from_degrees(*deg)
    p = predict_distribution(B1, ura8, angles)
    var_re, var_im, cov = naive_one_bit_moments(ura8, angles)
    assert p.var_re == pytest.approx(var_re, abs=1e-9)
    assert p.var_im == pytest.approx(var_im, abs=1e-9)
    assert p.covariance == pytest.approx(cov, abs=1e-9)
    assert p.magnitude_law.kind == "empirical" and p.phase_law == "empirical"
    assert abs(p.covariance) <= math.sqrt(p.var_re * p.var_im)


def test_one_bit_frozen_values(ura8, case1, case2):
    # frozen from the double-sum oracle
    assert dips_one_bit_moments(ura8, case1) == pytest.approx(
        (32.136051758715716, 31.86394824128428, -0.6876149168647903), abs=1e-9)
    assert dips_one_bit_moments(ura8, case2) == pytest.approx(
        (34.78947391431366, 29.21052608568634, -0.8122085139381908), abs=1e-9)


def test_one_bit_total_variance_is_m():
    rng = np.random.default_rng(0)
    for _ in range(50):
        geom = RisGeometry(int(rng.integers(1, 10)), int(rng.integers(1, 10)))
        angles = AnglePair(*rng.uniform(-math.pi, math.pi, 4))
        p = predict_distribution(B1, geom, angles)
        assert p.var_total <= geom.size + 1e-9
        assert p.var_total == pytest.approx(geom.size, abs=1e-9)


def test_independence_symmetric_pair(ura8):
    angles = AnglePair.from_degrees(40, 35, 220, 35)
    chk = independence_condition(ura8, angles)
    assert chk.gamma == pytest.approx(0.0, abs=1e-12)
    assert chk.satisfied and chk.nearest_b == 0
    assert dips_one_bit_moments(ura8, angles)[2] == pytest.approx(0.0, abs=1e-9)
    assert predict_distribution(B1, ura8, angles).var_total == pytest.approx(64)


def test_independence_case1(ura8, case1):
    chk = independence_condition(ura8, case1)
    assert chk.gamma == pytest.approx(0.3660254037844386, abs=1e-12)
    assert not chk.satisfied


def test_independence_non_square(case1):
    with pytest.raises(NonSquareGeometry):
        independence_condition(RisGeometry(4, 8), case1)
    with pytest.raises(NonSquareGeometry):
        independence_condition(RisGeometry(4, 4, 0.5, 0.25), case1)


def test_independence_even_b_zeroes_covariance(ura8):
    # gamma = 1 -> b = 2 with kd = pi; xi_x + xi_y = pi
    angles = AnglePair.from_degrees(0, 30, 90, 30)
    chk = independence_condition(ura8, angles)
    assert chk.satisfied and chk.nearest_b == 2
    assert dips_one_bit_moments(ura8, angles)[2] == pytest.approx(0.0, abs=1e-9)


def test_independence_odd_b_depends_on_array_size():
    # gamma = 1/2 -> b = 1; zero covariance only for odd M_x
    theta_in = math.radians(10)
    angles = AnglePair(0.0, theta_in, math.pi / 2, math.asin(0.5 - math.sin(theta_in)))
    for side, vanishes in ((8, False), (9, True)):
        geom = RisGeometry.square(side)
        chk = independence_condition(geom, angles)
        assert chk.satisfied and chk.nearest_b == 1
        cov = dips_one_bit_moments(geom, angles)[2]
        assert (abs(cov) < 1e-9) == vanishes


def test_skr_cips_value(ura8, case1):
    r = skr_closed_form(CIPS, ura8, case1, 1.0)
    assert r.rate_bits_per_sample == pytest.approx(math.log2(1 + 32 / (2 + 2 / 64)), abs=1e-12)
    assert r.rate_bits_per_sample == pytest.approx(4.066, abs=1e-3)
    assert not r.is_upper_bound


def test_skr_cgps_value(ura8, case1):
    r = skr_closed_form(CGPS2, ura8, case1, 1.0)
    assert r.rate_bits_per_sample == pytest.approx(math.log2(1 + 64 / (2 + 2 / 128)), abs=1e-12)
    assert r.rate_bits_per_sample == pytest.approx(5.033, abs=1e-3)


@pytest.mark.parametrize("scheme", [CIPS, CGPS2, B1, B2])
def test_skr_vanishes_at_huge_noise(ura8, case1, scheme):
    assert skr_closed_form(scheme, ura8, case1, 1e9).rate_bits_per_sample < 1e-6


def test_skr_rejects_zero_noise(ura8, case1):
    with pytest.raises(ValueError):
        skr_closed_form(CIPS, ura8, case1, 0.0)


def test_skr_monotone(ura8, case1):
    noise = np.geomspace(0.01, 1e4, 40)
    for scheme in (CIPS, CGPS4, B1):
        rates = [skr_closed_form(scheme, ura8, case1, n).rate_bits_per_sample for n in noise]
        assert np.all(np.diff(rates) < 0)
    sizes = [RisGeometry.square(s) for s in range(2, 12)]
    rates = [skr_closed_form(CIPS, g, case1, 2.0).rate_bits_per_sample for g in sizes]
    assert np.all(np.diff(rates) > 0)


def test_one_bit_skr_consistent_with_cips_when_uncorrelated(ura8):
    # gamma = 0 here but var_re != var_im; use the per-quadrature form directly
    for n in (0.1, 1.0, 10.0):
        assert skr_per_quadrature(32, 32, n) == pytest.approx(
            skr_closed_form(CIPS, ura8, AnglePair(0, 0, 0, 0), n).rate_bits_per_sample, rel=1e-12)
        assert skr_per_quadrature(32, 32, n, verbatim=True) == pytest.approx(
            2 * skr_per_quadrature(32, 32, n), rel=1e-12)


def test_one_bit_skr_flags(ura8, case1):
    r = skr_closed_form(B1, ura8, case1, 1.0)
    assert r.is_upper_bound and r.formula == "per-quadrature"
    v = skr_closed_form(B1, ura8, case1, 1.0, eq29_verbatim=True)
    assert v.rate_bits_per_sample == pytest.approx(2 * r.rate_bits_per_sample)


def test_gaussian_mi_matches_closed_form_when_uncorrelated(ura8, case1):
    for n in (0.3, 3.0, 30.0):
        assert gaussian_mi_bits(32, 32, 0.0, n) == pytest.approx(
            skr_closed_form(CIPS, ura8, case1, n).rate_bits_per_sample, rel=1e-10)


def test_gaussian_mi_brute_force():
    # entropy-based oracle: I = h(a) + h(b) - h(a, b) for Gaussian vectors
    c = np.array([[40.0, 10.0], [10.0, 24.0]])
    n = 3.0
    a = c + n * np.eye(2)
    joint = np.block([[a, c], [c, a]])
    ent = lambda s: sps.multivariate_normal(cov=s).entropy()
    expected = (2 * ent(a) - ent(joint)) / math.log(2)
    assert gaussian_mi_bits(40, 24, 10, n) == pytest.approx(expected, rel=1e-10)


def test_snr_round_trip():
    assert noise_var_from_snr_db(10, 64) == pytest.approx(3.2)
    assert snr_db_from_noise_var(3.2, 64) == pytest.approx(10)


def test_rayleigh_median():
    x = math.sqrt(2 * 32 * math.log(2))
    assert float(rayleigh_cdf(x, 32)) == pytest.approx(0.5, abs=1e-15)


def test_reference_cdfs(ura8, case1):
    ref = reference_cdfs(predict_distribution(CIPS, ura8, case1))
    assert float(ref.phase(math.pi)) == 0.5
    assert float(ref.magnitude(math.sqrt(64 * math.log(2)))) == pytest.approx(0.5)
    assert float(ref.real(0.0)) == 0.5
    xs = np.linspace(-20, 20, 41)
    assert np.allclose(ref.imag(xs), sps.norm(0, math.sqrt(32)).cdf(xs), atol=1e-14)


def test_rician_reduces_to_rayleigh():
    xs = np.linspace(0, 30, 301)
    assert np.max(np.abs(rician_cdf(xs, 0.0, math.sqrt(32)) - rayleigh_cdf(xs, 32))) < 1e-8


@pytest.mark.parametrize("nu, sigma", [(5.0, math.sqrt(32)), (40.0, 2.0), (0.5, 1.0)])
def test_rician_cdf_against_marcum(nu, sigma):
    xs = np.linspace(0, nu + 8 * sigma, 200)
    expected = sps.rice.cdf(xs, nu / sigma, scale=sigma)
    assert np.max(np.abs(rician_cdf(xs, nu, sigma) - expected)) < 1e-9


def test_rician_reference_from_prediction(ura8, case1):
    p = predict_distribution(CIPS, ura8, case1, 6 + 0j)
    ref = reference_cdfs(p)
    assert ref.phase is None
    xs = np.array([3.0, 8.0, 12.0])
    assert np.allclose(ref.magnitude(xs), sps.rice.cdf(xs, 6 / math.sqrt(32), scale=math.sqrt(32)), atol=1e-9)


def test_one_bit_has_no_closed_magnitude(ura8, case1):
    p = predict_distribution(B1, ura8, case1)
    with pytest.raises(NoClosedForm):
        reference_cdfs(p)
    with pytest.raises(NoClosedForm):
        reference_pdfs(p)
    real_cdf, imag_cdf = quadrature_cdfs(p)
    assert float(real_cdf(0.0)) == 0.5


def test_pdfs_integrate_to_one(ura8, case1):
    pdfs = reference_pdfs(predict_distribution(CIPS, ura8, case1, 2 + 2j))
    xs = np.linspace(0, 60, 60001)
    assert trapezoid(pdfs.magnitude(xs), xs) == pytest.approx(1.0, abs=1e-6)
