"""Closed-form channel statistics and secret key rates.

Quadratures of the reflection channel are treated as jointly Gaussian (CLT
over ``M`` elements).  For CIPS and DIPS with ``B >= 2`` each quadrature is
``N(0, M/2)``; CGPS gives ``N(0, N q**2 / 2)``; 1-bit DIPS has unequal,
correlated quadratures driven by ``sum(cos 2 alpha)`` and ``sum(sin 2 alpha)``.

Key-rate conventions
--------------------
``noise_var`` is the per-quadrature variance of each party's estimation
noise.  For one real quadrature with signal variance ``s`` the Gaussian
mutual information is ``0.5 * log2(1 + s / (2 n + n**2 / s))``; summing two
independent quadratures with ``s = sigma**2 / 2`` gives the familiar
``log2(1 + (sigma**2/2) / (2 n + 2 n**2 / sigma**2))``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.special import i0e, ndtr

from .errors import NoClosedForm, NonSquareGeometry
from .geometry import AnglePair, RisGeometry, steering_product
from .weights import PhaseScheme, partition_groups

# b in the independence condition is taken as integer within this tolerance
INDEPENDENCE_TOL = 1e-9


@dataclass(frozen=True)
class MagnitudeLaw:
    kind: str  # "rayleigh" | "rician" | "empirical"
    scale: float = 0.0  # per-quadrature standard deviation
    nu: float = 0.0  # |mean|, rician only


@dataclass(frozen=True)
class AnalyticPrediction:
    mean_re: float
    mean_im: float
    var_re: float
    var_im: float
    covariance: float
    var_total: float
    magnitude_law: MagnitudeLaw
    phase_law: str  # "uniform" | "empirical"

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SkrResult:
    rate_bits_per_sample: float
    scheme: PhaseScheme
    noise_var_per_quadrature: float
    is_upper_bound: bool = False
    formula: str = "complex-gaussian"

    def to_dict(self) -> dict:
        return {
            "rate_bits_per_sample": self.rate_bits_per_sample,
            "scheme": self.scheme.label,
            "noise_var_per_quadrature": self.noise_var_per_quadrature,
            "is_upper_bound": self.is_upper_bound,
            "formula": self.formula,
        }


@dataclass(frozen=True)
class IndependenceCheck:
    gamma: float
    satisfied: bool
    nearest_b: int


def dips_one_bit_moments(geom: RisGeometry, angles: AnglePair) -> tuple[float, float, float]:
    """``(var_re, var_im, covariance)`` of the reflection channel under 1-bit DIPS."""
    two_alpha = 2.0 * steering_product(geom, angles).phases
    half_m = geom.size / 2.0
    c = 0.5 * float(np.cos(two_alpha).sum())
    s = 0.5 * float(np.sin(two_alpha).sum())
    return half_m + c, half_m - c, s


def scheme_variance(scheme: PhaseScheme, geom: RisGeometry) -> float:
    """Total channel variance ``E|H - EH|**2`` predicted for ``scheme``."""
    if scheme.kind == "cgps":
        part = partition_groups(geom, scheme.group_size, scheme.allow_remainder)
        # a partial group of r elements adds r**2
        return float(part.group_count * part.group_size ** 2 + part.remainder ** 2)
    return float(geom.size)


def predict_distribution(scheme: PhaseScheme, geom: RisGeometry, angles: AnglePair,
                         direct_gain: complex = 0j) -> AnalyticPrediction:
    g = complex(direct_gain)
    if scheme.kind == "dips" and scheme.bits == 1:
        var_re, var_im, cov = dips_one_bit_moments(geom, angles)
        var_re, var_im = max(var_re, 0.0), max(var_im, 0.0)
        return AnalyticPrediction(g.real, g.imag, var_re, var_im, cov, var_re + var_im,
                                  MagnitudeLaw("empirical"), "empirical")
    total = scheme_variance(scheme, geom)
    half = total / 2.0
    scale = math.sqrt(half)
    if g == 0:
        law = MagnitudeLaw("rayleigh", scale)
        phase = "uniform"
    else:
        law = MagnitudeLaw("rician", scale, abs(g))
        phase = "empirical"
    return AnalyticPrediction(g.real, g.imag, half, half, 0.0, total, law, phase)


def independence_gamma(angles: AnglePair) -> float:
    a = angles
    return (math.cos(a.psi_in) * math.sin(a.theta_in) + math.cos(a.psi_out) * math.sin(a.theta_out)
            + math.sin(a.psi_in) * math.sin(a.theta_in) + math.sin(a.psi_out) * math.sin(a.theta_out))


def independence_condition(geom: RisGeometry, angles: AnglePair) -> IndependenceCheck:
    """Test ``gamma == b pi / (2 k d_x)`` for integer ``b`` on a square URA.

    Only even ``b`` guarantees zero 1-bit covariance for every array size;
    odd ``b`` does so only when ``M_x`` is odd.  Callers that need the actual
    covariance should use :func:`dips_one_bit_moments`.
    """
    if not geom.is_square:
        raise NonSquareGeometry(
            f"independence condition needs M_x == M_y and d_x == d_y, got "
            f"{geom.m_x_count}x{geom.m_y_count}, d=({geom.spacing_x}, {geom.spacing_y})")
    gamma = independence_gamma(angles)
    b_real = gamma * 2.0 * geom.kd_x / math.pi
    b = round(b_real)
    return IndependenceCheck(gamma, abs(b_real - b) <= INDEPENDENCE_TOL, int(b))


def quadrature_mi_bits(signal_var: float, noise_var: float) -> float:
    """Gaussian MI of ``(x + z_a, x + z_b)`` for one real quadrature, in bits."""
    if signal_var <= 0.0:
        return 0.0
    return 0.5 * math.log2(1.0 + signal_var / (2.0 * noise_var + noise_var ** 2 / signal_var))


def skr_per_quadrature(var_re: float, var_im: float, noise_var: float, verbatim: bool = False) -> float:
    """Sum of per-quadrature rates.

    ``verbatim=True`` drops the 1/2 on each term, i.e. the product-of-logs
    form ``log2((1 + a_re)(1 + a_im))``.  That expression double counts: at
    equal, uncorrelated quadratures it is twice the complex Gaussian rate.
    """
    factor = 2.0 if verbatim else 1.0
    return factor * (quadrature_mi_bits(var_re, noise_var) + quadrature_mi_bits(var_im, noise_var))


def gaussian_mi_bits(var_re: float, var_im: float, covariance: float, noise_var: float) -> float:
    """Exact MI between two noisy copies of a 2-D Gaussian channel, in bits.

    Accounts for correlated quadratures, unlike :func:`skr_per_quadrature`.
    With correlation the per-quadrature sum can fall below this value at
    low SNR, so it is not a true upper bound there.
    """
    c = np.array([[var_re, covariance], [covariance, var_im]], dtype=float)
    a = c + noise_var * np.eye(2)
    joint = np.block([[a, c], [c, a]])
    _, logdet_a = np.linalg.slogdet(a)
    _, logdet_j = np.linalg.slogdet(joint)
    return float((2.0 * logdet_a - logdet_j) / (2.0 * math.log(2.0)))


def skr_closed_form(scheme: PhaseScheme, geom: RisGeometry, angles: AnglePair,
                    noise_var_per_quadrature: float, eq29_verbatim: bool = False) -> SkrResult:
    n = float(noise_var_per_quadrature)
    if not n > 0:
        raise ValueError("noise variance must be > 0; the key rate is unbounded at zero noise")
    if scheme.kind == "dips" and scheme.bits == 1:
        var_re, var_im, cov = dips_one_bit_moments(geom, angles)
        rate = skr_per_quadrature(max(var_re, 0.0), max(var_im, 0.0), n, eq29_verbatim)
        bounded = abs(cov) > INDEPENDENCE_TOL * geom.size
        formula = "per-quadrature-verbatim" if eq29_verbatim else "per-quadrature"
        return SkrResult(rate, scheme, n, bounded, formula)
    sigma2 = scheme_variance(scheme, geom)
    rate = math.log2(1.0 + (sigma2 / 2.0) / (2.0 * n + 2.0 * n ** 2 / sigma2))
    return SkrResult(rate, scheme, n)


def noise_var_from_snr_db(snr_db: float, reference_variance: float) -> float:
    """Per-quadrature noise variance giving ``SNR = reference / (2 sigma_z**2)``."""
    return reference_variance / (2.0 * 10.0 ** (snr_db / 10.0))


def snr_db_from_noise_var(noise_var: float, reference_variance: float) -> float:
    return 10.0 * math.log10(reference_variance / (2.0 * noise_var))


# ---------------------------------------------------------------------------
# reference laws


def rayleigh_cdf(x, sigma2: float):
    x = np.asarray(x, dtype=float)
    return np.where(x > 0, -np.expm1(-np.square(np.maximum(x, 0.0)) / (2.0 * sigma2)), 0.0)


def rayleigh_pdf(x, sigma2: float):
    x = np.asarray(x, dtype=float)
    return np.where(x > 0, x / sigma2 * np.exp(-np.square(x) / (2.0 * sigma2)), 0.0)


def rician_pdf(x, nu: float, sigma: float):
    x = np.asarray(x, dtype=float)
    s2 = sigma * sigma
    xp = np.maximum(x, 0.0)
    # i0e(z) = exp(-z) I0(z) keeps the Bessel factor finite for large x*nu
    val = xp / s2 * np.exp(-np.square(xp - nu) / (2.0 * s2)) * i0e(xp * nu / s2)
    return np.where(x > 0, val, 0.0)


def rician_cdf(x, nu: float, sigma: float, epsabs: float = 1e-12):
    """Rician cdf by adaptive quadrature over consecutive sorted points."""
    x = np.asarray(x, dtype=float)
    flat = x.ravel()
    order = np.argsort(flat)
    out = np.empty_like(flat)
    acc, prev = 0.0, 0.0
    pdf = lambda t: float(rician_pdf(t, nu, sigma))
    mode = max(nu, sigma)
    for idx in order:
        xi = flat[idx]
        if xi <= 0:
            out[idx] = 0.0
            continue
        if xi > prev:
            # split at the bulk so quad does not miss the peak on long spans
            pts = [p for p in (mode,) if prev < p < xi]
            val, _ = integrate.quad(pdf, prev, xi, epsabs=epsabs, epsrel=1e-12,
                                    limit=200, points=pts or None)
            acc += val
            prev = xi
        out[idx] = min(acc, 1.0)
    return out.reshape(x.shape)


def uniform_phase_cdf(x):
    return np.clip(np.asarray(x, dtype=float) / (2.0 * math.pi), 0.0, 1.0)


def uniform_phase_pdf(x):
    x = np.asarray(x, dtype=float)
    return np.where((x >= 0) & (x < 2.0 * math.pi), 1.0 / (2.0 * math.pi), 0.0)


def normal_cdf(mean: float, var: float) -> Callable:
    sd = math.sqrt(var)
    if sd == 0:
        return lambda x: np.where(np.asarray(x, dtype=float) >= mean, 1.0, 0.0)
    return lambda x: ndtr((np.asarray(x, dtype=float) - mean) / sd)


def normal_pdf(mean: float, var: float) -> Callable:
    sd = math.sqrt(var)
    return lambda x: np.exp(-0.5 * ((np.asarray(x, dtype=float) - mean) / sd) ** 2) / (sd * math.sqrt(2 * math.pi))


@dataclass(frozen=True)
class ReferenceLaws:
    """Callables for magnitude, phase and quadrature laws.

    ``phase`` is ``None`` when the prediction's phase law is empirical
    (non-zero mean).
    """

    magnitude: Callable
    phase: Callable | None
    real: Callable
    imag: Callable
    kind: str = field(default="cdf")


def _magnitude(prediction: AnalyticPrediction, want_pdf: bool) -> Callable:
    law = prediction.magnitude_law
    if law.kind == "empirical":
        raise NoClosedForm("magnitude law of correlated quadratures has no closed form here")
    s2 = law.scale ** 2
    if law.kind == "rayleigh":
        return (lambda x: rayleigh_pdf(x, s2)) if want_pdf else (lambda x: rayleigh_cdf(x, s2))
    return ((lambda x: rician_pdf(x, law.nu, law.scale)) if want_pdf
            else (lambda x: rician_cdf(x, law.nu, law.scale)))


def reference_cdfs(prediction: AnalyticPrediction) -> ReferenceLaws:
    p = prediction
    return ReferenceLaws(
        _magnitude(p, False),
        uniform_phase_cdf if p.phase_law == "uniform" else None,
        normal_cdf(p.mean_re, p.var_re),
        normal_cdf(p.mean_im, p.var_im),
    )


def reference_pdfs(prediction: AnalyticPrediction) -> ReferenceLaws:
    p = prediction
    return ReferenceLaws(
        _magnitude(p, True),
        uniform_phase_pdf if p.phase_law == "uniform" else None,
        normal_pdf(p.mean_re, p.var_re),
        normal_pdf(p.mean_im, p.var_im),
        kind="pdf",
    )


def quadrature_cdfs(prediction: AnalyticPrediction) -> tuple[Callable, Callable]:
    """Gaussian quadrature cdfs; available for every scheme including 1-bit DIPS."""
    p = prediction
    return normal_cdf(p.mean_re, p.var_re), normal_cdf(p.mean_im, p.var_im)
