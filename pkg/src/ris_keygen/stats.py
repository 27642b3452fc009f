"""Empirical summaries, goodness of fit and kNN mutual information."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import digamma

from . import rng as streams
from .errors import ZeroNoiseDegenerate

# asymptotic Kolmogorov quantiles c(alpha); critical value is c / sqrt(n)
KS_COEFFICIENTS = {0.05: 1.358, 0.01: 1.628}
PHASE_BINS = 16

_DUPLICATE_DIST = 1e-12
_JITTER = 1e-10


@dataclass
class DistributionSummary:
    n: int
    mean_re: float
    mean_im: float
    var_re: float
    var_im: float
    covariance: float
    var_total: float
    magnitude_moments: dict = field(default_factory=dict)
    phase_histogram: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class GofResult:
    statistic: float
    critical_value: float
    alpha: float
    passed: bool
    n: int

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class MiEstimate:
    bits: float
    k_neighbors: int
    n: int

    def to_dict(self) -> dict:
        return asdict(self)


def _as_complex(samples) -> np.ndarray:
    if hasattr(samples, "samples"):
        samples = samples.samples
    return np.asarray(samples, dtype=complex).ravel()


def empirical_summary(samples) -> DistributionSummary:
    """Unbiased two-pass moments of complex samples (or a ``SampleBatch``)."""
    h = _as_complex(samples)
    n = h.size
    if n < 2:
        raise ValueError(f"need at least 2 samples, got {n}")
    re, im = h.real, h.imag
    mr, mi = re.mean(), im.mean()
    dr, di = re - mr, im - mi
    var_re = float(dr @ dr) / (n - 1)
    var_im = float(di @ di) / (n - 1)
    cov = float(dr @ di) / (n - 1)
    mag = np.abs(h)
    mm = mag.mean()
    dm = mag - mm
    phase = np.mod(np.angle(h), 2 * np.pi)
    hist, _ = np.histogram(phase, bins=PHASE_BINS, range=(0.0, 2 * np.pi))
    return DistributionSummary(
        n=n,
        mean_re=float(mr),
        mean_im=float(mi),
        var_re=var_re,
        var_im=var_im,
        covariance=cov,
        var_total=var_re + var_im,
        magnitude_moments={"mean": float(mm), "var": float(dm @ dm) / (n - 1)},
        phase_histogram=hist.tolist(),
    )


def merge_summaries(a: DistributionSummary, b: DistributionSummary) -> DistributionSummary:
    """Combine two summaries as if computed on the concatenated samples."""
    n = a.n + b.n
    w = a.n * b.n / n
    d_re = b.mean_re - a.mean_re
    d_im = b.mean_im - a.mean_im
    d_mag = b.magnitude_moments["mean"] - a.magnitude_moments["mean"]

    def pooled(va, vb, cross):
        return ((a.n - 1) * va + (b.n - 1) * vb + cross * w) / (n - 1)

    var_re = pooled(a.var_re, b.var_re, d_re * d_re)
    var_im = pooled(a.var_im, b.var_im, d_im * d_im)
    return DistributionSummary(
        n=n,
        mean_re=a.mean_re + d_re * b.n / n,
        mean_im=a.mean_im + d_im * b.n / n,
        var_re=var_re,
        var_im=var_im,
        covariance=pooled(a.covariance, b.covariance, d_re * d_im),
        var_total=var_re + var_im,
        magnitude_moments={
            "mean": a.magnitude_moments["mean"] + d_mag * b.n / n,
            "var": pooled(a.magnitude_moments["var"], b.magnitude_moments["var"], d_mag * d_mag),
        },
        phase_histogram=[x + y for x, y in zip(a.phase_histogram, b.phase_histogram)],
    )


def ks_statistic(samples, reference_cdf) -> float:
    x = np.asarray(samples, dtype=float)
    n = x.size
    if n == 0:
        raise ValueError("empty sample")
    if np.any(np.diff(x) < 0):
        raise ValueError("samples must be sorted ascending")
    f = np.asarray(reference_cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


def ks_test(samples, reference_cdf, alpha: float = 0.01) -> GofResult:
    """One-sample Kolmogorov-Smirnov test of sorted ``samples``."""
    if alpha not in KS_COEFFICIENTS:
        raise ValueError(f"alpha must be one of {sorted(KS_COEFFICIENTS)}")
    stat = ks_statistic(samples, reference_cdf)
    n = len(samples)
    crit = KS_COEFFICIENTS[alpha] / math.sqrt(n)
    return GofResult(stat, crit, alpha, stat < crit, n)


def _columns(y) -> np.ndarray:
    y = np.asarray(y)
    if np.iscomplexobj(y):
        y = y.ravel()
        return np.column_stack([y.real, y.imag])
    y = y.astype(float)
    return y[:, None] if y.ndim == 1 else y


def _jitter_duplicates(z: np.ndarray) -> np.ndarray:
    d, _ = cKDTree(z).query(z, k=2, p=np.inf)
    dup = d[:, 1] < _DUPLICATE_DIST
    if not dup.any():
        return z
    noise = streams.generator_at(0, streams.JITTER).random(z.shape) * 2.0 - 1.0
    z = z.copy()
    z[dup] += _JITTER * noise[dup]
    return z


def mi_knn(y_a, y_b, k: int = 5) -> MiEstimate:
    """KSG (first variant) mutual information estimate in bits.

    Complex inputs are split into real and imaginary columns, so paired
    channel estimates are treated as 2 + 2 real dimensions.  Neighborhoods
    use the max-norm.
    """
    x, y = _columns(y_a), _columns(y_b)
    n = len(x)
    if len(y) != n:
        raise ValueError("y_a and y_b must have the same length")
    if not 1 <= k < n:
        raise ValueError(f"need 1 <= k < n, got k={k}, n={n}")
    if x.shape == y.shape:
        scale = max(float(np.max(np.abs(x))), 1.0)
        if float(np.max(np.abs(x - y))) <= _DUPLICATE_DIST * scale:
            raise ZeroNoiseDegenerate("observations are identical; mutual information is unbounded")
    z = _jitter_duplicates(np.hstack([x, y]))
    x, y = z[:, : x.shape[1]], z[:, x.shape[1]:]
    dist, _ = cKDTree(z).query(z, k=k + 1, p=np.inf)
    # strict inequality in the marginal counts
    radius = np.nextafter(dist[:, -1], 0)
    n_x = cKDTree(x).query_ball_point(x, radius, p=np.inf, return_length=True) - 1
    n_y = cKDTree(y).query_ball_point(y, radius, p=np.inf, return_length=True) - 1
    nats = digamma(k) + digamma(n) - np.mean(digamma(n_x + 1) + digamma(n_y + 1))
    return MiEstimate(float(nats / math.log(2.0)), k, n)


def histogram_pdf(samples, bin_count: int, value_range: tuple[float, float]):
    """Density histogram over ``value_range``; returns ``(centers, densities)``.

    Samples outside the range are dropped before normalizing, and there is no
    smoothing across the range edges.
    """
    if bin_count < 2:
        raise ValueError("bin_count must be >= 2")
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("empty sample")
    lo, hi = map(float, value_range)
    counts, edges = np.histogram(x, bins=bin_count, range=(lo, hi))
    total = counts.sum()
    if total == 0:
        raise ValueError("no samples inside the histogram range")
    widths = np.diff(edges)
    centers = 0.5 * (edges[:-1] + edges[1:])
    return centers, counts / (total * widths)
