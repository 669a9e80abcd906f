"""
Statistics Toolkit

Kurtosis, histogram density estimates, maximum-likelihood Gaussian fits,
Hellinger distance and KL divergence, plus the quadrature helpers and
closed-form Gaussian references used to check them.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, stats

from clipnoise.config import DEFAULT_BINS, MIN_HISTOGRAM_SAMPLES, QUADRATURE_POINTS
from clipnoise.errors import DegenerateInputError, DivergenceUndefinedError, InputError

Density = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class EmpiricalPdf:
    """
    Histogram density estimate on uniform bins.

    Attributes:
        edges: B + 1 uniformly spaced bin edges
        densities: counts / (in-range count * width), one per bin
        count: Number of samples the histogram was built from
    """

    edges: np.ndarray
    densities: np.ndarray
    count: int

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def width(self) -> float:
        return float(self.edges[1] - self.edges[0])

    @property
    def bins(self) -> int:
        return int(self.densities.size)

    def mass(self) -> float:
        return float(np.sum(self.densities) * self.width)

    def __call__(self, z: np.ndarray) -> np.ndarray:
        """Piecewise-constant density; 0 outside the outer edges."""
        z = np.asarray(z, dtype=float)
        idx = np.clip(np.searchsorted(self.edges, z, side="right") - 1, 0, self.bins - 1)
        inside = (z >= self.edges[0]) & (z <= self.edges[-1])
        return np.where(inside, self.densities[idx], 0.0)


@dataclass(frozen=True)
class GaussianFit:
    """
    Maximum-likelihood normal fit.

    Attributes:
        mu_ez: Sample mean
        sigma_ez: Sample standard deviation with divisor n
    """

    mu_ez: float
    sigma_ez: float

    def pdf(self, z: np.ndarray) -> np.ndarray:
        return stats.norm.pdf(z, loc=self.mu_ez, scale=self.sigma_ez)

    def logpdf(self, z: np.ndarray) -> np.ndarray:
        return stats.norm.logpdf(z, loc=self.mu_ez, scale=self.sigma_ez)

    __call__ = pdf


def _as_samples(samples, minimum: int, what: str) -> np.ndarray:
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < minimum:
        raise InputError(f"{what} needs at least {minimum} samples, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise InputError(f"{what} received non-finite samples")
    return x


def kurtosis(samples) -> float:
    """
    Plug-in kurtosis E{(x - mean)^4} / (E{(x - mean)^2})^2 (3 for a Gaussian).

    Raises:
        InputError: Fewer than 4 samples
        DegenerateInputError: Zero variance
    """
    x = _as_samples(samples, 4, "kurtosis")
    if np.var(x) == 0.0:
        raise DegenerateInputError("kurtosis is undefined for zero-variance samples")
    return float(stats.kurtosis(x, fisher=False, bias=True))


def fit_gaussian_ml(samples) -> GaussianFit:
    """
    Maximum-likelihood mean and standard deviation.

    Raises:
        InputError: Fewer than 2 samples
        DegenerateInputError: Zero variance
    """
    x = _as_samples(samples, 2, "fit_gaussian_ml")
    if np.var(x) == 0.0:
        raise DegenerateInputError("cannot fit a Gaussian to zero-variance samples")
    mu, sigma = stats.norm.fit(x)
    return GaussianFit(mu_ez=float(mu), sigma_ez=float(sigma))


def empirical_pdf(
    samples,
    bins: int = DEFAULT_BINS,
    value_range: Optional[Tuple[float, float]] = None,
) -> EmpiricalPdf:
    """
    Histogram density on ``bins`` uniform bins.

    Args:
        samples: Data
        bins: Number of bins B
        value_range: (lo, hi); defaults to (min, max) of the samples. Samples
            outside a caller range are left out and the rest renormalized.

    Raises:
        InputError: Fewer than MIN_HISTOGRAM_SAMPLES samples, bins < 1, or an
            empty caller range
    """
    x = _as_samples(samples, MIN_HISTOGRAM_SAMPLES, "empirical_pdf")
    if bins < 1:
        raise InputError(f"bins must be >= 1, got {bins}")
    if value_range is not None and not value_range[1] > value_range[0]:
        raise InputError(f"invalid histogram range {value_range}")

    counts, edges = np.histogram(x, bins=bins, range=value_range)
    in_range = int(counts.sum())
    if in_range == 0:
        raise InputError("no samples fall inside the histogram range")
    width = edges[1] - edges[0]
    return EmpiricalPdf(edges=edges, densities=counts / (in_range * width), count=int(x.size))


def aligned_range(lo: float, hi: float, knots: Sequence[float], bins: int) -> Tuple[float, float]:
    """
    Range of ``bins`` uniform bins covering [lo, hi] with a bin edge on every knot.

    Bin centers then never sit across a jump of a piecewise density. The
    finest width that fits is used; extra bins are appended above ``hi``.
    Falls back to (lo, hi) when no knot lies inside or the knots cannot all
    be placed on edges.
    """
    inside = sorted(k for k in knots if lo < k < hi)
    if not inside or bins < 2:
        return lo, hi
    anchor, span = inside[0], inside[-1] - inside[0]

    def placed(width: float) -> Optional[Tuple[float, float]]:
        below = math.ceil((anchor - lo) / width)
        above = math.ceil((hi - anchor) / width)
        if below + above > bins:
            return None
        start = anchor - below * width
        return start, start + bins * width

    if span == 0.0:
        return placed((hi - lo) / max(bins - 2, 1)) or (lo, hi)
    for between in range(bins, 0, -1):
        width = span / between
        if all(abs(round((k - anchor) / width) * width - (k - anchor)) < 1e-9 * span for k in inside):
            found = placed(width)
            if found:
                return found
    return lo, hi


def _density_values(g: Density, centers: np.ndarray) -> np.ndarray:
    values = np.asarray(g(centers), dtype=float)
    if values.shape != centers.shape:
        values = np.broadcast_to(values, centers.shape)
    if np.any(values < 0) or not np.all(np.isfinite(values)):
        raise InputError("density must be finite and non-negative at every bin center")
    return values


def hellinger(q: EmpiricalPdf, g: Density) -> float:
    """
    Hellinger distance sqrt(1 - sum_b sqrt(q_b g(c_b)) w), clamped to [0, 1].

    Raises:
        InputError: If g is negative (or not finite) at a bin center
    """
    values = _density_values(g, q.centers)
    affinity = float(np.sum(np.sqrt(q.densities * values)) * q.width)
    return float(math.sqrt(min(1.0, max(0.0, 1.0 - affinity))))


def kl_divergence(q: EmpiricalPdf, g: Density) -> float:
    """
    KL divergence sum_{b: q_b > 0} q_b ln(q_b / g(c_b)) w.

    When g exposes ``logpdf`` it is used so far tails cannot underflow.

    Raises:
        DivergenceUndefinedError: If g vanishes on a populated bin
    """
    populated = q.densities > 0
    centers = q.centers[populated]
    q_b = q.densities[populated]
    if hasattr(g, "logpdf"):
        log_g = np.asarray(g.logpdf(centers), dtype=float)
    else:
        values = _density_values(g, centers)
        with np.errstate(divide="ignore"):
            log_g = np.log(values)
    if not np.all(np.isfinite(log_g)):
        bad = centers[~np.isfinite(log_g)]
        raise DivergenceUndefinedError(
            f"model density is zero on {bad.size} populated bin(s), first at z={bad[0]:.6g}"
        )
    return float(np.sum(q_b * (np.log(q_b) - log_g)) * q.width)


def ks_statistic(samples, cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """Kolmogorov-Smirnov distance between the sample and a reference cdf."""
    x = _as_samples(samples, 1, "ks_statistic")
    return float(stats.kstest(x, cdf).statistic)


# === QUADRATURE UTILITIES ===
def trapezoid_integral(func: Density, lo: float, hi: float, points: int = QUADRATURE_POINTS) -> float:
    """Trapezoid rule on a uniform grid of ``points`` nodes."""
    grid = np.linspace(lo, hi, points)
    return float(integrate.trapezoid(func(grid), grid))


def hellinger_dense(f: Density, g: Density, lo: float, hi: float, points: int = QUADRATURE_POINTS) -> float:
    """Hellinger distance between two densities, integrated on a dense grid."""
    affinity = trapezoid_integral(lambda z: np.sqrt(f(z) * g(z)), lo, hi, points)
    return math.sqrt(min(1.0, max(0.0, 1.0 - affinity)))


def kl_dense(f: Density, g: Density, lo: float, hi: float, points: int = QUADRATURE_POINTS) -> float:
    """KL(f || g) integrated on a dense grid (points where f = 0 contribute 0)."""
    def integrand(z):
        fz = f(z)
        gz = g(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            term = fz * (np.log(fz) - np.log(gz))
        return np.where(fz > 0, term, 0.0)

    return trapezoid_integral(integrand, lo, hi, points)


def gaussian_hellinger(mu1: float, s1: float, mu2: float, s2: float) -> float:
    """Closed-form Hellinger distance between N(mu1, s1^2) and N(mu2, s2^2)."""
    var_sum = s1**2 + s2**2
    h2 = 1.0 - math.sqrt(2.0 * s1 * s2 / var_sum) * math.exp(-((mu1 - mu2) ** 2) / (4.0 * var_sum))
    return math.sqrt(max(0.0, h2))


def gaussian_kl(mu1: float, s1: float, mu2: float, s2: float) -> float:
    """Closed-form KL(N(mu1, s1^2) || N(mu2, s2^2))."""
    return math.log(s2 / s1) + (s1**2 + (mu1 - mu2) ** 2) / (2.0 * s2**2) - 0.5

