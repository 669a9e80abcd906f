"""
Clipping Noise Distribution

Closed-form cdf and piecewise three-Gaussian-mixture pdf of the clipping noise
z = g(x) for a Gaussian input, plus exact sampling through the noise map.

With u_lo(z) = (-A1 - z) / beta and u_hi(z) = (A2 - z) / beta the density is

    z >= (1 - beta) A2           f_x(u_lo) / beta
    -(1-beta) A1 < z < (1-beta) A2   f_x(z / (1 - beta)) / (1 - beta)
                                     + f_x(u_lo) / beta + f_x(u_hi) / beta
    z <= -(1 - beta) A1          f_x(u_hi) / beta

Exactly at a knot the outer (tail) branch is used.
"""

from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
from scipy import integrate, special, stats

from clipnoise.config import KNOT_GUARD, QUADRATURE_POINTS, TAIL_SPAN
from clipnoise.errors import InputError
from clipnoise.model.bussgang import beta_analytic, noise_map
from clipnoise.model.clipper import ClipConfig, phi_function, q_function

ArrayLike = Union[np.ndarray, float]


@dataclass(frozen=True, eq=False)
class ClipNoisePdf:
    """
    Analytic law of the clipping noise for one clipping configuration.

    Attributes:
        config: Clipping bounds and sigma_x of the Gaussian input
        beta: Bussgang attenuation factor in (0, 1)
    """

    config: ClipConfig
    beta: float

    def __post_init__(self):
        if not (0.0 < self.beta < 1.0):
            raise InputError(f"beta must lie in (0, 1), got {self.beta}")
        if 1.0 - self.beta < KNOT_GUARD:
            raise InputError(f"1 - beta = {1.0 - self.beta:.3e} leaves a degenerate middle branch")

    @classmethod
    def from_config(cls, cfg: ClipConfig, beta: Optional[float] = None) -> "ClipNoisePdf":
        """Model for ``cfg``; beta defaults to the closed-form value."""
        return cls(config=cfg, beta=beta_analytic(cfg) if beta is None else float(beta))

    @property
    def a1(self) -> float:
        return self.config.a1

    @property
    def a2(self) -> float:
        return self.config.a2

    @property
    def sigma_x(self) -> float:
        return self.config.sigma_x

    @property
    def lower_knot(self) -> float:
        return -(1.0 - self.beta) * self.a1

    @property
    def upper_knot(self) -> float:
        return (1.0 - self.beta) * self.a2

    def support_window(self) -> Tuple[float, float]:
        """Interval outside which less than 1e-12 of the mass lies."""
        span = TAIL_SPAN * self.beta * self.sigma_x
        return -self.a1 - span, self.a2 + span

    # --- branch terms (smooth, defined everywhere) ---
    def _low_rail_term(self, z: np.ndarray) -> np.ndarray:
        return stats.norm.pdf((-self.a1 - z) / self.beta, scale=self.sigma_x) / self.beta

    def _high_rail_term(self, z: np.ndarray) -> np.ndarray:
        return stats.norm.pdf((self.a2 - z) / self.beta, scale=self.sigma_x) / self.beta

    def _middle_term(self, z: np.ndarray) -> np.ndarray:
        gap = 1.0 - self.beta
        return stats.norm.pdf(z / gap, scale=self.sigma_x) / gap

    def _regions(self, z: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        above = z >= self.upper_knot
        below = z <= self.lower_knot
        return below, ~(above | below), above

    def pdf(self, z: ArrayLike) -> ArrayLike:
        """Density of the clipping noise at z."""
        z_arr = np.asarray(z, dtype=float)
        below, middle, above = self._regions(z_arr)
        low = self._low_rail_term(z_arr)
        high = self._high_rail_term(z_arr)
        inner = self._middle_term(z_arr)
        out = np.where(above, low, np.where(below, high, inner + low + high))
        return out if out.ndim else float(out)

    __call__ = pdf

    def logpdf(self, z: ArrayLike) -> ArrayLike:
        """Log-density, combining the active terms with logsumexp."""
        z_arr = np.asarray(z, dtype=float)
        below, middle, above = self._regions(z_arr)
        log_low = stats.norm.logpdf((-self.a1 - z_arr) / self.beta, scale=self.sigma_x) - np.log(self.beta)
        log_high = stats.norm.logpdf((self.a2 - z_arr) / self.beta, scale=self.sigma_x) - np.log(self.beta)
        gap = 1.0 - self.beta
        log_inner = stats.norm.logpdf(z_arr / gap, scale=self.sigma_x) - np.log(gap)

        terms = np.stack([
            np.where(below, -np.inf, log_low),
            np.where(above, -np.inf, log_high),
            np.where(middle, log_inner, -np.inf),
        ])
        out = special.logsumexp(terms, axis=0)
        return out if np.ndim(out) else float(out)

    def cdf(self, gamma: ArrayLike) -> ArrayLike:
        """
        Pr(z < gamma).

        Middle branch: Pr((-A1 - g)/beta < x < g/(1 - beta)) + Pr(x > (A2 - g)/beta).
        The first interval is never empty inside the middle region; the
        probability is still clamped at 0.
        """
        g = np.asarray(gamma, dtype=float)
        s = self.sigma_x
        beta = self.beta
        u_low = (-self.a1 - g) / (beta * s)
        u_high = (self.a2 - g) / (beta * s)
        u_mid = g / ((1.0 - beta) * s)

        interval = np.maximum(phi_function(u_mid) - phi_function(u_low), 0.0)
        below, middle, above = self._regions(g)
        out = np.where(above, q_function(u_low), np.where(below, q_function(u_high), interval + q_function(u_high)))
        return out if out.ndim else float(out)

    def empty_interval_points(self, gamma: ArrayLike) -> np.ndarray:
        """Middle-region gammas where the printed cdf interval would be empty (lower > upper)."""
        g = np.atleast_1d(np.asarray(gamma, dtype=float))
        _, middle, _ = self._regions(g)
        lower = (-self.a1 - g) / self.beta
        upper = g / (1.0 - self.beta)
        return g[middle & (lower > upper)]

    def region_masses(self) -> Tuple[float, float, float]:
        """Probabilities of the low rail, the linear region and the high rail of x."""
        cfg = self.config
        low = float(q_function(cfg.alpha1))
        high = float(q_function(cfg.alpha2))
        middle = float(phi_function(cfg.alpha2) - phi_function(-cfg.alpha1))
        return low, middle, high

    def knot_jumps(self) -> Tuple[float, float]:
        """
        Drop of the density when leaving the middle region at each knot.

        At the lower knot the middle and low-rail terms vanish, at the upper
        knot the middle and high-rail terms; both evaluate to
        (1/(1 - beta) + 1/beta) f_x(A).
        """
        weight = 1.0 / (1.0 - self.beta) + 1.0 / self.beta
        f_x = stats.norm(scale=self.sigma_x).pdf
        return float(weight * f_x(self.a1)), float(weight * f_x(self.a2))

    def _segments(self) -> Tuple[Tuple[float, float, object], ...]:
        lo, hi = self.support_window()
        return (
            (lo, self.lower_knot, self._high_rail_term),
            (self.lower_knot, self.upper_knot,
             lambda z: self._middle_term(z) + self._low_rail_term(z) + self._high_rail_term(z)),
            (self.upper_knot, hi, self._low_rail_term),
        )

    def total_mass(self, points: int = QUADRATURE_POINTS) -> float:
        """Trapezoid integral of the pdf over the support window, panel edges on the knots."""
        total = 0.0
        for start, stop, branch in self._segments():
            grid = np.linspace(start, stop, points)
            total += integrate.trapezoid(branch(grid), grid)
        return float(total)

    def moments(self) -> Tuple[float, float]:
        """Mean and variance of z by quadrature over the three segments."""
        first = second = 0.0
        for start, stop, branch in self._segments():
            first += integrate.quad(lambda z: z * branch(z), start, stop, limit=200)[0]
            second += integrate.quad(lambda z: z * z * branch(z), start, stop, limit=200)[0]
        return first, second - first**2


def pdf_eval(model: ClipNoisePdf, z: ArrayLike) -> ArrayLike:
    """Density of the clipping noise (see ClipNoisePdf.pdf)."""
    return model.pdf(z)


def cdf_eval(model: ClipNoisePdf, gamma: ArrayLike) -> ArrayLike:
    """Cumulative distribution Pr(z < gamma) (see ClipNoisePdf.cdf)."""
    return model.cdf(gamma)


def sample_noise(model: ClipNoisePdf, count: int, seed: int) -> np.ndarray:
    """
    Exact draws of the clipping noise: x ~ N(0, sigma_x^2) pushed through g(x).

    Raises:
        InputError: If count < 1
    """
    if count < 1:
        raise InputError(f"sample count must be >= 1, got {count}")
    rng = np.random.default_rng(seed)
    x = rng.normal(0.0, model.sigma_x, size=count)
    return noise_map(x, model.config, model.beta)
