"""
Clipping and Biasing

Double-sided clipping of the OFDM frame to the LED range, the DC bias that
makes it unipolar, and the mixed discrete/continuous pdf of the clipped signal.
"""

import math
from dataclasses import dataclass
from typing import Callable, List, Tuple, Union

import numpy as np
from scipy import integrate, special, stats

from clipnoise.config import ALPHA_MAX, ALPHA_MIN
from clipnoise.errors import InputError
from clipnoise.model.signal_chain import TimeFrame


@dataclass(frozen=True)
class ClipConfig:
    """
    Clipping bounds and LED operating point.

    Bounds are relative to the nominal standard deviation of the unclipped
    signal: A1 = alpha1 * sigma_x, A2 = alpha2 * sigma_x. The bias puts the
    lower rail on the LED minimum current, so I_bias = A1 + i_L.

    Attributes:
        alpha1: Lower clipping bound in units of sigma_x
        alpha2: Upper clipping bound in units of sigma_x
        sigma_x: Nominal standard deviation of the unclipped signal
        i_l: LED minimum current (0 in all reference studies)
    """

    alpha1: float
    alpha2: float
    sigma_x: float = 1.0
    i_l: float = 0.0

    def __post_init__(self):
        for name in ("alpha1", "alpha2"):
            value = getattr(self, name)
            if not (ALPHA_MIN <= value <= ALPHA_MAX):
                raise InputError(
                    f"{name}={value} outside the operational range [{ALPHA_MIN}, {ALPHA_MAX}]"
                )
        if not self.sigma_x > 0 or not math.isfinite(self.sigma_x):
            raise InputError(f"sigma_x must be a positive finite number, got {self.sigma_x}")
        if not math.isfinite(self.i_l):
            raise InputError(f"i_l must be finite, got {self.i_l}")

    @classmethod
    def from_bounds(cls, a1: float, a2: float, sigma_x: float = 1.0, i_l: float = 0.0) -> "ClipConfig":
        """Build a config from absolute bounds A1, A2."""
        if sigma_x <= 0:
            raise InputError(f"sigma_x must be positive, got {sigma_x}")
        return cls(alpha1=a1 / sigma_x, alpha2=a2 / sigma_x, sigma_x=sigma_x, i_l=i_l)

    @property
    def a1(self) -> float:
        return self.alpha1 * self.sigma_x

    @property
    def a2(self) -> float:
        return self.alpha2 * self.sigma_x

    @property
    def i_bias(self) -> float:
        return self.a1 + self.i_l

    @property
    def i_h(self) -> float:
        return self.i_bias + self.a2


@dataclass(frozen=True, eq=False)
class ClippedFrame:
    """
    A frame after clipping.

    Attributes:
        samples: Clipped samples, all within [-A1, A2]
        config: The ClipConfig that produced them
        clipped_low_count: Samples sitting on -A1
        clipped_high_count: Samples sitting on A2
    """

    samples: np.ndarray
    config: ClipConfig
    clipped_low_count: int
    clipped_high_count: int


def clip_samples(x: Union[np.ndarray, float], cfg: ClipConfig) -> np.ndarray:
    """Clip raw samples: -A1 for x <= -A1, A2 for x >= A2, x in between."""
    x = np.asarray(x, dtype=float)
    return np.where(x <= -cfg.a1, -cfg.a1, np.where(x >= cfg.a2, cfg.a2, x))


def clip_frame(frame: Union[TimeFrame, np.ndarray], cfg: ClipConfig) -> ClippedFrame:
    """Clip a TimeFrame (or raw sample array) and count the rail hits."""
    x = frame.samples if isinstance(frame, TimeFrame) else np.asarray(frame, dtype=float)
    return ClippedFrame(
        samples=clip_samples(x, cfg),
        config=cfg,
        clipped_low_count=int(np.count_nonzero(x <= -cfg.a1)),
        clipped_high_count=int(np.count_nonzero(x >= cfg.a2)),
    )


def bias_frame(clipped: ClippedFrame) -> np.ndarray:
    """Add the DC bias; the result lies in the LED range [i_L, i_H]."""
    cfg = clipped.config
    return np.clip(clipped.samples + cfg.i_bias, cfg.i_l, cfg.i_h)


def q_function(y: Union[np.ndarray, float]) -> Union[np.ndarray, float]:
    """Upper-tail standard normal probability Q(y) = erfc(y / sqrt(2)) / 2."""
    return 0.5 * special.erfc(np.asarray(y, dtype=float) / math.sqrt(2.0))


def phi_function(y: Union[np.ndarray, float]) -> Union[np.ndarray, float]:
    """Standard normal cdf, computed as Q(-y) to keep lower-tail precision."""
    return q_function(-np.asarray(y, dtype=float))


@dataclass(frozen=True, eq=False)
class MixedPdf:
    """
    Distribution made of point masses plus a density on an interval.

    Attributes:
        atoms: (location, probability mass) pairs
        density: Continuous part, evaluated on (support[0], support[1])
        support: Interval carrying the continuous part
    """

    atoms: List[Tuple[float, float]]
    density: Callable[[np.ndarray], np.ndarray]
    support: Tuple[float, float]

    def continuous_mass(self) -> float:
        lo, hi = self.support
        value, _ = integrate.quad(self.density, lo, hi, epsabs=1e-14, epsrel=1e-12, limit=200)
        return value

    def atom_mass(self) -> float:
        return sum(mass for _, mass in self.atoms)

    def total_mass(self) -> float:
        return self.atom_mass() + self.continuous_mass()


def clipped_signal_pdf(cfg: ClipConfig) -> MixedPdf:
    """
    Pdf of the clipped signal: atoms Q(alpha1) at -A1 and Q(alpha2) at A2,
    and the N(0, sigma_x^2) density on (-A1, A2).
    """
    gaussian = stats.norm(loc=0.0, scale=cfg.sigma_x)
    return MixedPdf(
        atoms=[(-cfg.a1, float(q_function(cfg.alpha1))), (cfg.a2, float(q_function(cfg.alpha2)))],
        density=gaussian.pdf,
        support=(-cfg.a1, cfg.a2),
    )


def clipped_signal_moments(cfg: ClipConfig) -> Tuple[float, float, float]:
    """
    Mean, variance and kurtosis of the clipped signal from its mixed pdf.

    Returns:
        (mean, variance, kurtosis) with kurtosis = E{(x_c - m)^4} / var^2
    """
    pdf = clipped_signal_pdf(cfg)
    lo, hi = pdf.support

    def raw_moment(k: int) -> float:
        cont, _ = integrate.quad(lambda x: x**k * pdf.density(x), lo, hi, epsabs=1e-12, epsrel=1e-12, limit=200)
        return cont + sum(mass * loc**k for loc, mass in pdf.atoms)

    m1, m2, m3, m4 = (raw_moment(k) for k in range(1, 5))
    variance = m2 - m1**2
    central4 = m4 - 4 * m1 * m3 + 6 * m1**2 * m2 - 3 * m1**4
    return m1, variance, central4 / variance**2
