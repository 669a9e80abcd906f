"""
Bussgang Decomposition

Splits the clipped signal into an attenuated copy of the input plus clipping
noise, x_c = beta * x + z, with beta = E{x_c x} / E{x^2}.
"""

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import integrate, stats

from clipnoise.errors import DegenerateInputError, InputError
from clipnoise.model.clipper import ClipConfig, ClippedFrame, q_function
from clipnoise.model.signal_chain import TimeFrame


@dataclass(frozen=True, eq=False)
class LinearDecomposition:
    """
    Result of the Bussgang split of one frame.

    Attributes:
        beta: Attenuation factor in (0, 1)
        noise: Clipping noise z_n = x_c,n - beta * x_n
        config: Clipping configuration of the source frame
    """

    beta: float
    noise: np.ndarray
    config: ClipConfig


def beta_analytic(cfg: ClipConfig) -> float:
    """
    Closed-form attenuation factor for a zero-mean Gaussian input.

    Integrating clip(x) * x against the N(0, sigma^2) density over the three
    regions, the boundary terms of the middle region cancel those of the two
    rails and leave beta = 1 - Q(alpha1) - Q(alpha2).
    """
    if not isinstance(cfg, ClipConfig):
        raise InputError(f"expected a ClipConfig, got {type(cfg).__name__}")
    return float(1.0 - q_function(cfg.alpha1) - q_function(cfg.alpha2))


def beta_quadrature(cfg: ClipConfig) -> float:
    """Attenuation factor from adaptive quadrature of E{clip(x) x} / sigma^2."""
    density = stats.norm(loc=0.0, scale=cfg.sigma_x).pdf
    a1, a2 = cfg.a1, cfg.a2
    opts = dict(epsabs=1e-15, epsrel=1e-13, limit=200)

    low, _ = integrate.quad(lambda x: -a1 * x * density(x), -np.inf, -a1, **opts)
    mid, _ = integrate.quad(lambda x: x * x * density(x), -a1, a2, **opts)
    high, _ = integrate.quad(lambda x: a2 * x * density(x), a2, np.inf, **opts)
    return (low + mid + high) / cfg.sigma_x**2


def beta_empirical(x: np.ndarray, x_c: np.ndarray) -> float:
    """
    Sample estimate sum(x_c * x) / sum(x^2).

    Raises:
        InputError: If the vectors differ in length or hold fewer than 2 samples
        DegenerateInputError: If x has zero variance
    """
    x = np.asarray(x, dtype=float).ravel()
    x_c = np.asarray(x_c, dtype=float).ravel()
    if x.size != x_c.size:
        raise InputError(f"length mismatch: {x.size} input vs {x_c.size} clipped samples")
    if x.size < 2:
        raise InputError("beta_empirical needs at least 2 samples")
    if np.var(x) == 0.0:
        raise DegenerateInputError("input samples have zero variance")
    return float(np.dot(x_c, x) / np.dot(x, x))


def decompose(
    frame: Union[TimeFrame, np.ndarray],
    clipped: ClippedFrame,
    beta: float,
) -> LinearDecomposition:
    """
    Clipping noise z = x_c - beta * x for an aligned (input, clipped) pair.

    Raises:
        InputError: If the two frames have different lengths
    """
    x = frame.samples if isinstance(frame, TimeFrame) else np.asarray(frame, dtype=float)
    if x.shape != clipped.samples.shape:
        raise InputError(f"frame shape {x.shape} does not match clipped shape {clipped.samples.shape}")
    return LinearDecomposition(beta=beta, noise=clipped.samples - beta * x, config=clipped.config)


def noise_map(x: Union[np.ndarray, float], cfg: ClipConfig, beta: float) -> np.ndarray:
    """
    Clipping noise as a function of the input sample:
    -A1 - beta x below the lower rail, (1 - beta) x inside, A2 - beta x above.
    """
    x = np.asarray(x, dtype=float)
    inside = (1.0 - beta) * x
    return np.where(x <= -cfg.a1, -cfg.a1 - beta * x, np.where(x >= cfg.a2, cfg.a2 - beta * x, inside))


def reconstruction_error(x: np.ndarray, x_c: np.ndarray, decomposition: LinearDecomposition) -> float:
    """Largest |x_c - (beta x + z)| over the frame."""
    rebuilt = decomposition.beta * np.asarray(x, dtype=float) + decomposition.noise
    return float(np.max(np.abs(np.asarray(x_c) - rebuilt), initial=0.0))
