"""
DCO-OFDM Signal Chain

Random bits -> Gray-coded M-QAM -> Hermitian-symmetric subcarrier vector ->
unitary IFFT -> real, approximately Gaussian time-domain frames.
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from clipnoise.config import MIN_FFT_SIZE, RESIDUE_TOLERANCE, SUPPORTED_QAM
from clipnoise.errors import ConsistencyError, InputError

_MASK64 = (1 << 64) - 1
_GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_MIX_MUL1 = 0xBF58476D1CE4E5B9
_MIX_MUL2 = 0x94D049BB133111EB


@dataclass(frozen=True, eq=False)
class QamConstellation:
    """
    Square Gray-coded M-QAM constellation with unit average energy.

    ``points[label]`` is the symbol for the integer ``label`` whose most
    significant ``bits_per_symbol / 2`` bits select the in-phase level and the
    remaining bits the quadrature level. Each axis is Gray coded and the level
    for Gray word ``g`` is ``(L - 1) - 2 * gray_to_binary(g)``, so the all-zero
    word sits at the top-right corner.

    Attributes:
        order: Number of points M
        points: Complex symbols indexed by label
    """

    order: int
    points: np.ndarray

    @property
    def bits_per_symbol(self) -> int:
        return int(math.log2(self.order))

    def average_energy(self) -> float:
        return float(np.mean(np.abs(self.points) ** 2))


def _gray_to_binary(g: np.ndarray) -> np.ndarray:
    b = g.copy()
    shift = g >> 1
    while np.any(shift):
        b ^= shift
        shift >>= 1
    return b


@lru_cache(maxsize=None)
def qam_constellation(order: int) -> QamConstellation:
    """
    Build (and cache) the Gray-coded square constellation of the given order.

    Args:
        order: 4, 16, 64 or 256

    Returns:
        QamConstellation normalized to E{|S|^2} = 1
    """
    if order not in SUPPORTED_QAM:
        raise InputError(f"QAM order must be one of {SUPPORTED_QAM}, got {order}")

    half_bits = int(math.log2(order)) // 2
    side = 1 << half_bits
    labels = np.arange(order)
    gray_i = labels >> half_bits
    gray_q = labels & (side - 1)
    level_i = (side - 1) - 2 * _gray_to_binary(gray_i)
    level_q = (side - 1) - 2 * _gray_to_binary(gray_q)

    # Mean energy of the {±1, ±3, ...}^2 lattice is 2(M - 1)/3
    scale = math.sqrt(2.0 * (order - 1) / 3.0)
    points = (level_i + 1j * level_q) / scale
    points.setflags(write=False)
    return QamConstellation(order=order, points=points)


def map_bits(bits: Sequence[int], constellation: QamConstellation) -> np.ndarray:
    """
    Map a bit sequence onto constellation symbols, one symbol per bit group.

    Raises:
        InputError: If the bit count is not a multiple of bits_per_symbol or
            the sequence holds values other than 0 and 1
    """
    b = np.asarray(bits)
    k = constellation.bits_per_symbol
    if b.ndim != 1 or b.size % k != 0:
        raise InputError(f"bit count {b.size} is not a multiple of {k} bits per symbol")
    if b.size and not np.all((b == 0) | (b == 1)):
        raise InputError("bits must be 0 or 1")

    weights = 1 << np.arange(k - 1, -1, -1)
    labels = b.reshape(-1, k).astype(np.int64) @ weights
    return constellation.points[labels]


@dataclass(frozen=True, eq=False)
class HermitianVector:
    """
    Frequency-domain OFDM vector with I_0 = I_{N/2} = 0 and I_{N-k} = conj(I_k).

    Attributes:
        entries: Complex subcarrier values, length N
    """

    entries: np.ndarray

    @property
    def n(self) -> int:
        return int(self.entries.shape[-1])


def _check_fft_size(n: int) -> None:
    if n < MIN_FFT_SIZE or n & (n - 1):
        raise InputError(f"FFT size must be a power of two >= {MIN_FFT_SIZE}, got {n}")


def build_hermitian(symbols: Sequence[complex], n: int) -> HermitianVector:
    """
    Place N/2 - 1 data symbols on subcarriers 1..N/2-1 and mirror their conjugates.

    Also accepts a 2-D array (one row of symbols per frame).

    Raises:
        InputError: If N is not a valid FFT size or the symbol count is not N/2 - 1
    """
    _check_fft_size(n)
    s = np.asarray(symbols, dtype=complex)
    if s.shape[-1:] != (n // 2 - 1,):
        raise InputError(f"expected {n // 2 - 1} symbols for N={n}, got {s.shape[-1] if s.ndim else 0}")

    entries = np.zeros(s.shape[:-1] + (n,), dtype=complex)
    entries[..., 1:n // 2] = s
    entries[..., n // 2 + 1:] = np.conj(s[..., ::-1])
    return HermitianVector(entries=entries)


def _bit_reversal(n: int) -> np.ndarray:
    levels = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    for b in range(levels):
        rev |= ((idx >> b) & 1) << (levels - 1 - b)
    return rev


def radix2_fft(values: np.ndarray, inverse: bool = False) -> np.ndarray:
    """
    Iterative radix-2 decimation-in-time FFT over the last axis (unscaled).

    Args:
        values: Complex array whose last dimension is a power of two
        inverse: Use exp(+j...) twiddles instead of exp(-j...)

    Returns:
        Transformed array with the same shape
    """
    x = np.asarray(values, dtype=complex)
    n = x.shape[-1]
    _check_fft_size(n)
    lead = x.shape[:-1]
    x = x[..., _bit_reversal(n)]

    sign = 1.0 if inverse else -1.0
    size = 2
    while size <= n:
        half = size // 2
        twiddle = np.exp(sign * 2j * np.pi * np.arange(half) / size)
        blocks = x.reshape(lead + (n // size, size))
        even = blocks[..., :half]
        odd = blocks[..., half:] * twiddle
        x = np.concatenate((even + odd, even - odd), axis=-1).reshape(lead + (n,))
        size *= 2
    return x


def nominal_sigma(n: int) -> float:
    """Standard deviation of the chain output for unit-energy QAM: sqrt((N-2)/N)."""
    return math.sqrt((n - 2) / n)


@dataclass(frozen=True, eq=False)
class TimeFrame:
    """
    One OFDM symbol in the time domain.

    Attributes:
        samples: Real samples x_0..x_{N-1}
        sigma_x: Nominal standard deviation of the unclipped process
    """

    samples: np.ndarray
    sigma_x: float

    @property
    def n(self) -> int:
        return int(self.samples.shape[-1])


def _real_part_checked(time_domain: np.ndarray) -> np.ndarray:
    peak = np.max(np.abs(time_domain.real), initial=0.0)
    residue = np.max(np.abs(time_domain.imag), initial=0.0)
    if peak == 0.0:
        if residue > RESIDUE_TOLERANCE:
            raise ConsistencyError(f"IFFT of a zero vector left imaginary residue {residue:.3e}")
    elif residue / peak > RESIDUE_TOLERANCE:
        raise ConsistencyError(
            f"IFFT output is not real: relative imaginary residue {residue / peak:.3e}"
        )
    return np.ascontiguousarray(time_domain.real)


def ifft(vector: HermitianVector) -> TimeFrame:
    """
    Unitary inverse transform x_n = (1/sqrt(N)) sum_k I_k exp(+j 2 pi k n / N).

    Raises:
        InputError: If N is not a power of two
        ConsistencyError: If the imaginary residue exceeds RESIDUE_TOLERANCE
    """
    n = vector.n
    _check_fft_size(n)
    time_domain = radix2_fft(vector.entries, inverse=True) / math.sqrt(n)
    return TimeFrame(samples=_real_part_checked(time_domain), sigma_x=nominal_sigma(n))


def mix64(seed: int, index: int) -> int:
    """
    SplitMix64 finalizer applied to seed + (index + 1) * golden gamma.

    Gives each frame an independent, order-free 64-bit sub-seed.
    """
    z = (seed + (index + 1) * _GOLDEN_GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * _MIX_MUL1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX_MUL2) & _MASK64
    return z ^ (z >> 31)


def frame_bits(seed: int, index: int, n: int, constellation: QamConstellation) -> np.ndarray:
    """Random payload bits of frame ``index`` (PCG64 seeded by mix64(seed, index))."""
    rng = np.random.default_rng(mix64(seed, index))
    return rng.integers(0, 2, size=(n // 2 - 1) * constellation.bits_per_symbol, dtype=np.uint8)


def _frame_symbols(seed: int, index: int, n: int, constellation: QamConstellation) -> np.ndarray:
    return map_bits(frame_bits(seed, index, n, constellation), constellation)


def generate_frames(count: int, n: int, constellation: QamConstellation, seed: int) -> Iterator[TimeFrame]:
    """
    Stream ``count`` frames; frame i depends only on (seed, i).

    Raises:
        InputError: If count is negative or N is invalid
    """
    if count < 0:
        raise InputError(f"frame count must be >= 0, got {count}")
    _check_fft_size(n)
    for i in range(count):
        yield ifft(build_hermitian(_frame_symbols(seed, i, n, constellation), n))


def generate_block(start: int, count: int, n: int, constellation: QamConstellation, seed: int) -> np.ndarray:
    """
    Frames start..start+count-1 as a (count, N) array, transformed in one batch.

    Row i is identical to the samples of frame start+i from generate_frames.
    """
    if count < 0 or start < 0:
        raise InputError("block start and count must be >= 0")
    _check_fft_size(n)
    if count == 0:
        return np.zeros((0, n))
    symbols = np.stack([_frame_symbols(seed, start + i, n, constellation) for i in range(count)])
    entries = build_hermitian(symbols, n).entries
    time_domain = radix2_fft(entries, inverse=True) / math.sqrt(n)
    return _real_part_checked(time_domain)
