"""
Sweep Experiments
-----------------
Monte Carlo studies over grids of clipping bounds:
1. Kurtosis of the clipped signal (normality of x_c)
2. Hellinger distance between the simulated noise pdf and its two candidate models
3. KL divergence between the same pairs
4. Per-bin overlay of simulated and candidate densities for one point
5. Analytic, quadrature and empirical attenuation factors

Each grid point draws its frames from a sub-seed derived from the point's
coordinates, so a point's result does not depend on where it sits in the grid.
"""

import math
import struct
import sys
from dataclasses import asdict, dataclass
from datetime import datetime
from multiprocessing import Pool
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from clipnoise.config import (
    ALPHA_MAX, ALPHA_MIN, CSV_COLUMNS, DEFAULT_BINS, DEFAULT_FRAMES, DEFAULT_N,
    DEFAULT_QAM, DEFAULT_SEED, MIN_HISTOGRAM_SAMPLES, MIN_METRIC_SAMPLES,
    SUPPORTED_QAM, TOOL_NAME, TOOL_VERSION, resolve_threads,
)
from clipnoise.errors import DivergenceUndefinedError, InputError
from clipnoise.model.bussgang import beta_analytic, beta_empirical, beta_quadrature, decompose
from clipnoise.model.clipper import ClipConfig, clip_frame
from clipnoise.model.noise_model import ClipNoisePdf
from clipnoise.model.signal_chain import generate_block, mix64, nominal_sigma, qam_constellation
from clipnoise.model.stats import (
    EmpiricalPdf, aligned_range, empirical_pdf, fit_gaussian_ml, hellinger, kl_divergence, kurtosis,
)

# Frames transformed per batch while pooling a point
CHUNK_FRAMES = 512


def frames_for_samples(samples: int, n: int) -> int:
    """Smallest frame count giving at least ``samples`` samples."""
    if samples < 1:
        raise InputError(f"sample count must be >= 1, got {samples}")
    return max(1, math.ceil(samples / n))


@dataclass(frozen=True)
class SweepSpec:
    """
    Parameters of one sweep.

    Attributes:
        alpha1_grid: Lower clipping bounds (units of sigma_x)
        alpha2_grid: Upper clipping bounds; ignored when ``diagonal`` is set
        n: FFT size
        frames: OFDM frames simulated per grid point
        qam: Constellation order
        seed: Master seed
        bins: Histogram bins for the empirical pdf
        diagonal: Sweep alpha1 = alpha2 over alpha1_grid instead of the full product
    """

    alpha1_grid: Tuple[float, ...]
    alpha2_grid: Tuple[float, ...] = ()
    n: int = DEFAULT_N
    frames: int = DEFAULT_FRAMES
    qam: int = DEFAULT_QAM
    seed: int = DEFAULT_SEED
    bins: int = DEFAULT_BINS
    diagonal: bool = False

    def __post_init__(self):
        object.__setattr__(self, "alpha1_grid", tuple(float(a) for a in self.alpha1_grid))
        object.__setattr__(self, "alpha2_grid", tuple(float(a) for a in self.alpha2_grid))
        if not self.alpha1_grid:
            raise InputError("alpha1 grid is empty")
        if not self.diagonal and not self.alpha2_grid:
            raise InputError("alpha2 grid is empty")
        for a in self.alpha1_grid + (() if self.diagonal else self.alpha2_grid):
            if not (ALPHA_MIN <= a <= ALPHA_MAX):
                raise InputError(f"alpha={a} outside the operational range [{ALPHA_MIN}, {ALPHA_MAX}]")
        if self.n < 4 or self.n & (self.n - 1):
            raise InputError(f"n must be a power of two >= 4, got {self.n}", field="n")
        if self.qam not in SUPPORTED_QAM:
            raise InputError(f"qam must be one of {SUPPORTED_QAM}, got {self.qam}", field="qam")
        if self.frames < 1:
            raise InputError(f"frames must be >= 1, got {self.frames}", field="frames")
        if self.bins < 1:
            raise InputError(f"bins must be >= 1, got {self.bins}", field="bins")
        if not (0 <= self.seed < 2**64):
            raise InputError(f"seed must be a 64-bit unsigned integer, got {self.seed}", field="seed")

    @property
    def samples_per_point(self) -> int:
        return self.frames * self.n

    def points(self) -> List[Tuple[float, float]]:
        """Grid points in output order: alpha2 outer, alpha1 inner."""
        if self.diagonal:
            return [(a, a) for a in self.alpha1_grid]
        return [(a1, a2) for a2 in self.alpha2_grid for a1 in self.alpha1_grid]

    def require_samples(self, minimum: int) -> None:
        if self.samples_per_point < minimum:
            raise InputError(
                f"{self.samples_per_point} samples per point is below the minimum of {minimum}"
            )

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["alpha1_grid"] = list(self.alpha1_grid)
        data["alpha2_grid"] = list(self.alpha2_grid)
        return data


@dataclass
class SweepResult:
    """
    Rows of a sweep plus the metadata needed to reproduce it.

    Attributes:
        kind: kurtosis | hellinger | kl | pdf | beta
        rows: One row per grid point (per bin for pdf), columns per CSV_COLUMNS
        metadata: Seed, sample counts, tool version, timestamp, flagged points
    """

    kind: str
    rows: pd.DataFrame
    metadata: Dict[str, Any]


@dataclass(frozen=True, eq=False)
class PointSamples:
    """Pooled samples of one grid point."""

    config: ClipConfig
    beta: float
    x: Optional[np.ndarray]
    x_c: Optional[np.ndarray]
    z: Optional[np.ndarray]


def _float_bits(value: float) -> int:
    return struct.unpack("<Q", struct.pack("<d", float(value)))[0]


def point_seed(seed: int, alpha1: float, alpha2: float) -> int:
    """Sub-seed of a grid point, mixed from the IEEE-754 bits of its coordinates."""
    return mix64(mix64(seed, _float_bits(alpha1)), _float_bits(alpha2))


def point_config(spec: SweepSpec, alpha1: float, alpha2: float) -> ClipConfig:
    return ClipConfig(alpha1=alpha1, alpha2=alpha2, sigma_x=nominal_sigma(spec.n))


def simulate_point(
    spec: SweepSpec,
    alpha1: float,
    alpha2: float,
    keep: Sequence[str] = ("x", "x_c", "z"),
) -> PointSamples:
    """
    Run the transmitter chain for one grid point and pool the requested arrays.

    Args:
        spec: Sweep parameters
        alpha1: Lower clipping bound
        alpha2: Upper clipping bound
        keep: Subset of "x", "x_c", "z" to return; the others come back as None

    Returns:
        PointSamples with beta = beta_analytic of the point's config
    """
    constellation = qam_constellation(spec.qam)
    cfg = point_config(spec, alpha1, alpha2)
    beta = beta_analytic(cfg)
    seed = point_seed(spec.seed, alpha1, alpha2)

    pooled: Dict[str, List[np.ndarray]] = {name: [] for name in keep}
    for start in range(0, spec.frames, CHUNK_FRAMES):
        count = min(CHUNK_FRAMES, spec.frames - start)
        x = generate_block(start, count, spec.n, constellation, seed)
        clipped = clip_frame(x, cfg)
        parts = {"x": x, "x_c": clipped.samples}
        if "z" in pooled:
            parts["z"] = decompose(x, clipped, beta).noise
        for name in pooled:
            pooled[name].append(parts[name].ravel())

    arrays = {name: np.concatenate(chunks) for name, chunks in pooled.items()}
    return PointSamples(config=cfg, beta=beta, x=arrays.get("x"), x_c=arrays.get("x_c"), z=arrays.get("z"))


def noise_histogram(z: np.ndarray, model: ClipNoisePdf, bins: int) -> EmpiricalPdf:
    """Histogram of the noise samples with bin edges on the two knots of ``model``."""
    value_range = aligned_range(float(np.min(z)), float(np.max(z)), (model.lower_knot, model.upper_knot), bins)
    return empirical_pdf(z, bins, value_range=value_range)


# === POINT WORKERS (module level so a process pool can pickle them) ===
def _kurtosis_point(spec: SweepSpec, alpha1: float, alpha2: float) -> Dict[str, Any]:
    sim = simulate_point(spec, alpha1, alpha2, keep=("x_c",))
    return {"alpha1": alpha1, "alpha2": alpha2, "kurtosis": kurtosis(sim.x_c)}


def _distance_point(spec: SweepSpec, alpha1: float, alpha2: float, metric: str) -> Dict[str, Any]:
    sim = simulate_point(spec, alpha1, alpha2, keep=("z",))
    g1 = ClipNoisePdf.from_config(sim.config, sim.beta)
    q = noise_histogram(sim.z, g1, spec.bins)
    g2 = fit_gaussian_ml(sim.z)
    measure: Callable = hellinger if metric == "hellinger" else kl_divergence
    cols = CSV_COLUMNS[metric][2:]

    row: Dict[str, Any] = {"alpha1": alpha1, "alpha2": alpha2}
    flags = []
    for col, model in zip(cols, (g1, g2)):
        try:
            row[col] = measure(q, model)
        except DivergenceUndefinedError as e:
            row[col] = float("nan")
            flags.append(f"{col}: {e}")
    row["_flag"] = "; ".join(flags) or None
    return row


def _beta_point(spec: SweepSpec, alpha1: float, alpha2: float) -> Dict[str, Any]:
    sim = simulate_point(spec, alpha1, alpha2, keep=("x", "x_c"))
    return {
        "alpha1": alpha1,
        "alpha2": alpha2,
        "beta_analytic": sim.beta,
        "beta_quadrature": beta_quadrature(sim.config),
        "beta_empirical": beta_empirical(sim.x, sim.x_c),
    }


def _format_row(row: Dict[str, Any]) -> str:
    values = " ".join(
        f"{k}={v:.4f}" for k, v in row.items()
        if k not in ("alpha1", "alpha2", "_flag") and isinstance(v, float)
    )
    return f"   α1={row['alpha1']:.2f} α2={row['alpha2']:.2f} → {values}"


def _run_points(
    spec: SweepSpec,
    worker: Callable[..., Dict[str, Any]],
    extra: Tuple = (),
    threads: Optional[int] = None,
    quiet: bool = False,
) -> List[Dict[str, Any]]:
    points = spec.points()
    workers = min(resolve_threads(threads), len(points))
    args = [(spec, a1, a2) + tuple(extra) for a1, a2 in points]

    if workers > 1:
        with Pool(workers) as pool:
            rows = pool.starmap(worker, args)
    else:
        rows = [worker(*a) for a in args]

    if not quiet:
        for row in rows:
            print(_format_row(row), file=sys.stderr)
            if row.get("_flag"):
                print(f"   ⚠️  flagged: {row['_flag']}", file=sys.stderr)
    return rows


def _metadata(spec: SweepSpec, kind: str, **extra) -> Dict[str, Any]:
    data = {
        "tool": TOOL_NAME,
        "version": TOOL_VERSION,
        "kind": kind,
        "spec": spec.to_dict(),
        "seed": spec.seed,
        "samples_per_point": spec.samples_per_point,
        "generated_at": datetime.now().isoformat(timespec="seconds"),
    }
    data.update(extra)
    return data


def _banner(title: str, quiet: bool) -> None:
    if not quiet:
        print("=" * 70, file=sys.stderr)
        print(title, file=sys.stderr)
        print("=" * 70, file=sys.stderr)


def kurtosis_sweep(spec: SweepSpec, threads: Optional[int] = None, quiet: bool = False) -> SweepResult:
    """Kurtosis of the pooled clipped signal at every grid point."""
    _banner(f"KURTOSIS SWEEP ({len(spec.points())} points, {spec.samples_per_point:,} samples each)", quiet)
    rows = _run_points(spec, _kurtosis_point, threads=threads, quiet=quiet)
    frame = pd.DataFrame(rows, columns=CSV_COLUMNS["kurtosis"])
    return SweepResult(kind="kurtosis", rows=frame, metadata=_metadata(spec, "kurtosis"))


def distance_sweep(
    spec: SweepSpec,
    metric: str,
    threads: Optional[int] = None,
    quiet: bool = False,
) -> SweepResult:
    """
    Distance between the simulated noise pdf q and the two candidates
    g1 (analytic mixture) and g2 (ML Gaussian fit) at every grid point.

    Rows where KL is undefined keep NaN in the affected column and are listed
    under ``metadata["flagged"]``.
    """
    if metric not in ("hellinger", "kl"):
        raise InputError(f"metric must be 'hellinger' or 'kl', got {metric!r}")
    spec.require_samples(MIN_METRIC_SAMPLES)
    _banner(f"{metric.upper()} SWEEP ({len(spec.points())} points, {spec.samples_per_point:,} samples each)", quiet)
    rows = _run_points(spec, _distance_point, extra=(metric,), threads=threads, quiet=quiet)

    flagged = [
        {"alpha1": r["alpha1"], "alpha2": r["alpha2"], "reason": r["_flag"]}
        for r in rows if r.get("_flag")
    ]
    frame = pd.DataFrame(rows, columns=CSV_COLUMNS[metric])
    return SweepResult(kind=metric, rows=frame, metadata=_metadata(spec, metric, flagged=flagged))


def beta_table(spec: SweepSpec, threads: Optional[int] = None, quiet: bool = False) -> SweepResult:
    """Analytic, quadrature and chain-estimated attenuation factor per grid point."""
    _banner(f"ATTENUATION FACTOR ({len(spec.points())} points)", quiet)
    rows = _run_points(spec, _beta_point, threads=threads, quiet=quiet)
    frame = pd.DataFrame(rows, columns=CSV_COLUMNS["beta"])
    return SweepResult(kind="beta", rows=frame, metadata=_metadata(spec, "beta"))


def pdf_overlay(alpha1: float, alpha2: float, spec: SweepSpec, quiet: bool = False) -> SweepResult:
    """
    Per-bin table of the simulated noise density and both candidates at the bin centers.
    """
    spec.require_samples(MIN_HISTOGRAM_SAMPLES)
    point_spec = SweepSpec(
        alpha1_grid=(alpha1,), alpha2_grid=(alpha2,), n=spec.n, frames=spec.frames,
        qam=spec.qam, seed=spec.seed, bins=spec.bins,
    )
    _banner(f"PDF OVERLAY α1={alpha1} α2={alpha2} ({spec.samples_per_point:,} samples)", quiet)

    sim = simulate_point(point_spec, alpha1, alpha2, keep=("z",))
    g1 = ClipNoisePdf.from_config(sim.config, sim.beta)
    q = noise_histogram(sim.z, g1, spec.bins)
    g2 = fit_gaussian_ml(sim.z)
    centers = q.centers

    frame = pd.DataFrame({
        "z": centers,
        "q_empirical": q.densities,
        "g1_analytic": g1.pdf(centers),
        "g2_gaussfit": g2.pdf(centers),
    }, columns=CSV_COLUMNS["pdf"])

    if not quiet:
        print(f"   β={sim.beta:.6f}  μ_ez={g2.mu_ez:.4g}  σ_ez={g2.sigma_ez:.4g}  width={q.width:.4g}",
              file=sys.stderr)
    metadata = _metadata(
        point_spec, "pdf", beta=sim.beta, mu_ez=g2.mu_ez, sigma_ez=g2.sigma_ez,
        bin_width=q.width, range=[float(q.edges[0]), float(q.edges[-1])],
    )
    return SweepResult(kind="pdf", rows=frame, metadata=metadata)
