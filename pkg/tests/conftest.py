"""Shared fixtures for the clipnoise test suite."""

import numpy as np
import pytest

from clipnoise.model.clipper import ClipConfig
from clipnoise.model.noise_model import ClipNoisePdf
from clipnoise.pipeline.experiments import SweepSpec


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture
def unit_config() -> ClipConfig:
    """alpha1 = alpha2 = 1 on a unit-variance input."""
    return ClipConfig(alpha1=1.0, alpha2=1.0)


@pytest.fixture
def unit_model(unit_config) -> ClipNoisePdf:
    return ClipNoisePdf.from_config(unit_config)


@pytest.fixture
def small_spec() -> SweepSpec:
    """Desk-scale sweep: 2 x 2 grid, 128 frames of N = 1024 per point."""
    return SweepSpec(alpha1_grid=(1.0, 2.0), alpha2_grid=(2.0, 3.0), n=1024, frames=128, qam=16, seed=7)


@pytest.fixture
def metric_spec() -> SweepSpec:
    """Smallest sample count accepted by the distance sweeps (~2 x 10^5 per point)."""
    return SweepSpec(alpha1_grid=(0.5, 1.0), alpha2_grid=(2.0,), n=1024, frames=200, qam=16, seed=11)
