"""Tests for the analytic clipping-noise distribution."""

import numpy as np
import pytest
from scipy import integrate

from clipnoise.errors import InputError
from clipnoise.model.bussgang import beta_analytic, noise_map
from clipnoise.model.clipper import ClipConfig, phi_function
from clipnoise.model.noise_model import ClipNoisePdf, cdf_eval, pdf_eval, sample_noise
from clipnoise.model.stats import ks_statistic

GRID = (0.5, 1.0, 2.0, 3.0)


def _off_knot_points(model: ClipNoisePdf, count: int = 50) -> np.ndarray:
    lo, hi = -model.a1 - 3 * model.beta * model.sigma_x, model.a2 + 3 * model.beta * model.sigma_x
    z = np.linspace(lo, hi, count + 2)
    keep = (np.abs(z - model.lower_knot) > 1e-3) & (np.abs(z - model.upper_knot) > 1e-3)
    return z[keep][:count]


class TestConstruction:
    def test_default_beta(self, unit_config):
        assert ClipNoisePdf.from_config(unit_config).beta == pytest.approx(beta_analytic(unit_config))

    @pytest.mark.parametrize("beta", [0.0, 1.0, -0.2, 1.5])
    def test_beta_outside_unit_interval(self, unit_config, beta):
        with pytest.raises(InputError):
            ClipNoisePdf(config=unit_config, beta=beta)

    def test_knots(self, unit_model):
        gap = 1 - unit_model.beta
        assert unit_model.lower_knot == pytest.approx(-gap)
        assert unit_model.upper_knot == pytest.approx(gap)


class TestPdf:
    @pytest.mark.parametrize("alpha1", GRID)
    @pytest.mark.parametrize("alpha2", GRID)
    def test_normalized(self, alpha1, alpha2):
        model = ClipNoisePdf.from_config(ClipConfig(alpha1, alpha2))
        assert abs(model.total_mass() - 1.0) < 1e-6

    def test_peak_value_unit_bounds(self, unit_model):
        assert pdf_eval(unit_model, 0.0) == pytest.approx(1.657, abs=0.02)

    def test_symmetric_bounds(self):
        model = ClipNoisePdf.from_config(ClipConfig(1.5, 1.5, sigma_x=0.9))
        z = _off_knot_points(model)
        np.testing.assert_allclose(model.pdf(z), model.pdf(-z), rtol=1e-12, atol=1e-300)

    def test_outer_branch_at_knot(self, unit_model):
        knot = unit_model.upper_knot
        tail = unit_model._low_rail_term(np.array(knot))
        assert unit_model.pdf(knot) == pytest.approx(float(tail))

    def test_knot_jumps(self, unit_model):
        eps = 1e-9
        for knot, jump in zip((unit_model.lower_knot, unit_model.upper_knot), unit_model.knot_jumps()):
            inside = knot + eps if knot < 0 else knot - eps
            assert unit_model.pdf(inside) - unit_model.pdf(knot) == pytest.approx(jump, rel=1e-6)

    def test_logpdf_matches_pdf(self):
        model = ClipNoisePdf.from_config(ClipConfig(0.5, 2.0))
        z = _off_knot_points(model)
        np.testing.assert_allclose(np.exp(model.logpdf(z)), model.pdf(z), rtol=1e-10)

    def test_logpdf_finite_in_far_tails(self):
        model = ClipNoisePdf.from_config(ClipConfig(5.0, 2.0))
        assert np.all(np.isfinite(model.logpdf(np.array([-60.0, 60.0]))))

    def test_moments_match_noise_map(self):
        model = ClipNoisePdf.from_config(ClipConfig(1.0, 2.0))
        mean, var = model.moments()
        x = np.random.default_rng(3).normal(size=1_000_000)
        z = noise_map(x, model.config, model.beta)
        assert mean == pytest.approx(np.mean(z), abs=2e-3)
        assert var == pytest.approx(np.var(z), rel=0.01)


class TestCdf:
    def test_upper_limit(self):
        model = ClipNoisePdf.from_config(ClipConfig(2.0, 1.0))
        gamma = model.a1 + 10 * model.beta * model.sigma_x
        assert abs(cdf_eval(model, gamma) - 1.0) < 1e-9

    def test_symmetric_median(self):
        model = ClipNoisePdf.from_config(ClipConfig(2.0, 2.0))
        assert abs(cdf_eval(model, 0.0) - 0.5) < 1e-9

    @pytest.mark.parametrize("alpha1,alpha2", [(0.5, 2.0), (1.0, 1.0), (3.0, 0.5)])
    def test_matches_integrated_pdf(self, alpha1, alpha2):
        model = ClipNoisePdf.from_config(ClipConfig(alpha1, alpha2))
        lo, _ = model.support_window()
        breaks = [model.lower_knot, model.upper_knot]
        for gamma in _off_knot_points(model):
            points = [b for b in breaks if lo < b < gamma]
            area, _ = integrate.quad(model.pdf, lo, gamma, points=points or None, epsabs=1e-12, limit=200)
            assert cdf_eval(model, gamma) == pytest.approx(area, abs=1e-6)

    def test_derivative_is_pdf(self):
        model = ClipNoisePdf.from_config(ClipConfig(1.0, 3.0))
        z = _off_knot_points(model)
        h = 1e-5
        derivative = (model.cdf(z + h) - model.cdf(z - h)) / (2 * h)
        np.testing.assert_allclose(derivative, model.pdf(z), atol=1e-6)

    def test_middle_interval_never_empty(self):
        for a1 in GRID:
            for a2 in GRID:
                model = ClipNoisePdf.from_config(ClipConfig(a1, a2))
                z = np.linspace(model.lower_knot, model.upper_knot, 1001)
                assert model.empty_interval_points(z).size == 0

    def test_region_masses(self, unit_model):
        low, middle, high = unit_model.region_masses()
        assert low + middle + high == pytest.approx(1.0, abs=1e-14)
        assert middle == pytest.approx(phi_function(1.0) - phi_function(-1.0))

    @pytest.mark.parametrize("alpha1,alpha2", [(0.5, 2.0), (1.0, 1.0), (3.0, 0.5), (5.0, 5.0)])
    def test_nondecreasing(self, alpha1, alpha2):
        model = ClipNoisePdf.from_config(ClipConfig(alpha1, alpha2))
        lo, hi = model.support_window()
        values = model.cdf(np.linspace(lo, hi, 10_000))
        assert np.all(np.diff(values) >= -1e-12)
        assert values[0] >= 0.0 and values[-1] <= 1.0 + 1e-12


class TestSampling:
    def test_count_validation(self, unit_model):
        with pytest.raises(InputError):
            sample_noise(unit_model, 0, seed=1)

    def test_reproducible(self, unit_model):
        np.testing.assert_array_equal(sample_noise(unit_model, 100, seed=4), sample_noise(unit_model, 100, seed=4))

    def test_middle_region_mass(self):
        model = ClipNoisePdf.from_config(ClipConfig(0.5, 2.0))
        z = sample_noise(model, 1_000_000, seed=8)
        middle = np.mean((z > model.lower_knot) & (z < model.upper_knot))
        expected = model.cdf(model.upper_knot) - model.cdf(model.lower_knot)
        assert middle == pytest.approx(expected, abs=0.0025)

    def test_symmetric_mean(self, unit_model):
        z = sample_noise(unit_model, 1_000_000, seed=9)
        assert abs(np.mean(z)) < 5 * np.std(z) / 1000

    @pytest.mark.parametrize("alpha1,alpha2", [(1.0, 1.0), (0.5, 2.0), (2.0, 3.0)])
    def test_ks_against_cdf(self, alpha1, alpha2):
        model = ClipNoisePdf.from_config(ClipConfig(alpha1, alpha2))
        z = sample_noise(model, 200_000, seed=21)
        assert ks_statistic(z, model.cdf) < 0.005
