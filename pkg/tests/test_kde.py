import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import trapezoid

from app.exceptions import DegenerateSampleError, DegenerateWeightsError, InvalidBandwidthError, InvalidParameterError
from app.models import BandwidthRule, KernelDensity, WeightedSample
from app.services.kde_service import (
    binned_error_bound, binned_grid, kde_eval, kde_eval_binned, kernel_matrix, pooled_bandwidths,
    silverman_bandwidth, weighted_silverman_bandwidth,
)


class TestSilverman:
    def test_constant_sample_is_degenerate(self):
        with pytest.raises(DegenerateSampleError):
            silverman_bandwidth([5, 5, 5, 5])

    def test_hand_computed_value(self):
        assert silverman_bandwidth([0, 1, 2, 3, 4]) == pytest.approx(0.9 * 2.0 / 1.34 * 5 ** -0.2, rel=1e-12)
        assert silverman_bandwidth([0, 1, 2, 3, 4]) == pytest.approx(0.9738, abs=1e-3)

    def test_normal_sample_matches_formula(self):
        x = np.random.default_rng(0).normal(size=100)
        sd = np.std(x, ddof=1)
        iqr = np.subtract(*np.percentile(x, [75, 25]))
        assert silverman_bandwidth(x) == pytest.approx(0.9 * min(sd, iqr / 1.34) * 100 ** -0.2)

    def test_zero_iqr_falls_back_to_sd(self):
        x = np.array([0.0] * 9 + [10.0])
        assert silverman_bandwidth(x) == pytest.approx(0.9 * np.std(x, ddof=1) * 10 ** -0.2)

    def test_single_point_is_degenerate(self):
        with pytest.raises(DegenerateSampleError):
            silverman_bandwidth([1.0])

    def test_weighted_equal_weights_close_to_unweighted(self):
        x = np.random.default_rng(1).normal(size=500)
        h = weighted_silverman_bandwidth(x, np.ones(500))
        assert h == pytest.approx(silverman_bandwidth(x), rel=0.02)

    def test_pooled_fixed_rule(self):
        values = np.random.default_rng(2).normal(size=(50, 3))
        assert pooled_bandwidths(values, BandwidthRule.fixed(0.3)).tolist() == [0.3, 0.3, 0.3]


class TestKdeEval:
    def test_single_point_peak(self):
        sample = WeightedSample.unweighted([0.0])
        assert kde_eval(sample, 1.0, [0.0])[0] == pytest.approx(1 / np.sqrt(2 * np.pi))

    def test_uniform_weights_match_unweighted(self):
        x = np.random.default_rng(3).uniform(size=200)
        query = np.linspace(-1, 2, 50)
        a = kde_eval(WeightedSample(x, np.full(200, 0.37)), 0.1, query)
        b = kde_eval(WeightedSample.unweighted(x), 0.1, query)
        assert np.array_equal(a, b)

    def test_non_positive_bandwidth(self):
        with pytest.raises(InvalidBandwidthError):
            kde_eval(WeightedSample.unweighted([0.0, 1.0]), 0.0, [0.5])

    def test_zero_weights_rejected(self):
        with pytest.raises(DegenerateWeightsError):
            WeightedSample([0.0, 1.0], [0.0, 0.0])

    def test_negative_weights_rejected(self):
        with pytest.raises(DegenerateWeightsError):
            WeightedSample([0.0, 1.0], [1.0, -0.5])

    def test_weights_shift_mass(self):
        sample = WeightedSample([0.0, 10.0], [0.9, 0.1])
        near_zero, near_ten = kde_eval(sample, 1.0, [0.0, 10.0])
        assert near_zero == pytest.approx(9 * near_ten, rel=1e-9)

    def test_kernel_density_wrapper(self):
        x = np.random.default_rng(4).normal(size=30)
        sample = WeightedSample.unweighted(x)
        assert np.array_equal(KernelDensity(sample, 0.4).evaluate([0.1, 0.2]),
                              kde_eval(sample, 0.4, [0.1, 0.2]))

    def test_kernel_matrix_rows_are_kde(self):
        x = np.random.default_rng(5).normal(size=40)
        K = kernel_matrix(x, 0.3)
        assert np.allclose(K.mean(axis=1), kde_eval(WeightedSample.unweighted(x), 0.3, x))

    @settings(max_examples=25, deadline=None)
    @given(
        points=st.lists(st.floats(-50, 50, allow_nan=False), min_size=1, max_size=30),
        bandwidth=st.floats(0.05, 5.0),
        seed=st.integers(0, 2 ** 16),
    )
    def test_integrates_to_one(self, points, bandwidth, seed):
        weights = np.random.default_rng(seed).uniform(0.1, 1.0, size=len(points))
        sample = WeightedSample(points, weights)
        lo, hi = min(points) - 10 * bandwidth, max(points) + 10 * bandwidth
        grid = np.linspace(lo, hi, 20_001)
        assert trapezoid(kde_eval(sample, bandwidth, grid), grid) == pytest.approx(1.0, abs=1e-3)

    @settings(max_examples=25, deadline=None)
    @given(points=st.lists(st.floats(-5, 5, allow_nan=False), min_size=1, max_size=20),
           query=st.lists(st.floats(-20, 20, allow_nan=False), min_size=1, max_size=10))
    def test_non_negative(self, points, query):
        assert np.all(kde_eval(WeightedSample.unweighted(points), 0.5, query) >= 0)


class TestBinned:
    def test_agrees_with_exact_on_uniform_data(self):
        x = np.random.default_rng(6).uniform(size=2000)
        sample = WeightedSample.unweighted(x)
        h = silverman_bandwidth(x)
        query = np.linspace(-0.2, 1.2, 300)
        diff = np.abs(kde_eval_binned(sample, h, 4096, query) - kde_eval(sample, h, query))
        assert diff.max() < 1e-4

    def test_single_point_peak_location(self):
        sample = WeightedSample.unweighted([2.5])
        grid, density = binned_grid(sample, 0.5, 512)
        assert abs(grid[np.argmax(density)] - 2.5) <= grid[1] - grid[0]

    def test_uniform_weights_equivalence(self):
        x = np.random.default_rng(8).normal(size=300)
        query = np.linspace(-3, 3, 40)
        a = kde_eval_binned(WeightedSample(x, np.full(300, 2.0)), 0.3, 1024, query)
        b = kde_eval_binned(WeightedSample.unweighted(x), 0.3, 1024, query)
        assert np.allclose(a, b, atol=1e-12)

    def test_zero_far_outside(self):
        sample = WeightedSample.unweighted([0.0, 1.0])
        assert kde_eval_binned(sample, 0.1, 256, [100.0])[0] == 0.0

    def test_error_bound_holds(self):
        x = np.random.default_rng(9).normal(size=500)
        sample = WeightedSample.unweighted(x)
        grid, _ = binned_grid(sample, 0.4, 512)
        query = np.linspace(grid[0], grid[-1], 200)
        diff = np.abs(kde_eval_binned(sample, 0.4, 512, query) - kde_eval(sample, 0.4, query))
        assert diff.max() <= binned_error_bound(0.4, grid[1] - grid[0]) + 1e-12

    def test_small_grid_rejected(self):
        with pytest.raises(InvalidParameterError):
            kde_eval_binned(WeightedSample.unweighted([0.0, 1.0]), 0.5, 16, [0.0])

    @pytest.mark.parametrize('grid_size', [128, 256, 512, 1024])
    def test_doubling_the_grid_does_not_increase_error(self, grid_size):
        x = np.random.default_rng(10).normal(size=400)
        sample = WeightedSample.unweighted(x)
        query = np.linspace(-3, 3, 250)
        exact = kde_eval(sample, 0.3, query)
        coarse = np.abs(kde_eval_binned(sample, 0.3, grid_size, query) - exact).max()
        fine = np.abs(kde_eval_binned(sample, 0.3, 2 * grid_size, query) - exact).max()
        assert fine <= coarse
