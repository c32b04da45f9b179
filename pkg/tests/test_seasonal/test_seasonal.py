"""Tests for seasonal profile estimation and removal."""

import math

import numpy as np
import pytest

from polichange.exceptions import ArgumentError
from polichange.ingest import CategoryMatrix, Month
from polichange.seasonal import (
    SeasonalProfile,
    deseasonalize_matrix,
    estimate_seasonal_profile,
    remove_seasonal,
)
from polichange.synthetic import generator

PATTERN = np.array([3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0, 5.0, 3.0, 5.0, 8.0])


class TestEstimateSeasonalProfile:
    """Tests for estimate_seasonal_profile."""

    def test_constant_series(self):
        """Test a constant series has a zero profile."""
        profile = estimate_seasonal_profile([5.0] * 24, 12)
        assert profile.offsets == (0.0,) * 12

    def test_exact_periodic_recovery(self):
        """Test a repeated pattern is recovered as pattern minus its mean."""
        profile = estimate_seasonal_profile(np.tile(PATTERN, 2), 12)
        np.testing.assert_allclose(profile.offsets, PATTERN - PATTERN.mean(), atol=1e-12)

    def test_offsets_centered(self, rng):
        """Test offsets sum to zero, including with a partial final cycle."""
        profile = estimate_seasonal_profile(rng.normal(size=31), 12)
        assert len(profile.offsets) == 12
        assert abs(math.fsum(profile.offsets)) <= 1e-9

    def test_noisy_recovery(self):
        """Test a trend plus seasonal plus noise series recovers the seasonal within 3 sigma / sqrt(T/12)."""
        T, sigma = 96, 1.0
        t = np.arange(T)
        seasonal = 2.0 * np.sin(2 * np.pi * t / 12)
        # A step keeps phase means unbiased over whole years
        trend = np.where(t >= 48, 3.0, 0.0)
        series = trend + seasonal + generator(3).normal(0.0, sigma, T)
        profile = estimate_seasonal_profile(series, 12)
        truth = seasonal[:12] - seasonal[:12].mean()
        tolerance = 3 * sigma / math.sqrt(T / 12)
        assert np.max(np.abs(np.asarray(profile.offsets) - truth)) <= tolerance

    def test_phase_shift(self):
        """Test a nonzero phase indexes offsets by calendar position."""
        series = np.tile(PATTERN, 2)[3:27]
        profile = estimate_seasonal_profile(series, 12, phase=3)
        np.testing.assert_allclose(profile.offsets, PATTERN - PATTERN.mean(), atol=1e-12)

    def test_too_short(self):
        """Test a series shorter than one period is an argument error."""
        with pytest.raises(ArgumentError):
            estimate_seasonal_profile([1.0] * 11, 12)


class TestRemoveSeasonal:
    """Tests for remove_seasonal."""

    def test_zero_profile_is_identity(self, rng):
        """Test removing a zero profile leaves the series unchanged."""
        series = rng.normal(size=30)
        np.testing.assert_array_equal(remove_seasonal(series, SeasonalProfile.zero()), series)

    def test_periodic_series_cancels(self):
        """Test a pure periodic series minus its own profile is flat."""
        series = np.tile(PATTERN, 2)
        residual = remove_seasonal(series, estimate_seasonal_profile(series, 12))
        assert np.var(residual) <= 1e-18

    def test_step_recovered(self):
        """Test a step plus seasonal overlay leaves the step up to a constant."""
        step = np.where(np.arange(48) >= 24, 10.0, 0.0)
        series = step + np.tile(PATTERN, 4)
        residual = remove_seasonal(series, estimate_seasonal_profile(series, 12))
        np.testing.assert_allclose(residual - residual.mean(), step - step.mean(), atol=1e-9)

    def test_equal_phase_means(self, rng):
        """Test the residual has equal per-phase means for whole cycles."""
        series = rng.normal(size=60) + np.tile(PATTERN, 5)
        residual = remove_seasonal(series, estimate_seasonal_profile(series, 12))
        phase_means = residual.reshape(5, 12).mean(axis=0)
        np.testing.assert_allclose(phase_means, residual.mean(), atol=1e-9)

    def test_linearity(self, rng):
        """Test shifting the series by a constant shifts the residual."""
        series = rng.normal(size=36)
        base = remove_seasonal(series, estimate_seasonal_profile(series, 12))
        shifted = remove_seasonal(series + 7.5, estimate_seasonal_profile(series + 7.5, 12))
        np.testing.assert_allclose(shifted, base + 7.5, atol=1e-9)

    def test_length_preserved(self, rng):
        """Test the output has the input length."""
        series = rng.normal(size=29)
        assert remove_seasonal(series, estimate_seasonal_profile(series, 12)).shape == (29,)


class TestDeseasonalizeMatrix:
    """Tests for matrix-wide deseasonalization."""

    def test_january_is_phase_zero(self):
        """Test profiles are aligned to the calendar whatever the start month."""
        series = np.tile(PATTERN, 3)[4:28]
        matrix = CategoryMatrix.from_array(Month(2010, 5), ["a"], series[None, :], kind="residual")
        residual, profiles = deseasonalize_matrix(matrix)
        np.testing.assert_allclose(profiles["a"].offsets, PATTERN - PATTERN.mean(), atol=1e-12)
        assert residual.kind == "residual"
        assert np.var(residual.row("a")) <= 1e-18

    def test_counts_become_residuals(self, rng):
        """Test a count matrix yields a residual matrix with one profile per row."""
        counts = rng.poisson(10.0, size=(2, 24))
        matrix = CategoryMatrix.from_array(Month(2010, 1), ["a", "b"], counts)
        residual, profiles = deseasonalize_matrix(matrix)
        assert residual.categories == ("a", "b")
        assert set(profiles) == {"a", "b"}
        assert residual.length == 24

    def test_too_short(self):
        """Test a matrix shorter than a year is an argument error."""
        matrix = CategoryMatrix.from_array(Month(2010, 1), ["a"], np.ones((1, 6)))
        with pytest.raises(ArgumentError):
            deseasonalize_matrix(matrix)
