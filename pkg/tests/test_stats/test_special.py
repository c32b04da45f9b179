"""Tests for the chi-squared survival function."""

import math

import pytest

from polichange.exceptions import ArgumentError
from polichange.stats import chi_square_sf, regularized_gamma_p, regularized_gamma_q

# (df, x) pairs checked against the closed-form survival function
REFERENCE_POINTS = [
    (1, 0.1),
    (1, 1.0),
    (1, 3.841458821),
    (1, 10.0),
    (2, 0.5),
    (2, 7.0),
    (3, 0.35),
    (3, 2.5),
    (3, 11.3),
    (4, 1.0),
    (4, 9.4877),
    (5, 0.8),
    (5, 4.35),
    (5, 20.0),
    (7, 6.0),
    (8, 2.7),
    (10, 9.34),
    (10, 25.0),
    (12, 30.5),
    (15, 7.26),
    (15, 14.3),
    (20, 19.3),
    (20, 45.0),
    (25, 24.3),
    (29, 18.0),
    (30, 29.3),
    (30, 55.0),
]

# Published upper-tail critical values: (df, x, p)
CRITICAL_VALUES = [
    (1, 3.841458821, 0.05),
    (2, 5.991464547, 0.05),
    (3, 7.814727903, 0.05),
    (4, 9.487729037, 0.05),
    (5, 11.070497694, 0.05),
    (10, 18.307038053, 0.05),
    (20, 31.410432844, 0.05),
    (30, 43.772971826, 0.05),
    (1, 6.634896601, 0.01),
    (2, 9.210340372, 0.01),
    (5, 15.086272469, 0.01),
    (10, 23.209251159, 0.01),
    (30, 50.892181312, 0.01),
]


def closed_form_sf(x: float, df: int) -> float:
    """Upper tail of chi-squared from its finite-sum form."""
    h = x / 2.0
    if df % 2 == 0:
        term = total = 1.0
        for k in range(1, df // 2):
            term *= h / k
            total += term
        return math.exp(-h) * total
    total = math.erfc(math.sqrt(h))
    term = math.sqrt(h) * math.exp(-h) / math.gamma(1.5)
    for k in range(1, (df - 1) // 2 + 1):
        if k > 1:
            term *= h / (k - 0.5)
        total += term
    return total


class TestChiSquareSf:
    """Tests for chi_square_sf."""

    def test_reference_table(self):
        """Test agreement with the closed form across df 1 to 30."""
        assert len(REFERENCE_POINTS) >= 20
        for df, x in REFERENCE_POINTS:
            assert chi_square_sf(x, df) == pytest.approx(closed_form_sf(x, df), abs=1e-6), (df, x)

    def test_critical_values(self):
        """Test published 5% and 1% critical values."""
        for df, x, p in CRITICAL_VALUES:
            assert chi_square_sf(x, df) == pytest.approx(p, abs=1e-6), (df, x)

    def test_df2_closed_form(self):
        """Test df=2 equals exp(-x/2) within 1e-10."""
        assert chi_square_sf(2.0, 2) == pytest.approx(0.3678794412, abs=1e-10)
        for x in (0.01, 0.5, 1.0, 3.0, 6.0, 12.0, 40.0):
            assert abs(chi_square_sf(x, 2) - math.exp(-x / 2)) <= 1e-10

    def test_five_percent_point(self):
        """Test the df=1 5% critical value."""
        assert abs(chi_square_sf(3.841458821, 1) - 0.05) <= 1e-6

    def test_zero_maps_to_one(self):
        """Test sf(0) = 1 for every df."""
        for df in (1, 2, 7, 30):
            assert chi_square_sf(0.0, df) == 1.0

    def test_strictly_decreasing(self):
        """Test the survival function decreases strictly in x."""
        for df in (1, 3, 10, 30):
            values = [chi_square_sf(df / 6 + 0.5 * i, df) for i in range(100)]
            assert all(b < a for a, b in zip(values, values[1:], strict=False)), df

    def test_invalid_arguments(self):
        """Test df < 1 and negative x are argument errors."""
        with pytest.raises(ArgumentError):
            chi_square_sf(1.0, 0)
        with pytest.raises(ArgumentError):
            chi_square_sf(-0.1, 3)


class TestIncompleteGamma:
    """Tests for the regularized incomplete gamma functions."""

    def test_complementary(self):
        """Test P + Q = 1 on both sides of the series/fraction switch."""
        for a in (0.5, 1.0, 2.5, 10.0):
            for x in (0.1, a, a + 1.0, 3 * a + 5):
                assert regularized_gamma_p(a, x) + regularized_gamma_q(a, x) == pytest.approx(1.0, abs=1e-14)

    def test_exponential_case(self):
        """Test P(1, x) = 1 - exp(-x)."""
        for x in (0.2, 1.0, 4.0):
            assert regularized_gamma_p(1.0, x) == pytest.approx(1.0 - math.exp(-x), abs=1e-13)

    def test_limits(self):
        """Test the values at zero and infinity."""
        assert regularized_gamma_p(2.0, 0.0) == 0.0
        assert regularized_gamma_q(2.0, math.inf) == 0.0

    def test_invalid_shape(self):
        """Test a non-positive shape is an argument error."""
        with pytest.raises(ArgumentError):
            regularized_gamma_p(0.0, 1.0)
