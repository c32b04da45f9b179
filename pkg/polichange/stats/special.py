"""Regularized incomplete gamma functions and the chi-squared survival function.

P(a, x) uses the power series for x < a + 1 and Q(a, x) the continued fraction
(modified Lentz) otherwise; the other function is the complement.
"""

import math
import sys

from polichange.exceptions import ArgumentError

EPSILON = 1e-16
MAX_ITERATIONS = 10_000
_TINY = sys.float_info.min / sys.float_info.epsilon


def _prefactor(a: float, x: float) -> float:
    """x^a e^-x / Gamma(a), evaluated in log space."""
    return math.exp(a * math.log(x) - x - math.lgamma(a))


def _gamma_series(a: float, x: float) -> float:
    """P(a, x) by its power series."""
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(MAX_ITERATIONS):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * EPSILON:
            return total * _prefactor(a, x)
    raise ArithmeticError(f"incomplete gamma series did not converge for a={a}, x={x}")


def _gamma_continued_fraction(a: float, x: float) -> float:
    """Q(a, x) by its continued fraction."""
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, MAX_ITERATIONS + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < EPSILON:
            return h * _prefactor(a, x)
    raise ArithmeticError(f"incomplete gamma fraction did not converge for a={a}, x={x}")


def _check(a: float, x: float) -> None:
    if a <= 0:
        raise ArgumentError(f"shape must be positive, got {a}")
    if x < 0 or math.isnan(x):
        raise ArgumentError(f"x must be nonnegative, got {x}")


def regularized_gamma_p(a: float, x: float) -> float:
    """Lower regularized incomplete gamma P(a, x)."""
    _check(a, x)
    if x == 0:
        return 0.0
    if math.isinf(x):
        return 1.0
    if x < a + 1.0:
        return min(1.0, _gamma_series(a, x))
    return max(0.0, 1.0 - _gamma_continued_fraction(a, x))


def regularized_gamma_q(a: float, x: float) -> float:
    """Upper regularized incomplete gamma Q(a, x) = 1 - P(a, x)."""
    _check(a, x)
    if x == 0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if x < a + 1.0:
        return max(0.0, 1.0 - _gamma_series(a, x))
    return min(1.0, _gamma_continued_fraction(a, x))


def chi_square_sf(x: float, df: int) -> float:
    """Upper-tail probability of the chi-squared distribution.

    Args:
        x: Statistic, >= 0.
        df: Degrees of freedom, >= 1.

    Returns:
        float: P(X >= x) = Q(df / 2, x / 2).

    Raises:
        ArgumentError: If x < 0 or df < 1.
    """
    if df < 1:
        raise ArgumentError(f"degrees of freedom must be >= 1, got {df}")
    if x < 0:
        raise ArgumentError(f"chi-squared statistic must be >= 0, got {x}")
    return regularized_gamma_q(df / 2.0, x / 2.0)
