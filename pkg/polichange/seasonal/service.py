"""Classical additive seasonal adjustment of monthly series."""

import logging
from collections.abc import Sequence

import numpy as np

from polichange.exceptions import ArgumentError
from polichange.ingest.schemas import CategoryMatrix
from polichange.seasonal.schemas import SeasonalProfile

logger = logging.getLogger(__name__)

PERIOD = 12


def _phases(length: int, period: int, phase: int) -> np.ndarray:
    return (np.arange(length) + phase) % period


def estimate_seasonal_profile(
    series: Sequence[float] | np.ndarray,
    period: int = PERIOD,
    phase: int = 0,
) -> SeasonalProfile:
    """Estimate a centered month-of-cycle profile.

    The offset of a phase is the mean of all observations at that phase minus
    the mean of the per-phase means. A partial final cycle contributes to the
    phases it covers.

    Args:
        series: Observations, one per month.
        period: Cycle length.
        phase: Phase of series[0] (calendar month - 1 for yearly cycles).

    Returns:
        SeasonalProfile: Offsets indexed by phase.

    Raises:
        ArgumentError: If the series is shorter than one period.
    """
    values = np.asarray(series, dtype=float)
    if period < 1:
        raise ArgumentError("period must be >= 1")
    if values.size < period:
        raise ArgumentError(f"series of length {values.size} is shorter than period {period}")

    phases = _phases(values.size, period, phase)
    sums = np.bincount(phases, weights=values, minlength=period)
    counts = np.bincount(phases, minlength=period)
    means = sums / counts
    offsets = means - means.mean()
    # Re-center so rounding never breaks the zero-sum invariant
    offsets -= offsets.mean()
    return SeasonalProfile(period=period, offsets=tuple(float(v) for v in offsets))


def remove_seasonal(
    series: Sequence[float] | np.ndarray,
    profile: SeasonalProfile,
    phase: int = 0,
) -> np.ndarray:
    """Subtract a seasonal profile from a series.

    Args:
        series: Observations, one per month.
        profile: Offsets indexed by phase.
        phase: Phase of series[0].

    Returns:
        np.ndarray: series[t] - offsets[(t + phase) mod period].
    """
    values = np.asarray(series, dtype=float)
    offsets = np.asarray(profile.offsets, dtype=float)
    return values - offsets[_phases(values.size, profile.period, phase)]


def deseasonalize_matrix(
    matrix: CategoryMatrix,
    period: int = PERIOD,
) -> tuple[CategoryMatrix, dict[str, SeasonalProfile]]:
    """Remove the seasonal profile of every category of a matrix.

    Phase 0 is January, whatever month the matrix starts in, so profiles of
    matrices with different spans are comparable.

    Args:
        matrix: Monthly count or share matrix.
        period: Cycle length.

    Returns:
        tuple: (residual matrix, profile per category).

    Raises:
        ArgumentError: If the matrix spans fewer months than one period.
    """
    phase = (matrix.start_month.month - 1) % period
    profiles: dict[str, SeasonalProfile] = {}
    rows = []
    for label in matrix.categories:
        series = matrix.row(label)
        profile = estimate_seasonal_profile(series, period, phase)
        profiles[label] = profile
        rows.append(remove_seasonal(series, profile, phase))
    logger.debug("deseasonalized %d series of length %d", len(rows), matrix.length)
    residual = CategoryMatrix.from_array(
        matrix.start_month, matrix.categories, np.vstack(rows), kind="residual"
    )
    return residual, profiles
