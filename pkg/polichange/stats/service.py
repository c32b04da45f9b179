"""Correlation grouping, chi-squared testing and the bill/change-point association test."""

import logging
import math
from collections.abc import Mapping, Sequence

import numpy as np

from polichange.exceptions import ArgumentError, DegenerateInputError
from polichange.ingest.schemas import CategoryMatrix, Month
from polichange.segmentation.schemas import InflectionDirection
from polichange.stats.schemas import (
    AssociationResult,
    CategoryGroup,
    ChiSquareResult,
    CorrelationMatrix,
    LegislationTally,
)
from polichange.stats.special import chi_square_sf

logger = logging.getLogger(__name__)

GROUP_THRESHOLD = 0.7
ASSOCIATION_WINDOW = 3
N_PERMUTATIONS = 9999
MIN_PERMUTATIONS = 99


def pearson(x: Sequence[float] | np.ndarray, y: Sequence[float] | np.ndarray) -> float:
    """Sample Pearson correlation coefficient.

    Raises:
        ArgumentError: If the lengths differ or are below 2.
        DegenerateInputError: If either sequence is constant.
    """
    a = np.asarray(x, dtype=float)
    b = np.asarray(y, dtype=float)
    if a.shape != b.shape or a.ndim != 1 or a.size < 2:
        raise ArgumentError("pearson needs two sequences of equal length >= 2")
    da = a - a.mean()
    db = b - b.mean()
    sa = float(np.dot(da, da))
    sb = float(np.dot(db, db))
    if np.ptp(a) == 0 or np.ptp(b) == 0 or sa == 0 or sb == 0:
        raise DegenerateInputError("correlation is undefined for a constant sequence")
    r = float(np.dot(da, db)) / math.sqrt(sa * sb)
    return max(-1.0, min(1.0, r))


def correlation_matrix(matrix: CategoryMatrix) -> CorrelationMatrix:
    """Pairwise Pearson correlation between the category series.

    Constant series give undefined (None) entries instead of failing.

    Raises:
        ArgumentError: If the series are shorter than 2 months.
    """
    if matrix.length < 2:
        raise ArgumentError("correlation needs at least 2 months")
    labels = list(matrix.categories)
    data = matrix.to_array()
    constant = [bool(np.ptp(row) == 0) for row in data]
    n = len(labels)
    values: list[list[float | None]] = [[None] * n for _ in range(n)]
    for i in range(n):
        if constant[i]:
            continue
        values[i][i] = 1.0
        for j in range(i + 1, n):
            if constant[j]:
                continue
            r = pearson(data[i], data[j])
            values[i][j] = values[j][i] = r
    if any(constant):
        logger.warning(
            "constant series leave correlations undefined: %s",
            [label for label, c in zip(labels, constant, strict=False) if c],
        )
    return CorrelationMatrix(labels=tuple(labels), values=tuple(tuple(row) for row in values))


def collapse_groups(
    corr: CorrelationMatrix, threshold: float = GROUP_THRESHOLD
) -> list[CategoryGroup]:
    """Group categories connected by correlations at or above a threshold.

    Groups are the connected components of the graph with an edge wherever
    r >= threshold. Members keep catalog order and groups are ordered by
    their first member.

    Raises:
        ArgumentError: If threshold is not in (0, 1].
    """
    if not 0.0 < threshold <= 1.0:
        raise ArgumentError(f"grouping threshold must be in (0, 1], got {threshold}")
    n = len(corr.labels)
    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            r = corr.values[i][j]
            if r is not None and r >= threshold:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)

    components: dict[int, list[str]] = {}
    for i, label in enumerate(corr.labels):
        components.setdefault(find(i), []).append(label)
    groups = [
        CategoryGroup(label="+".join(members), members=tuple(members))
        for _, members in sorted(components.items())
    ]
    merged = [g.label for g in groups if len(g.members) > 1]
    if merged:
        logger.info("collapsed correlated categories into %s", merged)
    return groups


def apply_groups(matrix: CategoryMatrix, groups: Sequence[CategoryGroup]) -> CategoryMatrix:
    """Sum member rows into one row per group.

    Raises:
        KeyError: If a group member is not a row of the matrix.
    """
    data = matrix.to_array()
    index = {label: i for i, label in enumerate(matrix.categories)}
    rows = [data[[index[m] for m in group.members]].sum(axis=0) for group in groups]
    if matrix.kind == "share":
        rows = [np.clip(row, 0.0, 100.0) for row in rows]
    return CategoryMatrix.from_array(
        matrix.start_month, [g.label for g in groups], np.vstack(rows), kind=matrix.kind
    )


def chi_square_gof(
    observed: Sequence[float],
    expected: Sequence[float] | None = None,
) -> ChiSquareResult:
    """Chi-squared goodness-of-fit test.

    Args:
        observed: Counts per cell.
        expected: Expected counts per cell; defaults to the observed total
            spread uniformly.

    Returns:
        ChiSquareResult: Statistic, cells - 1 degrees of freedom and p-value.

    Raises:
        ArgumentError: For fewer than 2 cells, mismatched lengths or a
            non-positive expected cell.
    """
    obs = [float(o) for o in observed]
    if len(obs) < 2:
        raise ArgumentError("chi-squared test needs at least 2 cells")
    if expected is None:
        total = math.fsum(obs)
        exp = [total / len(obs)] * len(obs)
    else:
        exp = [float(e) for e in expected]
    if len(exp) != len(obs):
        raise ArgumentError("observed and expected must have the same number of cells")
    if any(not e > 0 for e in exp):
        raise ArgumentError("expected counts must all be positive")
    statistic = math.fsum((o - e) ** 2 / e for o, e in zip(obs, exp, strict=False))
    df = len(obs) - 1
    return ChiSquareResult(
        statistic=statistic, degrees_of_freedom=df, p_value=chi_square_sf(statistic, df)
    )


def months_per_year(start: Month, end: Month) -> dict[int, int]:
    """Months of each calendar year inside the closed span start..end."""
    if end < start:
        raise ArgumentError(f"span {start.iso()}:{end.iso()} ends before it starts")
    months = dict.fromkeys(range(start.year, end.year + 1), 12)
    months[start.year] -= start.month - 1
    months[end.year] -= 12 - end.month
    return months


def yearly_chi_square(yearly: Mapping[int, int], start: Month, end: Month) -> ChiSquareResult:
    """Chi-squared test of yearly counts against a constant monthly rate.

    A year's expected count is the total scaled by its share of the span's
    months, so partial first and last years are expected to hold fewer
    bills. With only complete years this is the uniform test.

    Args:
        yearly: Count per calendar year, covering exactly the span's years.
        start: First month of the span.
        end: Last month of the span.

    Raises:
        ArgumentError: If the years do not match the span, or it covers
            fewer than 2 years.
    """
    months = months_per_year(start, end)
    if sorted(yearly) != list(months):
        raise ArgumentError(f"yearly counts must cover the years {start.year}..{end.year}")
    total = math.fsum(yearly.values())
    span_months = sum(months.values())
    expected = [total * n / span_months for n in months.values()]
    return chi_square_gof([yearly[year] for year in months], expected)


def _window_mask(change_points: Sequence[int], length: int, window: int) -> np.ndarray:
    mask = np.zeros(length, dtype=bool)
    for t in change_points:
        lo = max(0, t - window)
        hi = min(length, t + window + 1)
        mask[lo:hi] = True
    return mask


def _shifted_statistics(bills: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """stat[r] = bills inside the mask after rotating the series by r months."""
    T = bills.size
    idx = np.flatnonzero(mask)
    shifts = np.arange(T)
    return bills[(idx[None, :] - shifts[:, None]) % T].sum(axis=1)


def permutation_association(
    change_points: Sequence[int],
    bill_series: Sequence[float] | np.ndarray,
    window_months: int = ASSOCIATION_WINDOW,
    n_perm: int = N_PERMUTATIONS,
    seed: int = 0,
    series_length: int | None = None,
) -> AssociationResult:
    """Test whether bills cluster around change points.

    The statistic is the number of bills within +/- window_months of any
    change point. The null distribution rotates the bill series by uniform
    random offsets, which keeps its seasonality and autocorrelation.

    Args:
        change_points: Interior dividers of the complaint series.
        bill_series: Monthly bill counts aligned with the complaint series.
        window_months: Half-width of the window.
        n_perm: Number of random rotations.
        seed: Seed of the rotation schedule.
        series_length: Length of the complaint series, checked against the bills.

    Returns:
        AssociationResult: Observed statistic and permutation p-value.

    Raises:
        ArgumentError: For invalid lengths, window or permutation count.
        DegenerateInputError: If there is no change point.
    """
    bills = np.asarray(bill_series, dtype=float)
    T = bills.size
    if series_length is not None and series_length != T:
        raise ArgumentError(f"bill series has {T} months, complaint series {series_length}")
    if n_perm < MIN_PERMUTATIONS:
        raise ArgumentError(f"n_perm must be >= {MIN_PERMUTATIONS}, got {n_perm}")
    if window_months < 0:
        raise ArgumentError("window must be >= 0")
    points = [int(t) for t in change_points]
    if not points:
        raise DegenerateInputError("association is undefined without change points")
    if any(not 0 < t < T for t in points):
        raise ArgumentError(f"change points {points} are not interior to {T} months")

    statistics = _shifted_statistics(bills, _window_mask(points, T, window_months))
    observed = float(statistics[0])
    rng = np.random.Generator(np.random.PCG64(seed & 0xFFFFFFFFFFFFFFFF))
    null = statistics[rng.integers(0, T, size=n_perm)]
    exceedances = int(np.count_nonzero(null >= observed))
    return AssociationResult(
        observed_statistic=observed,
        permutation_count=n_perm,
        p_value=(1 + exceedances) / (1 + n_perm),
        window_months=window_months,
        null_mean=float(null.mean()),
        null_std=float(null.std()),
        exceedances=exceedances,
    )


def label_legislation(
    directions: dict[int, InflectionDirection],
    bill_series: Sequence[float] | np.ndarray,
    window_months: int = ASSOCIATION_WINDOW,
) -> LegislationTally:
    """Count bills coinciding with falling and rising change points.

    Bills within the window of a falling change point (complaints start to
    decrease) are positive legislation; bills near a rising one are negative
    legislation. A month near both kinds counts toward both.

    Args:
        directions: Inflection direction per interior divider.
        bill_series: Monthly bill counts aligned with the complaint series.
        window_months: Half-width of the window.
    """
    bills = np.asarray(bill_series, dtype=float)
    falling = [t for t, d in directions.items() if d == InflectionDirection.NEGATIVE]
    rising = [t for t, d in directions.items() if d == InflectionDirection.POSITIVE]
    return LegislationTally(
        positive=float(bills[_window_mask(falling, bills.size, window_months)].sum()),
        negative=float(bills[_window_mask(rising, bills.size, window_months)].sum()),
    )
