"""Exact offline change-point detection under a least-absolute-deviation cost.

The cost of a segment is the sum of absolute deviations of its points from
the segment median (per component for multivariate series). Searches are
exact dynamic programs over a precomputed table of all segment costs.

Costs are evaluated as fsum(upper half) - fsum(lower half) of the sorted
segment. This equals the L1 deviation from any median, is never negative,
and depends only on the multiset of values, so the incremental table and a
direct evaluation agree bit for bit.
"""

import heapq
import itertools
import logging
import math
from collections.abc import Sequence

import numpy as np

from polichange.exceptions import ArgumentError
from polichange.segmentation.schemas import (
    CostCache,
    DetectionMode,
    InflectionDirection,
    Segmentation,
)

logger = logging.getLogger(__name__)

MIN_SEGMENT_LENGTH = 2
MAD_TO_SIGMA = 1.4826
BRUTE_FORCE_MAX_LENGTH = 30
BRUTE_FORCE_MAX_K = 4

SeriesLike = Sequence[float] | np.ndarray


def _as_2d(series: SeriesLike) -> np.ndarray:
    """Series as a float (T x d) array."""
    values = np.asarray(series, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    if values.ndim != 2:
        raise ArgumentError("series must be one- or two-dimensional")
    return values


def component_median(values: SeriesLike) -> float:
    """Median of a non-empty sequence (mean of the two middle values when even).

    Raises:
        ArgumentError: If values is empty.
    """
    s = sorted(float(v) for v in np.ravel(np.asarray(values, dtype=float)))
    if not s:
        raise ArgumentError("median of an empty sequence")
    n = len(s)
    return (s[(n - 1) // 2] + s[n // 2]) / 2.0


def _halves_cost(sorted_values: list[float]) -> float:
    k = len(sorted_values) // 2
    if k == 0:
        return 0.0
    return math.fsum(sorted_values[-k:]) - math.fsum(sorted_values[:k])


def segment_cost_l1(series: SeriesLike, a: int, b: int) -> float:
    """Least-absolute-deviation cost of segment [a, b).

    For a multivariate (T x d) series the per-component costs are summed.

    Args:
        series: Univariate sequence or (T x d) array.
        a: First index of the segment.
        b: One past the last index.

    Returns:
        float: Sum of |y_t - median| over the segment.

    Raises:
        ArgumentError: If the segment is empty or out of range.
    """
    values = _as_2d(series)
    if not 0 <= a < b <= values.shape[0]:
        raise ArgumentError(f"segment [{a}, {b}) is empty or outside a series of length {values.shape[0]}")
    costs = [_halves_cost(sorted(values[a:b, j].tolist())) for j in range(values.shape[1])]
    return costs[0] if len(costs) == 1 else math.fsum(costs)


class _ExactSum:
    """Running sum kept exactly as non-overlapping float partials."""

    __slots__ = ("partials",)

    def __init__(self) -> None:
        self.partials: list[float] = []

    def add(self, x: float) -> None:
        partials = self.partials
        i = 0
        for y in partials:
            if abs(x) < abs(y):
                x, y = y, x
            hi = x + y
            lo = y - (hi - x)
            if lo:
                partials[i] = lo
                i += 1
            x = hi
        partials[i:] = [x]

    def value(self) -> float:
        return math.fsum(self.partials)


class _RunningHalves:
    """Lower and upper halves of a growing multiset with exact half sums."""

    def __init__(self) -> None:
        self.lower: list[float] = []  # max-heap via negation
        self.upper: list[float] = []
        self.middle: float | None = None
        self.lower_sum = _ExactSum()
        self.upper_sum = _ExactSum()

    def _push_lower(self, x: float) -> None:
        heapq.heappush(self.lower, -x)
        self.lower_sum.add(x)

    def _push_upper(self, x: float) -> None:
        heapq.heappush(self.upper, x)
        self.upper_sum.add(x)

    def insert(self, x: float) -> None:
        if self.middle is None:
            if self.lower and x < -self.lower[0]:
                top = -heapq.heapreplace(self.lower, -x)
                self.lower_sum.add(x)
                self.lower_sum.add(-top)
                self.middle = top
            elif self.upper and x > self.upper[0]:
                bottom = heapq.heapreplace(self.upper, x)
                self.upper_sum.add(x)
                self.upper_sum.add(-bottom)
                self.middle = bottom
            else:
                self.middle = x
        else:
            m, self.middle = self.middle, None
            if x < m:
                self._push_lower(x)
                self._push_upper(m)
            else:
                self._push_lower(m)
                self._push_upper(x)

    def cost(self) -> float:
        if not self.lower:
            return 0.0
        return self.upper_sum.value() - self.lower_sum.value()


def precompute_costs(series: SeriesLike) -> CostCache:
    """Cost of every segment [a, b) of a series.

    Each start index streams its extensions through two heaps, so the table is
    built in O(T^2 log T).

    Args:
        series: Univariate sequence or (T x d) array with T >= 1.

    Returns:
        CostCache: Read-only cost table.

    Raises:
        ArgumentError: If the series is empty.
    """
    values = _as_2d(series)
    T, d = values.shape
    if T < 1:
        raise ArgumentError("cannot segment an empty series")

    costs = np.full((T + 1, T + 1), np.inf)
    columns = [values[:, j].tolist() for j in range(d)]
    for a in range(T):
        halves = [_RunningHalves() for _ in range(d)]
        for b in range(a + 1, T + 1):
            for j in range(d):
                halves[j].insert(columns[j][b - 1])
            if d == 1:
                costs[a, b] = halves[0].cost()
            else:
                costs[a, b] = math.fsum(h.cost() for h in halves)

    frozen = values.copy()
    frozen.flags.writeable = False
    costs.flags.writeable = False
    return CostCache(series=frozen, costs=costs)


def _max_change_points(T: int, min_size: int) -> int:
    return T // min_size - 1


def _check_min_size(min_size: int) -> None:
    if min_size < 1:
        raise ArgumentError(f"minimum segment length must be >= 1, got {min_size}")


def _suffix_tables(cache: CostCache, n_segments: int, min_size: int) -> list[np.ndarray]:
    """tables[k][s] = optimal cost of splitting [s, T) into k segments."""
    T = cache.length
    costs = np.asarray(cache.costs)
    starts = np.arange(T + 1)
    too_short = starts[None, :] < starts[:, None] + min_size
    tables = [np.full(T + 1, np.inf)]
    tables[0][T] = 0.0
    for k in range(1, n_segments + 1):
        previous = tables[k - 1]
        candidates = costs + previous[None, :]
        candidates = np.where(too_short, np.inf, candidates)
        tables.append(candidates.min(axis=1))
    return tables


def _backtrack(
    cache: CostCache, tables: list[np.ndarray], n_segments: int, min_size: int
) -> tuple[int, ...]:
    """Lexicographically smallest optimal divider list for n_segments."""
    T = cache.length
    costs = np.asarray(cache.costs)
    dividers = [0]
    s = 0
    for k in range(n_segments, 1, -1):
        target = tables[k][s]
        for t in range(s + min_size, T + 1):
            if costs[s, t] + tables[k - 1][t] == target:
                dividers.append(t)
                s = t
                break
        else:  # pragma: no cover - the table minimum is always attained
            raise RuntimeError("segmentation backtrack failed")
    dividers.append(T)
    return tuple(dividers)


def _segmentation(
    cache: CostCache, dividers: tuple[int, ...], penalty: float | None = None
) -> Segmentation:
    total = math.fsum(cache.cost(a, b) for a, b in zip(dividers, dividers[1:], strict=False))
    return Segmentation(
        dividers=dividers, total_cost=total, series_length=cache.length, penalty=penalty
    )


def _resolve_cache(series: SeriesLike | CostCache) -> CostCache:
    return series if isinstance(series, CostCache) else precompute_costs(series)


def detect_fixed_k(
    series: SeriesLike | CostCache,
    K: int,
    min_size: int = MIN_SEGMENT_LENGTH,
) -> Segmentation:
    """Optimal segmentation with exactly K interior change points.

    Ties between optimal divider lists go to the lexicographically smallest.

    Args:
        series: Series, or a cost table already built for it.
        K: Number of interior dividers.
        min_size: Minimum segment length m.

    Returns:
        Segmentation: Global optimum of the total L1 cost.

    Raises:
        ArgumentError: If K < 1 or K segments of length >= m do not fit in T.
    """
    _check_min_size(min_size)
    cache = _resolve_cache(series)
    T = cache.length
    if K < 1 or K > _max_change_points(T, min_size):
        raise ArgumentError(
            f"K={K} change points do not fit a series of length {T} with minimum segment length {min_size}"
        )
    tables = _suffix_tables(cache, K + 1, min_size)
    return _segmentation(cache, _backtrack(cache, tables, K + 1, min_size))


def detect_penalized(
    series: SeriesLike | CostCache,
    beta: float,
    min_size: int = MIN_SEGMENT_LENGTH,
    max_change_points: int | None = None,
) -> Segmentation:
    """Optimal segmentation under a per-change-point penalty.

    Minimizes total cost + beta * K over every admissible K. Among equal
    penalized costs the smaller K wins, then the lexicographically smallest
    divider list.

    Args:
        series: Series, or a cost table already built for it.
        beta: Penalty per interior divider (may be +inf).
        min_size: Minimum segment length m.
        max_change_points: Optional cap on K.

    Returns:
        Segmentation: Penalized optimum; `penalty` records beta.

    Raises:
        ArgumentError: If beta is negative or NaN.
    """
    if not beta >= 0.0:
        raise ArgumentError(f"penalty must be >= 0, got {beta}")
    _check_min_size(min_size)
    cache = _resolve_cache(series)
    T = cache.length
    k_max = max(0, _max_change_points(T, min_size))
    if max_change_points is not None:
        k_max = min(k_max, max(0, max_change_points))
    if math.isinf(beta) or T < min_size:
        return _segmentation(cache, (0, T), penalty=beta)

    tables = _suffix_tables(cache, k_max + 1, min_size)
    best_k = 0
    best_value = tables[1][0]
    for k in range(1, k_max + 1):
        value = tables[k + 1][0] + beta * k
        if value < best_value:
            best_k, best_value = k, value
    dividers = _backtrack(cache, tables, best_k + 1, min_size)
    logger.debug("penalized search (beta=%.4g) selected %d change point(s)", beta, best_k)
    return _segmentation(cache, dividers, penalty=beta)


def brute_force_candidates(T: int, K: int, min_size: int = MIN_SEGMENT_LENGTH):
    """Every admissible divider list with K interior dividers, in lexicographic order."""
    for interior in itertools.combinations(range(1, T), K):
        dividers = (0, *interior, T)
        if all(b - a >= min_size for a, b in zip(dividers, dividers[1:], strict=False)):
            yield dividers


def brute_force_segment(
    series: SeriesLike,
    K: int,
    min_size: int = MIN_SEGMENT_LENGTH,
) -> Segmentation:
    """Exhaustive search for the optimal K-change-point segmentation.

    Verification oracle for detect_fixed_k; same tie rule.

    Raises:
        ArgumentError: If T > 30, K > 4, or no admissible placement exists.
    """
    values = _as_2d(series)
    T = values.shape[0]
    if T > BRUTE_FORCE_MAX_LENGTH or K > BRUTE_FORCE_MAX_K or K < 1:
        raise ArgumentError(
            f"brute force is limited to T <= {BRUTE_FORCE_MAX_LENGTH} and 1 <= K <= {BRUTE_FORCE_MAX_K}"
        )
    _check_min_size(min_size)
    segment_costs: dict[tuple[int, int], float] = {}

    def cost(a: int, b: int) -> float:
        if (a, b) not in segment_costs:
            segment_costs[a, b] = segment_cost_l1(values, a, b)
        return segment_costs[a, b]

    best: tuple[float, tuple[int, ...]] | None = None
    for dividers in brute_force_candidates(T, K, min_size):
        total = math.fsum(cost(a, b) for a, b in zip(dividers, dividers[1:], strict=False))
        if best is None or total < best[0]:
            best = (total, dividers)
    if best is None:
        raise ArgumentError(f"K={K} change points do not fit a series of length {T}")
    return Segmentation(dividers=best[1], total_cost=best[0], series_length=T)


def classify_inflection(
    series: SeriesLike,
    segmentation: Segmentation,
    divider: int,
) -> InflectionDirection:
    """Direction of the level change at an interior divider.

    Compares the median of the segment after the divider with the median of
    the segment before it; an exact tie counts as positive.

    Raises:
        ArgumentError: If divider is not an interior divider of the segmentation.
    """
    dividers = segmentation.dividers
    if divider not in segmentation.change_points:
        raise ArgumentError(f"{divider} is not an interior divider of {list(dividers)}")
    values = np.asarray(series, dtype=float)
    i = dividers.index(divider)
    before = component_median(values[dividers[i - 1] : divider])
    after = component_median(values[divider : dividers[i + 1]])
    return InflectionDirection.NEGATIVE if after < before else InflectionDirection.POSITIVE


def robust_sigma(series: SeriesLike) -> float:
    """Scale estimate 1.4826 * MAD of the first differences."""
    values = np.asarray(series, dtype=float)
    if values.size < 2:
        return 0.0
    diffs = np.diff(values)
    return MAD_TO_SIGMA * float(np.median(np.abs(diffs - np.median(diffs))))


def default_penalty(series: SeriesLike) -> float:
    """Penalty 2 * sigma * log(T); log(T) when the scale estimate is zero."""
    T = len(series)
    if T < 2:
        return 0.0
    sigma = robust_sigma(series)
    return 2.0 * sigma * math.log(T) if sigma > 0 else math.log(T)


def detect(
    series: SeriesLike,
    mode: DetectionMode = DetectionMode.PENALIZED,
    n_change_points: int | None = None,
    beta: float | None = None,
    min_size: int = MIN_SEGMENT_LENGTH,
) -> Segmentation:
    """Run fixed-K or penalized detection on one univariate series.

    Args:
        series: Monthly series.
        mode: Detection mode.
        n_change_points: K for fixed mode.
        beta: Penalty for penalized mode; None selects default_penalty.
        min_size: Minimum segment length.

    Returns:
        Segmentation: Detected dividers.
    """
    if mode == DetectionMode.FIXED:
        if n_change_points is None:
            raise ArgumentError("fixed-K detection needs n_change_points")
        return detect_fixed_k(series, n_change_points, min_size)
    penalty = default_penalty(series) if beta is None else beta
    return detect_penalized(series, penalty, min_size)
