"""Schemas for change-point segmentations."""

from dataclasses import dataclass
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class InflectionDirection(str, Enum):
    """Direction of the level change at a divider."""

    POSITIVE = "positive"  # complaint rate rose
    NEGATIVE = "negative"  # complaint rate fell


class DetectionMode(str, Enum):
    """How the number of change points is chosen."""

    FIXED = "fixed"
    PENALIZED = "penalized"


class Segmentation(BaseModel):
    """Ordered segment boundaries of a series and their total cost.

    Segment k covers the half-open range [dividers[k], dividers[k+1]).

    Attributes:
        dividers: 0 = t_0 < t_1 < ... < t_K = T.
        total_cost: Sum of the per-segment L1 costs.
        series_length: T.
        penalty: Per-divider penalty when selected by penalized search.
    """

    model_config = ConfigDict(frozen=True)

    dividers: tuple[int, ...]
    total_cost: float = Field(ge=0.0)
    series_length: int = Field(ge=1)
    penalty: float | None = None

    @model_validator(mode="after")
    def _check_dividers(self) -> "Segmentation":
        d = self.dividers
        if len(d) < 2 or d[0] != 0 or d[-1] != self.series_length:
            raise ValueError("dividers must start at 0 and end at the series length")
        if any(b <= a for a, b in zip(d, d[1:], strict=False)):
            raise ValueError("dividers must be strictly increasing")
        return self

    @property
    def change_points(self) -> tuple[int, ...]:
        """Interior dividers."""
        return self.dividers[1:-1]

    @property
    def n_change_points(self) -> int:
        """Number of interior dividers K."""
        return len(self.dividers) - 2

    def segments(self) -> list[tuple[int, int]]:
        """(start, end) pairs of the half-open segments."""
        return list(zip(self.dividers, self.dividers[1:], strict=False))


@dataclass(frozen=True)
class CostCache:
    """Read-only table of segment costs c(a, b) for 0 <= a < b <= T.

    Attributes:
        series: The series the costs were computed on (T x d, read-only).
        costs: (T + 1) x (T + 1) array; entries with a >= b are +inf.
    """

    series: np.ndarray
    costs: np.ndarray

    @property
    def length(self) -> int:
        """Series length T."""
        return self.costs.shape[0] - 1

    @property
    def n_entries(self) -> int:
        """Number of cached segment costs, T(T + 1) / 2."""
        t = self.length
        return t * (t + 1) // 2

    def cost(self, a: int, b: int) -> float:
        """Cost of segment [a, b).

        Raises:
            IndexError: If the segment is empty or outside the series.
        """
        if not 0 <= a < b <= self.length:
            raise IndexError(f"segment [{a}, {b}) is not inside a series of length {self.length}")
        return float(self.costs[a, b])
