"""Pydantic schemas for correlation and hypothesis tests."""

from pydantic import BaseModel, ConfigDict, Field, model_validator


class CorrelationMatrix(BaseModel):
    """Pairwise Pearson coefficients between categories.

    Entries involving a constant series are undefined and stored as None.
    """

    model_config = ConfigDict(frozen=True)

    labels: tuple[str, ...]
    values: tuple[tuple[float | None, ...], ...]

    @model_validator(mode="after")
    def _check_matrix(self) -> "CorrelationMatrix":
        n = len(self.labels)
        if len(self.values) != n or any(len(row) != n for row in self.values):
            raise ValueError("correlation matrix must be square over its labels")
        for i in range(n):
            for j in range(n):
                v, w = self.values[i][j], self.values[j][i]
                if (v is None) != (w is None):
                    raise ValueError("undefined entries must be symmetric")
                if v is None:
                    continue
                if not -1.0 <= v <= 1.0:
                    raise ValueError(f"correlation out of [-1, 1]: {v}")
                if abs(v - w) > 1e-12:
                    raise ValueError("correlation matrix must be symmetric")
                if i == j and v != 1.0:
                    raise ValueError("defined diagonal entries must be 1")
        return self

    def get(self, a: str, b: str) -> float | None:
        """Coefficient between two labels (None when undefined)."""
        return self.values[self.labels.index(a)][self.labels.index(b)]

    @property
    def undefined(self) -> list[str]:
        """Labels whose series are constant."""
        return [label for i, label in enumerate(self.labels) if self.values[i][i] is None]


class CategoryGroup(BaseModel):
    """Categories collapsed into one series."""

    model_config = ConfigDict(frozen=True)

    label: str
    members: tuple[str, ...]


class ChiSquareResult(BaseModel):
    """Outcome of a chi-squared goodness-of-fit test."""

    model_config = ConfigDict(frozen=True)

    statistic: float = Field(ge=0.0)
    degrees_of_freedom: int = Field(ge=1)
    p_value: float = Field(ge=0.0, le=1.0)


class AssociationResult(BaseModel):
    """Circular-shift permutation test of bills against change points.

    Attributes:
        observed_statistic: Bills within the window of any change point.
        permutation_count: Number of circular shifts drawn.
        p_value: (1 + #{null >= observed}) / (1 + permutation_count).
        window_months: Half-width of the window around each change point.
        null_mean: Mean of the null statistics.
        null_std: Standard deviation of the null statistics.
        exceedances: Number of null statistics >= observed.
    """

    model_config = ConfigDict(frozen=True)

    observed_statistic: float
    permutation_count: int = Field(ge=1)
    p_value: float = Field(gt=0.0, le=1.0)
    window_months: int = Field(ge=0)
    null_mean: float
    null_std: float
    exceedances: int = Field(ge=0)


class LegislationTally(BaseModel):
    """Bills coinciding with falling (positive legislation) or rising
    (negative legislation) change points."""

    model_config = ConfigDict(frozen=True)

    positive: float = 0.0
    negative: float = 0.0
