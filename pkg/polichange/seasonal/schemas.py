"""Pydantic schemas for seasonal adjustment."""

from pydantic import BaseModel, ConfigDict, Field, model_validator


class SeasonalProfile(BaseModel):
    """Additive seasonal component of a monthly series.

    Attributes:
        period: Cycle length in months.
        offsets: One centered offset per phase of the cycle; phase 0 is the
            first position of the series the profile was estimated on (January
            when estimated through deseasonalize_matrix).
    """

    model_config = ConfigDict(frozen=True)

    period: int = Field(default=12, ge=1)
    offsets: tuple[float, ...]

    @model_validator(mode="after")
    def _check_offsets(self) -> "SeasonalProfile":
        if len(self.offsets) != self.period:
            raise ValueError(f"expected {self.period} offsets, got {len(self.offsets)}")
        scale = max([1.0, *(abs(v) for v in self.offsets)])
        if abs(sum(self.offsets)) > 1e-9 * scale:
            raise ValueError("seasonal offsets must sum to zero")
        return self

    @classmethod
    def zero(cls, period: int = 12) -> "SeasonalProfile":
        """Profile that leaves every series unchanged."""
        return cls(period=period, offsets=(0.0,) * period)
