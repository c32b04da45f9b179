"""Seasonal adjustment module."""

from polichange.seasonal.schemas import SeasonalProfile
from polichange.seasonal.service import (
    deseasonalize_matrix,
    estimate_seasonal_profile,
    remove_seasonal,
)

__all__ = [
    "SeasonalProfile",
    "estimate_seasonal_profile",
    "remove_seasonal",
    "deseasonalize_matrix",
]
