"""Change-point detection module."""

from polichange.segmentation.schemas import (
    CostCache,
    DetectionMode,
    InflectionDirection,
    Segmentation,
)
from polichange.segmentation.service import (
    brute_force_segment,
    classify_inflection,
    component_median,
    default_penalty,
    detect,
    detect_fixed_k,
    detect_penalized,
    precompute_costs,
    robust_sigma,
    segment_cost_l1,
)

__all__ = [
    "CostCache",
    "DetectionMode",
    "InflectionDirection",
    "Segmentation",
    "component_median",
    "segment_cost_l1",
    "precompute_costs",
    "detect_fixed_k",
    "detect_penalized",
    "detect",
    "brute_force_segment",
    "classify_inflection",
    "robust_sigma",
    "default_penalty",
]
