"""Statistics module: correlation grouping, chi-squared and association tests."""

from polichange.stats.schemas import (
    AssociationResult,
    CategoryGroup,
    ChiSquareResult,
    CorrelationMatrix,
    LegislationTally,
)
from polichange.stats.service import (
    apply_groups,
    chi_square_gof,
    collapse_groups,
    correlation_matrix,
    label_legislation,
    months_per_year,
    pearson,
    permutation_association,
    yearly_chi_square,
)
from polichange.stats.special import (
    chi_square_sf,
    regularized_gamma_p,
    regularized_gamma_q,
)

__all__ = [
    "AssociationResult",
    "CategoryGroup",
    "ChiSquareResult",
    "CorrelationMatrix",
    "LegislationTally",
    "pearson",
    "correlation_matrix",
    "collapse_groups",
    "apply_groups",
    "chi_square_gof",
    "months_per_year",
    "yearly_chi_square",
    "chi_square_sf",
    "regularized_gamma_p",
    "regularized_gamma_q",
    "permutation_association",
    "label_legislation",
]
