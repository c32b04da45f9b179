"""Pydantic schemas of the analysis report."""

from typing import Any

from pydantic import BaseModel, ConfigDict, Field, model_validator

from polichange import REPORT_SCHEMA_VERSION, __version__
from polichange.ingest.schemas import CatalogEntry
from polichange.segmentation.schemas import InflectionDirection
from polichange.stats.schemas import (
    AssociationResult,
    CategoryGroup,
    ChiSquareResult,
    CorrelationMatrix,
    LegislationTally,
)


class RunMetadata(BaseModel):
    """Provenance of a run.

    Attributes:
        tool_version: polichange version that produced the report.
        seed: Seed of subsampling and permutations.
        config_digest: SHA-256 of the effective configuration.
        config: Effective configuration.
        generated_at: Timestamp passed in by the caller, if any.
    """

    model_config = ConfigDict(frozen=True)

    tool_version: str = __version__
    seed: int
    config_digest: str
    config: dict[str, Any]
    generated_at: str | None = None


class StageCount(BaseModel):
    """Records entering and leaving one pipeline stage."""

    model_config = ConfigDict(frozen=True)

    stage: str
    records_in: int = Field(ge=0)
    records_out: int = Field(ge=0)
    note: str = ""


class ChangePoint(BaseModel):
    """An interior divider with its calendar month and direction."""

    model_config = ConfigDict(frozen=True)

    index: int = Field(ge=1)
    month: str
    direction: InflectionDirection


class CategoryAnalysis(BaseModel):
    """Results for one category (or group of categories).

    Attributes:
        label: Category or group label.
        members: Catalog categories summed into this series.
        counts: Monthly complaint counts.
        residual: Series the change points were detected on.
        seasonal_profile: Offsets removed from the counts, January first.
        dividers: Segment boundaries 0 = t_0 < ... < t_K = T.
        change_points: Interior dividers with months and directions.
        total_cost: L1 cost of the segmentation.
        penalty: Per-divider penalty of penalized search.
        bill_counts: Monthly bills classified into the members.
        bill_share: Monthly percentage of bills classified into the members.
        bills_per_year: Yearly bill counts tested by the chi-squared test.
        chi_square: Uniform-per-year goodness-of-fit test.
        association: Permutation test of bills against change points.
        legislation: Bills near falling (positive) or rising (negative) change points.
        notes: Why a statistic is missing, when it is.
    """

    model_config = ConfigDict(frozen=True)

    label: str
    members: tuple[str, ...]
    counts: tuple[float, ...]
    residual: tuple[float, ...]
    seasonal_profile: tuple[float, ...] | None = None
    dividers: tuple[int, ...]
    change_points: tuple[ChangePoint, ...] = ()
    total_cost: float = Field(ge=0.0)
    penalty: float | None = None
    bill_counts: tuple[float, ...] = ()
    bill_share: tuple[float, ...] = ()
    bills_per_year: dict[int, int] = Field(default_factory=dict)
    chi_square: ChiSquareResult | None = None
    association: AssociationResult | None = None
    legislation: LegislationTally = LegislationTally()
    notes: tuple[str, ...] = ()

    @model_validator(mode="after")
    def _check_change_points(self) -> "CategoryAnalysis":
        listed = tuple(cp.index for cp in self.change_points)
        if listed != self.dividers[1:-1]:
            raise ValueError("every interior divider needs a change-point entry")
        return self


class BillSummary(BaseModel):
    """Bill classification outcome."""

    model_config = ConfigDict(frozen=True)

    total: int = Field(ge=0)
    tallies: dict[str, int]
    start_month: str | None = None
    end_month: str | None = None
    months_without_bills: int = Field(default=0, ge=0)


class AnalysisReport(BaseModel):
    """Everything a pipeline run produced, in serializable form."""

    model_config = ConfigDict(frozen=True)

    schema_version: str = REPORT_SCHEMA_VERSION
    metadata: RunMetadata
    start_month: str
    months: int = Field(ge=1)
    association_span: tuple[str, str] | None = None
    catalog: tuple[CatalogEntry, ...]
    correlation: CorrelationMatrix
    groups: tuple[CategoryGroup, ...]
    categories: tuple[CategoryAnalysis, ...]
    bills: BillSummary
    stages: tuple[StageCount, ...] = ()
    notes: tuple[str, ...] = ()

    def category(self, label: str) -> CategoryAnalysis:
        """Analysis of one category or group.

        Raises:
            KeyError: If no analysis carries the label.
        """
        for analysis in self.categories:
            if analysis.label == label:
                return analysis
        raise KeyError(label)
