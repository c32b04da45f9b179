"""Pipeline configuration using pydantic-settings."""

import hashlib
import json
from pathlib import Path
from typing import Any

from pydantic import Field, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from polichange.ingest.schemas import Month
from polichange.segmentation.schemas import DetectionMode


def parse_month_span(text: str) -> tuple[Month, Month]:
    """Parse "YYYY-MM:YYYY-MM" into an inclusive month span.

    Raises:
        ValueError: If the text is malformed or the end precedes the start.
    """
    start, sep, end = text.partition(":")
    if not sep:
        raise ValueError(f"expected YYYY-MM:YYYY-MM, got {text!r}")
    span = (Month.parse(start), Month.parse(end))
    if span[1] < span[0]:
        raise ValueError(f"span end {span[1]} is before start {span[0]}")
    return span


class PipelineConfig(BaseSettings):
    """Every tunable of an analysis run.

    Values come, highest priority first, from command-line flags, the
    `--config` JSON file, POLICHANGE_* environment variables (or `.env`) and
    the defaults below.

    Attributes:
        requests_path: Service-request CSV or Excel file.
        bills_path: Bills CSV or Excel file.
        dictionary_path: Keyword dictionary JSON; None uses the bundled one.
        schema_path: Column/date-format JSON; None uses the default schemas.
        out_dir: Directory receiving report.json, series/ and charts/.
        subsample_n: Requests kept by the random subsample.
        seed: Seed of the subsample and of the permutation schedule.
        max_categories: Upper bound on selected complaint categories.
        min_fraction: Minimum frequency of a selected category.
        group_threshold: Correlation at which categories are grouped.
        detection_mode: Fixed number of change points or penalized search.
        n_change_points: K for fixed mode.
        beta: Penalty for penalized mode; None derives it from each series.
        min_segment_length: Shortest admissible segment in months.
        window: Half-width in months of the association window.
        n_perm: Circular shifts drawn by the association test.
        deseasonalize_bills: Remove the seasonal profile of bill counts too.
        association_span: "YYYY-MM:YYYY-MM" override of the association span.
        strict: Fail on the first malformed input row.
        run_timestamp: Free-form timestamp echoed into the report.
    """

    model_config = SettingsConfigDict(
        env_prefix="POLICHANGE_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="forbid",
    )

    # Inputs and outputs
    requests_path: Path | None = None
    bills_path: Path | None = None
    dictionary_path: Path | None = None
    schema_path: Path | None = None
    out_dir: Path | None = None

    # Ingestion
    subsample_n: int = Field(default=30_000, ge=1)
    seed: int = 0
    max_categories: int = Field(default=13, ge=1, le=13)
    min_fraction: float = Field(default=0.005, ge=0.0, le=1.0)
    strict: bool = False

    # Grouping and detection
    group_threshold: float = Field(default=0.7, gt=0.0, le=1.0)
    detection_mode: DetectionMode = DetectionMode.PENALIZED
    n_change_points: int | None = Field(default=None, ge=1)
    beta: float | None = Field(default=None, ge=0.0, allow_inf_nan=False)
    min_segment_length: int = Field(default=2, ge=1)

    # Association
    window: int = Field(default=3, ge=0)
    n_perm: int = Field(default=9999, ge=99)
    deseasonalize_bills: bool = False
    association_span: str | None = None

    run_timestamp: str | None = None

    @field_validator("association_span")
    @classmethod
    def _check_span(cls, value: str | None) -> str | None:
        if value is not None:
            parse_month_span(value)
        return value

    @model_validator(mode="after")
    def _check_detection(self) -> "PipelineConfig":
        if self.detection_mode == DetectionMode.FIXED and self.n_change_points is None:
            raise ValueError("fixed detection mode requires n_change_points")
        return self

    def association_months(self) -> tuple[Month, Month] | None:
        """Parsed association span override, if any."""
        if self.association_span is None:
            return None
        return parse_month_span(self.association_span)

    def effective(self) -> dict[str, Any]:
        """Analysis parameters echoed into the report.

        The output directory is left out so that runs differing only in
        where they write produce identical reports.
        """
        data = self.model_dump(mode="json", exclude={"out_dir"})
        return {key: data[key] for key in sorted(data)}

    def digest(self) -> str:
        """SHA-256 of the canonical JSON form of `effective()`."""
        canonical = json.dumps(self.effective(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
