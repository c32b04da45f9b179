"""Pydantic schemas for complaint and bill ingestion."""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date, time
from typing import Literal

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from polichange.exceptions import ArgumentError

NOT_APPLICABLE = "N/A"

MatrixKind = Literal["count", "share", "residual"]


@dataclass(frozen=True, order=True)
class Month:
    """A calendar month.

    Attributes:
        year: Gregorian year.
        month: Month of year, 1-12.
    """

    year: int
    month: int

    def __post_init__(self) -> None:
        if not 1 <= self.month <= 12:
            raise ValueError(f"month must be in 1..12, got {self.month}")

    @classmethod
    def of(cls, day: date) -> Month:
        """Month containing a calendar date."""
        return cls(day.year, day.month)

    @classmethod
    def parse(cls, text: str) -> Month:
        """Parse an ISO year-month string ("YYYY-MM").

        Raises:
            ValueError: If the text is not a valid year-month.
        """
        year, _, month = text.strip().partition("-")
        if not year or not month:
            raise ValueError(f"not a YYYY-MM month: {text!r}")
        return cls(int(year), int(month))

    @property
    def ordinal(self) -> int:
        """Months elapsed since year 0, used for span arithmetic."""
        return self.year * 12 + (self.month - 1)

    @classmethod
    def from_ordinal(cls, ordinal: int) -> Month:
        """Inverse of `ordinal`."""
        return cls(ordinal // 12, ordinal % 12 + 1)

    def shift(self, months: int) -> Month:
        """Month `months` after this one (negative shifts go back)."""
        return Month.from_ordinal(self.ordinal + months)

    def iso(self) -> str:
        """ISO year-month, e.g. "2012-05"."""
        return f"{self.year:04d}-{self.month:02d}"

    def __str__(self) -> str:
        return self.iso()


def month_span(start: Month, end: Month) -> list[Month]:
    """Contiguous list of months from start to end, both included."""
    return [Month.from_ordinal(o) for o in range(start.ordinal, end.ordinal + 1)]


class ServiceRequestRecord(BaseModel):
    """One 311 complaint event.

    Attributes:
        created_date: Calendar date the request was created.
        created_time: Time of day, kept when present in the source but unused.
        complaint_type: Complaint category label as written in the source.
    """

    model_config = ConfigDict(frozen=True)

    created_date: date
    created_time: time | None = None
    complaint_type: str

    @field_validator("complaint_type")
    @classmethod
    def _strip_type(cls, value: str) -> str:
        value = value.strip()
        if not value:
            raise ValueError("complaint_type is empty")
        return value


class BillRecord(BaseModel):
    """One legislative bill.

    Attributes:
        create_date: Date the bill was created.
        title: Bill title; the classifier reads only this field.
        subject: Bill subject as given by the legislature.
        health_area: Assigned area label, "N/A" when unclassified, None before
            classification.
    """

    model_config = ConfigDict(frozen=True)

    create_date: date
    title: str
    subject: str = ""
    health_area: str | None = None


class CatalogEntry(BaseModel):
    """A selected complaint category and its observed frequency."""

    model_config = ConfigDict(frozen=True)

    label: str
    frequency: float = Field(ge=0.0, le=1.0)


class CategoryCatalog(BaseModel):
    """Ordered selection of complaint categories (most frequent first)."""

    model_config = ConfigDict(frozen=True)

    entries: tuple[CatalogEntry, ...] = Field(max_length=13)
    min_fraction: float = 0.0

    @model_validator(mode="after")
    def _check_entries(self) -> CategoryCatalog:
        seen: set[str] = set()
        for entry in self.entries:
            key = entry.label.strip().casefold()
            if key in seen:
                raise ValueError(f"duplicate category label: {entry.label}")
            seen.add(key)
            if entry.frequency < self.min_fraction:
                raise ValueError(f"{entry.label} is below the minimum fraction")
        if sum(e.frequency for e in self.entries) > 1.0 + 1e-9:
            raise ValueError("catalog frequencies sum to more than 1")
        return self

    @property
    def labels(self) -> list[str]:
        """Category labels in catalog order."""
        return [entry.label for entry in self.entries]

    def __len__(self) -> int:
        return len(self.entries)


class KeywordRule(BaseModel):
    """Keywords that assign a bill title to one area."""

    model_config = ConfigDict(frozen=True)

    label: str
    keywords: tuple[str, ...] = Field(min_length=1)

    @field_validator("keywords")
    @classmethod
    def _lowercase(cls, value: tuple[str, ...]) -> tuple[str, ...]:
        cleaned = tuple(k.strip().lower() for k in value)
        if any(not k for k in cleaned):
            raise ValueError("keywords must be non-empty")
        return cleaned


class KeywordDictionary(BaseModel):
    """Ordered keyword rules; the first rule with a matching keyword wins."""

    model_config = ConfigDict(frozen=True)

    rules: tuple[KeywordRule, ...]

    @field_validator("rules")
    @classmethod
    def _unique_labels(cls, value: tuple[KeywordRule, ...]) -> tuple[KeywordRule, ...]:
        labels = [rule.label for rule in value]
        duplicates = {label for label in labels if labels.count(label) > 1}
        if duplicates:
            raise ValueError(f"labels appear more than once: {sorted(duplicates)}")
        return value

    @property
    def labels(self) -> list[str]:
        """Area labels in rule order."""
        return [rule.label for rule in self.rules]


class RequestSchema(BaseModel):
    """Column names and date format of a service-request file."""

    date_column: str = "Created Date"
    date_format: str = "%m/%d/%Y %I:%M:%S %p"
    type_column: str = "Complaint Type"


class BillSchema(BaseModel):
    """Column names and date format of a bills file."""

    date_column: str = "Create Date"
    date_format: str = "%Y-%m-%d"
    title_column: str = "Bill Title"
    subject_column: str | None = "Bill Subject"
    health_area_column: str | None = "Health Area"


class RowRejection(BaseModel):
    """A data row that could not be turned into a record."""

    row: int  # 1-based, header excluded
    reason: str


class ParseReport(BaseModel):
    """Row accounting for one parsed file."""

    total_rows: int = 0
    accepted: int = 0
    rejections: list[RowRejection] = Field(default_factory=list)

    @property
    def rejected(self) -> int:
        """Number of rejected rows."""
        return len(self.rejections)


@dataclass
class ParseResult:
    """Records parsed from one file together with the row accounting.

    Attributes:
        records: Well-formed records in file order.
        report: Totals and rejected rows.
    """

    records: list = field(default_factory=list)
    report: ParseReport = field(default_factory=ParseReport)


class CategoryMatrix(BaseModel):
    """Per-category monthly series over a contiguous month span.

    Attributes:
        start_month: Month of column 0.
        categories: Row labels.
        values: One sequence per category, all of length T.
        kind: "count" (nonnegative integers), "share" (percent in [0, 100])
            or "residual" (any real, e.g. after deseasonalization).
    """

    model_config = ConfigDict(frozen=True)

    start_month: Month
    categories: tuple[str, ...]
    values: tuple[tuple[float, ...], ...]
    kind: MatrixKind = "count"

    @model_validator(mode="after")
    def _check_shape(self) -> CategoryMatrix:
        if len(self.categories) != len(self.values):
            raise ValueError("one value row is required per category")
        if len(set(self.categories)) != len(self.categories):
            raise ValueError("category labels must be unique")
        lengths = {len(row) for row in self.values}
        if len(lengths) > 1:
            raise ValueError("all category rows must share the same length")
        if lengths and lengths.pop() < 1:
            raise ValueError("series length must be at least 1")
        for row in self.values:
            for v in row:
                if self.kind == "count" and (v < 0 or v != int(v)):
                    raise ValueError(f"count matrix holds a non-count value: {v}")
                if self.kind == "share" and not 0.0 <= v <= 100.0:
                    raise ValueError(f"share matrix value out of [0, 100]: {v}")
        return self

    @classmethod
    def from_array(
        cls,
        start_month: Month,
        categories: list[str] | tuple[str, ...],
        array: np.ndarray,
        kind: MatrixKind = "count",
    ) -> CategoryMatrix:
        """Build a matrix from a (categories x months) numpy array."""
        rows = tuple(tuple(float(v) for v in row) for row in np.atleast_2d(array))
        return cls(start_month=start_month, categories=tuple(categories), values=rows, kind=kind)

    @property
    def length(self) -> int:
        """Series length T in months."""
        return len(self.values[0]) if self.values else 0

    @property
    def end_month(self) -> Month:
        """Month of the last column."""
        return self.start_month.shift(self.length - 1)

    def months(self) -> list[Month]:
        """Months covered, in column order."""
        return month_span(self.start_month, self.end_month)

    def to_array(self) -> np.ndarray:
        """Values as a float (categories x months) array."""
        return np.asarray(self.values, dtype=float).reshape(len(self.categories), self.length)

    def row(self, label: str) -> np.ndarray:
        """Series of one category.

        Raises:
            KeyError: If the label is not a row of this matrix.
        """
        if label not in self.categories:
            raise KeyError(label)
        return np.asarray(self.values[self.categories.index(label)], dtype=float)

    def to_frame(self) -> pd.DataFrame:
        """Months-by-categories DataFrame indexed by ISO year-month."""
        frame = pd.DataFrame(self.to_array().T, columns=list(self.categories))
        frame.index = pd.Index([m.iso() for m in self.months()], name="month")
        return frame

    def window(self, start: Month, end: Month) -> CategoryMatrix:
        """Sub-matrix restricted to [start, end].

        Raises:
            ArgumentError: If the window is empty or falls outside the matrix span.
        """
        lo = start.ordinal - self.start_month.ordinal
        hi = end.ordinal - self.start_month.ordinal + 1
        if lo < 0 or hi > self.length or lo >= hi:
            raise ArgumentError(f"window {start}..{end} is outside {self.start_month}..{self.end_month}")
        return CategoryMatrix.from_array(start, self.categories, self.to_array()[:, lo:hi], self.kind)
