"""Serialization of reports and monthly series.

JSON is written with sorted keys and every float at 17 significant digits, so
equal reports give equal bytes and floats survive a round trip exactly.
"""

import csv
import json
import logging
import math
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from polichange.exceptions import DataParseError
from polichange.ingest.schemas import (
    NOT_APPLICABLE,
    BillRecord,
    BillSchema,
    CategoryMatrix,
    MatrixKind,
    Month,
)
from polichange.report.schemas import AnalysisReport

logger = logging.getLogger(__name__)

INDENT = 2


def serialize_float(value: float) -> str:
    """Format a float with 17 significant digits.

    Raises:
        ValueError: For NaN and infinities, which JSON cannot carry.
    """
    if not math.isfinite(value):
        raise ValueError(f"cannot serialize non-finite float {value}")
    return format(value, ".17g")


def encode_json(value: Any, level: int = 0) -> str:
    """Deterministic JSON text for plain data (dicts, lists, scalars)."""
    pad = " " * (INDENT * (level + 1))
    close = " " * (INDENT * level)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [
            f"{pad}{json.dumps(str(key))}: {encode_json(value[key], level + 1)}"
            for key in sorted(value, key=str)
        ]
        return "{\n" + ",\n".join(items) + "\n" + close + "}"
    if isinstance(value, list | tuple):
        if not value:
            return "[]"
        items = [pad + encode_json(item, level + 1) for item in value]
        return "[\n" + ",\n".join(items) + "\n" + close + "]"
    if isinstance(value, bool) or value is None:
        return json.dumps(value)
    if isinstance(value, float):
        return serialize_float(value)
    if isinstance(value, int):
        return str(value)
    return json.dumps(str(value), ensure_ascii=False)


def report_to_json(report: AnalysisReport) -> str:
    """Canonical JSON text of a report."""
    return encode_json(report.model_dump(mode="json")) + "\n"


def emit_report_json(report: AnalysisReport, destination: Path) -> None:
    """Write a report as canonical UTF-8 JSON.

    Raises:
        OSError: If the destination cannot be written.
    """
    destination = Path(destination)
    destination.write_text(report_to_json(report), encoding="utf-8")
    logger.debug("wrote report %s", destination)


def load_report_json(path: Path) -> AnalysisReport:
    """Read a report written by emit_report_json.

    Raises:
        OSError: If the file cannot be read.
        DataParseError: If the content is not a valid report.
    """
    text = Path(path).read_text(encoding="utf-8")
    try:
        return AnalysisReport.model_validate_json(text)
    except ValueError as e:
        raise DataParseError(f"{path} is not a polichange report: {e}") from e


def _format_cell(value: float, kind: MatrixKind) -> str:
    if kind == "count":
        return str(int(value))
    return serialize_float(value)


def emit_series_csv(matrix: CategoryMatrix, destination: Path) -> None:
    """Write a matrix as CSV: a "month" column then one column per category.

    Raises:
        OSError: If the destination cannot be written.
    """
    data = matrix.to_array()
    with open(destination, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["month", *matrix.categories])
        for col, month in enumerate(matrix.months()):
            writer.writerow([month.iso(), *(_format_cell(v, matrix.kind) for v in data[:, col])])


def read_series_csv(path: Path, kind: MatrixKind | None = None) -> CategoryMatrix:
    """Read a series CSV back into a matrix.

    Args:
        path: File written by emit_series_csv, or any CSV with a "month"
            column of contiguous ISO year-months and numeric category columns.
        kind: Matrix kind. When omitted, files named like "*share.csv" or
            "*residual.csv" take that kind; anything else is "count" when
            every value is a nonnegative integer and "residual" otherwise.

    Raises:
        DataParseError: If the months are missing, malformed or not contiguous,
            a value is not numeric, or the values do not fit the kind.
    """
    try:
        frame = pd.read_csv(path, dtype={"month": str}, float_precision="round_trip")
    except (ValueError, pd.errors.ParserError) as e:
        raise DataParseError(f"cannot read series file {path}: {e}") from e
    if "month" not in frame.columns or frame.empty:
        raise DataParseError(f"{path} needs a 'month' column and at least one row")
    try:
        months = [Month.parse(text) for text in frame["month"]]
        values = frame.drop(columns="month").astype(float).to_numpy().T
    except (TypeError, ValueError) as e:
        raise DataParseError(f"malformed series file {path}: {e}") from e
    if not np.isfinite(values).all():
        raise DataParseError(f"{path} has empty or non-finite values")
    if [m.ordinal for m in months] != list(range(months[0].ordinal, months[0].ordinal + len(months))):
        raise DataParseError(f"months in {path} are not contiguous")
    if kind is None:
        kind = _kind_from_name(Path(path))
    if kind is None:
        integral = bool(((values >= 0) & (values == values.round())).all())
        kind = "count" if integral else "residual"
    categories = [str(c) for c in frame.columns if c != "month"]
    try:
        return CategoryMatrix.from_array(months[0], categories, values, kind=kind)
    except ValueError as e:
        raise DataParseError(f"{path} does not hold a {kind} matrix: {e}") from e


def _kind_from_name(path: Path) -> MatrixKind | None:
    stem = path.stem.lower()
    if stem.endswith("share"):
        return "share"
    if stem.endswith("residual"):
        return "residual"
    return None


def emit_classified_bills_csv(
    bills: list[BillRecord], destination: Path, schema: BillSchema | None = None
) -> None:
    """Write classified bills with their assigned area.

    Raises:
        OSError: If the destination cannot be written.
    """
    schema = schema or BillSchema()
    with open(destination, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(
            [
                schema.date_column,
                schema.title_column,
                schema.subject_column or "Bill Subject",
                schema.health_area_column or "Health Area",
            ]
        )
        for bill in bills:
            writer.writerow(
                [
                    bill.create_date.strftime(schema.date_format),
                    bill.title,
                    bill.subject,
                    bill.health_area or NOT_APPLICABLE,
                ]
            )
