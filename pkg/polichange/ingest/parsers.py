"""CSV and Excel parsing utilities for service-request and bill files."""

import csv
import io
import json
import logging
from collections.abc import Callable, Iterable
from datetime import datetime
from pathlib import Path
from typing import BinaryIO

import pandas as pd
from pydantic import ValidationError

from polichange.exceptions import ConfigurationError, DataParseError
from polichange.ingest.schemas import (
    BillRecord,
    BillSchema,
    KeywordDictionary,
    KeywordRule,
    ParseReport,
    ParseResult,
    RequestSchema,
    RowRejection,
    ServiceRequestRecord,
)

logger = logging.getLogger(__name__)

# Canonical capitalization of the health-related complaint categories
CANONICAL_CATEGORIES = [
    "Water System",
    "Dirty Conditions",
    "Sanitation Condition",
    "Rodent",
    "Food Establishment",
    "Air Quality",
    "Indoor Air Quality",
    "Food Poisoning",
    "Hazardous Materials",
    "Asbestos",
    "Smoking",
    "Drinking",
    "Water Quality",
]

_CANONICAL_BY_KEY = {label.casefold(): label for label in CANONICAL_CATEGORIES}

# Alternative spellings of the schema columns (case-insensitive)
COLUMN_ALIASES: dict[str, list[str]] = {
    "created date": ["created_date", "createddate", "created", "date created"],
    "complaint type": ["complaint_type", "complainttype", "type", "problem"],
    "create date": ["create_date", "createdate", "introduced", "date"],
    "bill title": ["bill_title", "title", "billtitle"],
    "bill subject": ["bill_subject", "subject"],
    "health area": ["health_area", "area"],
}

DEFAULT_DICTIONARY_PATH = Path(__file__).resolve().parent.parent / "data" / "keywords.json"


def normalize_category(label: str) -> str:
    """Normalize a complaint category label.

    Trims whitespace, collapses inner runs of spaces and compares
    case-insensitively against the canonical categories. Unknown labels are
    title-cased.

    Args:
        label: Raw complaint type from the source file.

    Returns:
        str: Canonical label.
    """
    collapsed = " ".join(label.split())
    canonical = _CANONICAL_BY_KEY.get(collapsed.casefold())
    if canonical:
        return canonical
    return collapsed.title()


def _column_key(name: str) -> str:
    return " ".join(name.replace("﻿", "").split()).casefold()


def resolve_column(columns: list[str], wanted: str) -> str | None:
    """Find the file column matching a schema column name.

    Exact (case-insensitive) matches win over aliases.

    Args:
        columns: Column names from the file header.
        wanted: Column name from the schema config.

    Returns:
        str | None: The matching file column, or None.
    """
    by_key = {_column_key(col): col for col in columns}
    key = _column_key(wanted)
    if key in by_key:
        return by_key[key]
    for alias in COLUMN_ALIASES.get(key, []):
        if alias in by_key:
            return by_key[alias]
    return None


def _require_columns(columns: list[str], wanted: dict[str, str | None]) -> dict[str, str | None]:
    """Map schema fields to file columns, failing on missing required ones."""
    mapping: dict[str, str | None] = {}
    missing = []
    for field_name, column in wanted.items():
        if column is None:
            mapping[field_name] = None
            continue
        resolved = resolve_column(columns, column)
        if resolved is None:
            missing.append(column)
        mapping[field_name] = resolved
    if missing:
        raise ConfigurationError(
            f"input is missing required column(s) {missing}; header has {columns}"
        )
    return mapping


def parse_csv_raw(file: BinaryIO) -> tuple[list[str], list[dict]]:
    """Parse CSV file into column names and raw row dictionaries.

    Args:
        file: File-like object containing UTF-8 CSV data.

    Returns:
        tuple: (list of column names, list of raw row dicts).

    Raises:
        DataParseError: If the content is not valid UTF-8 or not CSV.
    """
    try:
        content = file.read().decode("utf-8-sig")  # Handle BOM
    except UnicodeDecodeError as e:
        raise DataParseError(f"input is not valid UTF-8: {e}")
    try:
        reader = csv.DictReader(io.StringIO(content, newline=""))
        columns = reader.fieldnames or []
        rows = [dict(row) for row in reader]
    except csv.Error as e:
        raise DataParseError(f"malformed CSV: {e}")
    return list(columns), rows


def parse_excel_raw(file: BinaryIO) -> tuple[list[str], list[dict]]:
    """Parse Excel file into column names and raw row dictionaries.

    Args:
        file: File-like object containing Excel data.

    Returns:
        tuple: (list of column names, list of raw row dicts).
    """
    df = pd.read_excel(file, engine="openpyxl", dtype=str)
    columns = [str(c) for c in df.columns]

    # Convert to list of dicts, handling NaN values
    rows = []
    for _, row in df.iterrows():
        row_dict = {}
        for col in columns:
            value = row[col]
            if pd.isna(value):
                row_dict[col] = None
            else:
                row_dict[col] = str(value).strip()
        rows.append(row_dict)

    return columns, rows


def read_table(path: Path) -> tuple[list[str], list[dict]]:
    """Read a CSV or .xlsx file by extension.

    Args:
        path: Input file.

    Returns:
        tuple: (list of column names, list of raw row dicts).
    """
    with open(path, "rb") as handle:
        if path.suffix.lower() in (".xlsx", ".xlsm"):
            return parse_excel_raw(handle)
        return parse_csv_raw(handle)


def _parse_datetime(value: str | None, fmt: str) -> datetime:
    if value is None or not value.strip():
        raise ValueError("date is empty")
    return datetime.strptime(value.strip(), fmt)


def _collect(
    rows: Iterable[dict],
    build: Callable[[dict], object],
    strict: bool,
    label: str,
) -> ParseResult:
    """Build records row by row, accounting for malformed rows.

    Args:
        rows: Raw row dicts in file order.
        build: Turns one raw row into a record; raises ValueError when malformed.
        strict: Raise on the first malformed row instead of skipping it.
        label: Name of the input, used in log messages.

    Returns:
        ParseResult: Records and the row report.
    """
    records = []
    rejections: list[RowRejection] = []
    total = 0
    for i, row in enumerate(rows, start=1):
        total += 1
        try:
            records.append(build(row))
        except (ValueError, ValidationError) as e:
            reason = _reason(e)
            if strict:
                raise DataParseError(f"{label}: row {i} is malformed: {reason}", row_number=i)
            logger.debug("%s: rejecting row %d: %s", label, i, reason)
            rejections.append(RowRejection(row=i, reason=reason))

    if rejections:
        logger.warning("%s: rejected %d of %d rows", label, len(rejections), total)
    report = ParseReport(total_rows=total, accepted=len(records), rejections=rejections)
    return ParseResult(records=records, report=report)


def _reason(error: Exception) -> str:
    if isinstance(error, ValidationError):
        return "; ".join(f"{err['loc'][0]}: {err['msg']}" for err in error.errors())
    return str(error)


def request_rows_to_records(
    columns: list[str],
    rows: list[dict],
    schema: RequestSchema,
    strict: bool = False,
) -> ParseResult:
    """Validate raw request rows against a schema.

    Args:
        columns: File header.
        rows: Raw row dicts.
        schema: Column names and date format.
        strict: Fail on the first malformed row.

    Returns:
        ParseResult: ServiceRequestRecords in file order plus the row report.

    Raises:
        ConfigurationError: If the schema names columns absent from the header.
        DataParseError: In strict mode, for the first malformed row.
    """
    mapping = _require_columns(
        columns, {"date": schema.date_column, "type": schema.type_column}
    )

    def build(row: dict) -> ServiceRequestRecord:
        stamp = _parse_datetime(row.get(mapping["date"]), schema.date_format)
        return ServiceRequestRecord(
            created_date=stamp.date(),
            created_time=stamp.time(),
            complaint_type=row.get(mapping["type"]) or "",
        )

    return _collect(rows, build, strict, "requests")


def bill_rows_to_records(
    columns: list[str],
    rows: list[dict],
    schema: BillSchema,
    strict: bool = False,
) -> ParseResult:
    """Validate raw bill rows against a schema.

    The subject and health-area columns are optional: when the schema names
    them but the file lacks them, they are read as empty.

    Args:
        columns: File header.
        rows: Raw row dicts.
        schema: Column names and date format.
        strict: Fail on the first malformed row.

    Returns:
        ParseResult: BillRecords in file order plus the row report.
    """
    mapping = _require_columns(
        columns, {"date": schema.date_column, "title": schema.title_column}
    )
    subject_col = resolve_column(columns, schema.subject_column) if schema.subject_column else None
    area_col = (
        resolve_column(columns, schema.health_area_column) if schema.health_area_column else None
    )

    def build(row: dict) -> BillRecord:
        stamp = _parse_datetime(row.get(mapping["date"]), schema.date_format)
        title = (row.get(mapping["title"]) or "").strip()
        if not title:
            raise ValueError("bill title is empty")
        area = (row.get(area_col) or "").strip() if area_col else ""
        return BillRecord(
            create_date=stamp.date(),
            title=title,
            subject=(row.get(subject_col) or "").strip() if subject_col else "",
            health_area=area or None,
        )

    return _collect(rows, build, strict, "bills")


def parse_requests(
    file: BinaryIO,
    schema: RequestSchema | None = None,
    strict: bool = False,
) -> ParseResult:
    """Parse a service-request CSV stream.

    Args:
        file: Binary stream with a header-bearing UTF-8 CSV.
        schema: Column names and date format (defaults match 311 exports).
        strict: Fail on the first malformed row.

    Returns:
        ParseResult: One ServiceRequestRecord per well-formed row, in file order.
    """
    columns, rows = parse_csv_raw(file)
    return request_rows_to_records(columns, rows, schema or RequestSchema(), strict)


def parse_bills(
    file: BinaryIO,
    schema: BillSchema | None = None,
    strict: bool = False,
) -> ParseResult:
    """Parse a bills CSV stream.

    Args:
        file: Binary stream with a header-bearing UTF-8 CSV.
        schema: Column names and date format (defaults use ISO dates).
        strict: Fail on the first malformed row.

    Returns:
        ParseResult: One BillRecord per well-formed row, in file order.
    """
    columns, rows = parse_csv_raw(file)
    return bill_rows_to_records(columns, rows, schema or BillSchema(), strict)


def load_requests(path: Path, schema: RequestSchema, strict: bool = False) -> ParseResult:
    """Parse a request file from disk (.csv or .xlsx)."""
    columns, rows = read_table(path)
    return request_rows_to_records(columns, rows, schema, strict)


def load_bills(path: Path, schema: BillSchema, strict: bool = False) -> ParseResult:
    """Parse a bills file from disk (.csv or .xlsx)."""
    columns, rows = read_table(path)
    return bill_rows_to_records(columns, rows, schema, strict)


def load_schema_config(path: Path) -> tuple[RequestSchema, BillSchema]:
    """Load request and bill schemas from a JSON file.

    The file holds up to two objects, "requests" and "bills"; missing keys
    keep their defaults.

    Args:
        path: JSON schema config.

    Returns:
        tuple: (RequestSchema, BillSchema).

    Raises:
        ConfigurationError: If the file is not valid JSON or has unknown fields.
    """
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return (
            RequestSchema.model_validate(data.get("requests", {})),
            BillSchema.model_validate(data.get("bills", {})),
        )
    except (json.JSONDecodeError, ValidationError, AttributeError) as e:
        raise ConfigurationError(f"invalid schema config {path}: {e}")


def keyword_dictionary_from_mapping(data: dict) -> KeywordDictionary:
    """Build a keyword dictionary from its JSON form.

    The mapping holds one key per area label (value: list of keywords) plus an
    "order" list giving the rule precedence.

    Args:
        data: Parsed JSON object.

    Returns:
        KeywordDictionary: Validated dictionary.

    Raises:
        ConfigurationError: If the order and the labels disagree or a rule is invalid.
    """
    if not isinstance(data, dict) or not isinstance(data.get("order"), list):
        raise ConfigurationError('keyword dictionary needs an "order" array of labels')
    order = data["order"]
    labels = [key for key in data if key != "order"]
    if sorted(order) != sorted(labels) or len(set(order)) != len(order):
        raise ConfigurationError(
            f'"order" must list every label exactly once; order={order}, labels={labels}'
        )
    try:
        rules = tuple(KeywordRule(label=label, keywords=tuple(data[label])) for label in order)
        return KeywordDictionary(rules=rules)
    except (ValidationError, TypeError) as e:
        raise ConfigurationError(f"invalid keyword dictionary: {e}")


def load_keyword_dictionary(path: Path) -> KeywordDictionary:
    """Load a keyword dictionary JSON file.

    Args:
        path: Dictionary file.

    Returns:
        KeywordDictionary: Validated dictionary.
    """
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"keyword dictionary {path} is not valid JSON: {e}")
    return keyword_dictionary_from_mapping(data)


def default_keyword_dictionary() -> KeywordDictionary:
    """The keyword dictionary shipped with the package."""
    return load_keyword_dictionary(DEFAULT_DICTIONARY_PATH)


def keyword_dictionary_to_mapping(dictionary: KeywordDictionary) -> dict:
    """JSON form of a keyword dictionary (inverse of keyword_dictionary_from_mapping)."""
    data: dict = {"order": dictionary.labels}
    for rule in dictionary.rules:
        data[rule.label] = list(rule.keywords)
    return data
