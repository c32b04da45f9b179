"""Subsampling, category selection, bill classification and monthly binning."""

import logging
from collections import Counter
from collections.abc import Sequence
from typing import TypeVar

import numpy as np
from pydantic import BaseModel

from polichange.exceptions import ArgumentError
from polichange.ingest.parsers import normalize_category
from polichange.ingest.schemas import (
    NOT_APPLICABLE,
    BillRecord,
    CatalogEntry,
    CategoryCatalog,
    CategoryMatrix,
    KeywordDictionary,
    Month,
    ServiceRequestRecord,
)

logger = logging.getLogger(__name__)

T = TypeVar("T")

MAX_CATEGORIES = 13
MIN_FRACTION = 0.005

Span = tuple[Month, Month]
Categories = CategoryCatalog | Sequence[str]


def _rng(seed: int) -> np.random.Generator:
    """Seeded PCG64 generator; negative seeds are folded into 64 bits."""
    return np.random.Generator(np.random.PCG64(seed & 0xFFFFFFFFFFFFFFFF))


def subsample(records: Sequence[T], n: int, seed: int = 0) -> list[T]:
    """Draw n records uniformly without replacement, keeping file order.

    Args:
        records: Population.
        n: Sample size.
        seed: Seed of the selection; equal seeds give equal samples.

    Returns:
        list: All records when n >= len(records), otherwise exactly n of them in
        their original relative order.

    Raises:
        ArgumentError: If n < 1.
    """
    if n < 1:
        raise ArgumentError(f"subsample size must be >= 1, got {n}")
    if n >= len(records):
        return list(records)
    # First n positions of a seeded permutation
    chosen = _rng(seed).permutation(len(records))[:n]
    chosen.sort()
    return [records[i] for i in chosen]


def select_top_categories(
    records: Sequence[ServiceRequestRecord],
    max_categories: int = MAX_CATEGORIES,
    min_fraction: float = MIN_FRACTION,
) -> CategoryCatalog:
    """Select the most frequent complaint categories.

    Frequencies are computed over all records. Categories below
    `min_fraction` are dropped (a category exactly at the threshold is kept);
    at most `max_categories` are retained, most frequent first, ties broken
    alphabetically.

    Args:
        records: Parsed service requests.
        max_categories: Catalog size cap.
        min_fraction: Minimum frequency of a retained category.

    Returns:
        CategoryCatalog: Selected categories.

    Raises:
        ArgumentError: If records is empty or the limits are out of range.
    """
    if not records:
        raise ArgumentError("cannot select categories from an empty record list")
    if not 1 <= max_categories <= MAX_CATEGORIES:
        raise ArgumentError(f"max_categories must be in 1..{MAX_CATEGORIES}")
    if not 0.0 <= min_fraction <= 1.0:
        raise ArgumentError("min_fraction must be in [0, 1]")

    counts = Counter(normalize_category(r.complaint_type) for r in records)
    total = len(records)
    ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    entries = [
        CatalogEntry(label=label, frequency=count / total)
        for label, count in ranked
        if count / total >= min_fraction
    ][:max_categories]

    logger.info(
        "selected %d of %d complaint categories (min fraction %.4f)",
        len(entries),
        len(counts),
        min_fraction,
    )
    return CategoryCatalog(entries=tuple(entries), min_fraction=min_fraction)


def _labels(categories: Categories) -> list[str]:
    if isinstance(categories, CategoryCatalog):
        return categories.labels
    return list(categories)


def _check_span(span: Span) -> Span:
    start, end = span
    if end < start:
        raise ArgumentError(f"span end {end} is before start {start}")
    return start, end


def bin_monthly(
    records: Sequence[ServiceRequestRecord],
    catalog: Categories,
    span: Span | None = None,
) -> CategoryMatrix:
    """Count in-catalog requests per category and calendar month.

    Args:
        records: Parsed service requests.
        catalog: Categories to keep; other complaint types are dropped.
        span: Inclusive (start, end) months; defaults to the months covered by
            in-catalog records.

    Returns:
        CategoryMatrix: Count matrix with zero-filled empty months.

    Raises:
        ArgumentError: If the catalog is empty, the span is inverted, or no
            record is in the catalog and no span is given.
    """
    labels = _labels(catalog)
    if not labels:
        raise ArgumentError("catalog is empty")
    index = {label: i for i, label in enumerate(labels)}

    kept = []
    for record in records:
        row = index.get(normalize_category(record.complaint_type))
        if row is not None:
            kept.append((row, Month.of(record.created_date).ordinal))

    if span is None:
        if not kept:
            raise ArgumentError("no in-catalog records and no explicit span")
        ordinals = [o for _, o in kept]
        span = (Month.from_ordinal(min(ordinals)), Month.from_ordinal(max(ordinals)))
    start, end = _check_span(span)

    counts = np.zeros((len(labels), end.ordinal - start.ordinal + 1), dtype=np.int64)
    for row, ordinal in kept:
        col = ordinal - start.ordinal
        if 0 <= col < counts.shape[1]:
            counts[row, col] += 1

    logger.debug("binned %d of %d records into %d months", counts.sum(), len(records), counts.shape[1])
    return CategoryMatrix.from_array(start, labels, counts, kind="count")


def classify_bill(bill: BillRecord, dictionary: KeywordDictionary) -> str | None:
    """Assign a bill to an area by keyword search in its title.

    Rules are tried in order; the first rule with a keyword occurring in the
    title (case-insensitive substring) wins.

    Args:
        bill: Bill to classify.
        dictionary: Ordered keyword rules.

    Returns:
        str | None: Area label, or None when no keyword matches.
    """
    title = bill.title.casefold()
    for rule in dictionary.rules:
        if any(keyword in title for keyword in rule.keywords):
            return rule.label
    return None


class ClassifiedBills(BaseModel):
    """Bills with their assigned areas and per-area tallies."""

    bills: list[BillRecord]
    tallies: dict[str, int]


def classify_bills(bills: Sequence[BillRecord], dictionary: KeywordDictionary) -> ClassifiedBills:
    """Classify every bill, filling health_area with a label or "N/A".

    Args:
        bills: Parsed bills.
        dictionary: Ordered keyword rules.

    Returns:
        ClassifiedBills: Classified copies of the bills and tallies keyed by
        area (dictionary order, "N/A" last).
    """
    tallies = dict.fromkeys(dictionary.labels, 0)
    tallies[NOT_APPLICABLE] = 0
    classified = []
    for bill in bills:
        area = classify_bill(bill, dictionary) or NOT_APPLICABLE
        tallies[area] += 1
        classified.append(bill.model_copy(update={"health_area": area}))
    logger.info(
        "classified %d bills, %d without a matching area", len(bills), tallies[NOT_APPLICABLE]
    )
    return ClassifiedBills(bills=classified, tallies=tallies)


def bill_span(bills: Sequence[BillRecord]) -> Span:
    """Months covered by the bills' create dates.

    Raises:
        ArgumentError: If there are no bills.
    """
    if not bills:
        raise ArgumentError("no bills")
    months = [Month.of(b.create_date) for b in bills]
    return min(months), max(months)


def _bill_counts(
    bills: Sequence[BillRecord], labels: list[str], span: Span
) -> tuple[np.ndarray, np.ndarray]:
    start, end = _check_span(span)
    index = {label: i for i, label in enumerate(labels)}
    counts = np.zeros((len(labels), end.ordinal - start.ordinal + 1), dtype=np.int64)
    totals = np.zeros(counts.shape[1], dtype=np.int64)
    for bill in bills:
        col = Month.of(bill.create_date).ordinal - start.ordinal
        if not 0 <= col < counts.shape[1]:
            continue
        totals[col] += 1
        row = index.get(bill.health_area or NOT_APPLICABLE)
        if row is not None:
            counts[row, col] += 1
    return counts, totals


def bill_monthly_counts(
    bills: Sequence[BillRecord], catalog: Categories, span: Span
) -> CategoryMatrix:
    """Number of classified bills per area and month.

    Args:
        bills: Classified bills.
        catalog: Areas to report.
        span: Inclusive (start, end) months.

    Returns:
        CategoryMatrix: Count matrix.
    """
    labels = _labels(catalog)
    counts, _ = _bill_counts(bills, labels, span)
    return CategoryMatrix.from_array(span[0], labels, counts, kind="count")


def bill_monthly_share(
    bills: Sequence[BillRecord], catalog: Categories, span: Span
) -> CategoryMatrix:
    """Percentage of each month's bills assigned to each area.

    Months without any bill hold 0 for every area. Unclassified bills count
    toward the monthly total, so the shares of a month sum to at most 100.

    Args:
        bills: Classified bills.
        catalog: Areas to report.
        span: Inclusive (start, end) months.

    Returns:
        CategoryMatrix: Share matrix.

    Raises:
        ArgumentError: If the span is inverted.
    """
    labels = _labels(catalog)
    counts, totals = _bill_counts(bills, labels, span)
    shares = np.zeros(counts.shape, dtype=float)
    np.divide(100.0 * counts, totals, out=shares, where=totals > 0)
    empty = int((totals == 0).sum())
    if empty:
        logger.info("%d month(s) without bills hold zero shares", empty)
    return CategoryMatrix.from_array(span[0], labels, np.clip(shares, 0.0, 100.0), kind="share")


def bills_per_year(
    bills: Sequence[BillRecord],
    area: str | Sequence[str],
    years: Sequence[int] | None = None,
) -> dict[int, int]:
    """Bills of one area (or group of areas) per calendar year.

    Args:
        bills: Classified bills.
        area: Area label, or member labels of a group.
        years: Years to report; defaults to every year from the first to the
            last bill in the input.

    Returns:
        dict: Year to count, ascending, zero for years without bills.
    """
    members = {area} if isinstance(area, str) else set(area)
    if years is None:
        if not bills:
            return {}
        first, last = bill_span(bills)
        years = range(first.year, last.year + 1)
    tally = dict.fromkeys(years, 0)
    for bill in bills:
        year = bill.create_date.year
        if year in tally and (bill.health_area or NOT_APPLICABLE) in members:
            tally[year] += 1
    return tally
