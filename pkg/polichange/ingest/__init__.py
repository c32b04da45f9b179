"""Ingestion module for service requests and bills."""

from polichange.ingest.parsers import (
    CANONICAL_CATEGORIES,
    default_keyword_dictionary,
    load_bills,
    load_keyword_dictionary,
    load_requests,
    load_schema_config,
    normalize_category,
    parse_bills,
    parse_requests,
)
from polichange.ingest.schemas import (
    NOT_APPLICABLE,
    BillRecord,
    BillSchema,
    CategoryCatalog,
    CategoryMatrix,
    KeywordDictionary,
    Month,
    ParseReport,
    ParseResult,
    RequestSchema,
    ServiceRequestRecord,
)
from polichange.ingest.service import (
    bill_monthly_counts,
    bill_monthly_share,
    bills_per_year,
    bin_monthly,
    classify_bill,
    classify_bills,
    select_top_categories,
    subsample,
)

__all__ = [
    "parse_requests",
    "parse_bills",
    "load_requests",
    "load_bills",
    "load_schema_config",
    "load_keyword_dictionary",
    "default_keyword_dictionary",
    "normalize_category",
    "CANONICAL_CATEGORIES",
    "subsample",
    "select_top_categories",
    "bin_monthly",
    "classify_bill",
    "classify_bills",
    "bill_monthly_counts",
    "bill_monthly_share",
    "bills_per_year",
    # Types
    "NOT_APPLICABLE",
    "BillRecord",
    "BillSchema",
    "CategoryCatalog",
    "CategoryMatrix",
    "KeywordDictionary",
    "Month",
    "ParseReport",
    "ParseResult",
    "RequestSchema",
    "ServiceRequestRecord",
]
