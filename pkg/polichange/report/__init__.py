"""Report module: JSON reports, series CSVs and SVG charts."""

from polichange.report.schemas import (
    AnalysisReport,
    BillSummary,
    CategoryAnalysis,
    ChangePoint,
    RunMetadata,
    StageCount,
)
from polichange.report.serializers import (
    emit_classified_bills_csv,
    emit_report_json,
    emit_series_csv,
    encode_json,
    load_report_json,
    read_series_csv,
    report_to_json,
)
from polichange.report.svg import chart_filename, line_chart_svg, render_svg_chart

__all__ = [
    "AnalysisReport",
    "BillSummary",
    "CategoryAnalysis",
    "ChangePoint",
    "RunMetadata",
    "StageCount",
    "emit_classified_bills_csv",
    "encode_json",
    "emit_report_json",
    "emit_series_csv",
    "load_report_json",
    "read_series_csv",
    "report_to_json",
    "render_svg_chart",
    "line_chart_svg",
    "chart_filename",
]
