"""Tests for report serialization and charts."""

import json
from datetime import date

import pytest

from polichange.exceptions import DataParseError
from polichange.ingest import BillRecord, CategoryMatrix, Month
from polichange.ingest.schemas import CatalogEntry
from polichange.report import (
    AnalysisReport,
    BillSummary,
    CategoryAnalysis,
    ChangePoint,
    RunMetadata,
    StageCount,
    chart_filename,
    emit_classified_bills_csv,
    emit_report_json,
    emit_series_csv,
    encode_json,
    line_chart_svg,
    load_report_json,
    read_series_csv,
    render_svg_chart,
    report_to_json,
)
from polichange.segmentation import InflectionDirection
from polichange.stats import (
    AssociationResult,
    CategoryGroup,
    ChiSquareResult,
    CorrelationMatrix,
    LegislationTally,
)


def _analysis(label: str = "Rodent") -> CategoryAnalysis:
    counts = (4.0, 5.0, 4.0, 12.0, 11.0, 13.0)
    return CategoryAnalysis(
        label=label,
        members=(label,),
        counts=counts,
        residual=tuple(c - 0.1 for c in counts),
        dividers=(0, 3, 6),
        change_points=(ChangePoint(index=3, month="2010-04", direction=InflectionDirection.POSITIVE),),
        total_cost=4.0,
        penalty=1.0 / 3.0,
        bill_counts=(0.0, 1.0, 2.0, 0.0, 0.0, 1.0),
        bill_share=(0.0, 12.5, 100.0 / 3.0, 0.0, 0.0, 5.0),
        bills_per_year={2010: 4},
        chi_square=ChiSquareResult(statistic=0.0, degrees_of_freedom=1, p_value=1.0),
        association=AssociationResult(
            observed_statistic=3.0,
            permutation_count=99,
            p_value=0.13,
            window_months=3,
            null_mean=1.7,
            null_std=0.9,
            exceedances=12,
        ),
        legislation=LegislationTally(positive=0.0, negative=3.0),
    )


@pytest.fixture
def report() -> AnalysisReport:
    """A small hand-built report."""
    return AnalysisReport(
        metadata=RunMetadata(seed=7, config_digest="0" * 64, config={"seed": 7, "k": None}),
        start_month="2010-01",
        months=6,
        association_span=("2010-01", "2010-06"),
        catalog=(CatalogEntry(label="Rodent", frequency=0.6), CatalogEntry(label="Noise", frequency=0.4)),
        correlation=CorrelationMatrix(labels=("Rodent", "Noise"), values=((1.0, 0.25), (0.25, 1.0))),
        groups=(CategoryGroup(label="Rodent", members=("Rodent",)), CategoryGroup(label="Noise", members=("Noise",))),
        categories=(_analysis(),),
        bills=BillSummary(total=4, tallies={"Rodent": 4, "N/A": 0}),
        stages=(StageCount(stage="ingest", records_in=10, records_out=9, note="1 malformed"),),
        notes=("Noise: no bills",),
    )


class TestReportJson:
    """Tests for the JSON report."""

    def test_byte_identical(self, report, tmp_path):
        """Test writing the same report twice gives identical bytes."""
        emit_report_json(report, tmp_path / "a.json")
        emit_report_json(report, tmp_path / "b.json")
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()

    def test_round_trip(self, report, tmp_path):
        """Test a written report loads back equal, floats included."""
        emit_report_json(report, tmp_path / "report.json")
        loaded = load_report_json(tmp_path / "report.json")
        assert loaded == report
        assert loaded.category("Rodent").bill_share[2] == 100.0 / 3.0

    def test_valid_json(self, report):
        """Test the output parses as JSON and ends with a newline."""
        text = report_to_json(report)
        assert text.endswith("}\n")
        data = json.loads(text)
        assert data["schema_version"] == "polichange-report/1"
        assert data["categories"][0]["change_points"][0]["direction"] == "positive"

    def test_not_a_report(self, tmp_path):
        """Test malformed report files raise DataParseError."""
        path = tmp_path / "bad.json"
        path.write_text('{"schema_version": "x"}', encoding="utf-8")
        with pytest.raises(DataParseError):
            load_report_json(path)

    def test_unknown_category(self, report):
        """Test looking up a missing label raises KeyError."""
        with pytest.raises(KeyError):
            report.category("Noise")

    def test_change_points_match_dividers(self):
        """Test an analysis whose change points disagree with its dividers is rejected."""
        with pytest.raises(ValueError):
            CategoryAnalysis(
                label="a",
                members=("a",),
                counts=(1.0, 2.0),
                residual=(1.0, 2.0),
                dividers=(0, 1, 2),
                total_cost=0.0,
            )


class TestEncodeJson:
    """Tests for the deterministic encoder."""

    def test_sorted_keys(self):
        """Test keys are emitted in sorted order."""
        text = encode_json({"b": 1, "a": 2, "c": {"z": 0, "y": 1}})
        assert text.index('"a"') < text.index('"b"') < text.index('"c"')
        assert text.index('"y"') < text.index('"z"')

    def test_float_precision(self):
        """Test floats keep 17 significant digits and parse back exactly."""
        assert encode_json(0.1) == "0.10000000000000001"
        value = 2.0 / 3.0
        assert float(encode_json(value)) == value

    def test_scalars(self):
        """Test booleans, null, ints and strings."""
        assert encode_json(True) == "true"
        assert encode_json(None) == "null"
        assert encode_json(3) == "3"
        assert encode_json("a\"b") == '"a\\"b"'
        assert encode_json([]) == "[]"
        assert encode_json({}) == "{}"

    def test_non_finite(self):
        """Test NaN cannot be serialized."""
        with pytest.raises(ValueError):
            encode_json(float("nan"))


class TestSeriesCsv:
    """Tests for the series CSV files."""

    def test_count_layout(self, tmp_path):
        """Test a two-month one-category count matrix."""
        matrix = CategoryMatrix.from_array(Month(2010, 1), ["Rodent"], [[3, 2]])
        emit_series_csv(matrix, tmp_path / "counts.csv")
        text = (tmp_path / "counts.csv").read_text(encoding="utf-8")
        assert text == "month,Rodent\n2010-01,3\n2010-02,2\n"

    def test_counts_round_trip(self, tmp_path, rng):
        """Test counts read back equal with the kind inferred."""
        matrix = CategoryMatrix.from_array(Month(2011, 11), ["a", "b c"], rng.poisson(8.0, size=(2, 14)))
        emit_series_csv(matrix, tmp_path / "counts.csv")
        assert read_series_csv(tmp_path / "counts.csv") == matrix

    def test_shares_round_trip(self, tmp_path):
        """Test shares read back exactly."""
        matrix = CategoryMatrix.from_array(
            Month(2010, 1), ["a"], [[12.5, 100.0 / 3.0, 0.0, 100.0]], kind="share"
        )
        emit_series_csv(matrix, tmp_path / "share.csv")
        assert read_series_csv(tmp_path / "share.csv", kind="share") == matrix

    def test_share_kind_from_file_name(self, tmp_path):
        """Test a share file keeps its kind even when every share is whole."""
        matrix = CategoryMatrix.from_array(Month(2010, 1), ["a"], [[0.0, 50.0, 100.0]], kind="share")
        emit_series_csv(matrix, tmp_path / "bill_share.csv")
        assert read_series_csv(tmp_path / "bill_share.csv") == matrix

    def test_share_out_of_range(self, write_csv):
        """Test a share file with values above 100 is rejected."""
        path = write_csv("bill_share.csv", ["month", "a"], [["2010-01", 140.0]])
        with pytest.raises(DataParseError):
            read_series_csv(path)

    def test_residuals_inferred(self, tmp_path):
        """Test negative or fractional values are read as residuals."""
        matrix = CategoryMatrix.from_array(Month(2010, 1), ["a"], [[-1.25, 0.5, 2.0]], kind="residual")
        emit_series_csv(matrix, tmp_path / "residual.csv")
        assert read_series_csv(tmp_path / "residual.csv").kind == "residual"

    def test_gap_in_months(self, write_csv):
        """Test non-contiguous months are rejected."""
        path = write_csv("gap.csv", ["month", "a"], [["2010-01", 1], ["2010-03", 2]])
        with pytest.raises(DataParseError):
            read_series_csv(path)

    def test_bad_values(self, write_csv):
        """Test non-numeric cells and missing month columns are rejected."""
        with pytest.raises(DataParseError):
            read_series_csv(write_csv("text.csv", ["month", "a"], [["2010-01", "many"]]))
        with pytest.raises(DataParseError):
            read_series_csv(write_csv("nomonth.csv", ["when", "a"], [["2010-01", 1]]))

    def test_classified_bills(self, tmp_path):
        """Test classified bills are written with their area, N/A when unmatched."""
        bills = [
            BillRecord(create_date=date(2012, 3, 4), title="Rat control act", health_area="Rodent"),
            BillRecord(create_date=date(2012, 5, 6), title="Parking rules", health_area="N/A"),
        ]
        emit_classified_bills_csv(bills, tmp_path / "bills.csv")
        lines = (tmp_path / "bills.csv").read_text(encoding="utf-8").splitlines()
        assert lines[0] == "Create Date,Bill Title,Bill Subject,Health Area"
        assert lines[1] == "2012-03-04,Rat control act,,Rodent"
        assert lines[2].endswith(",N/A")


class TestSvg:
    """Tests for the SVG charts."""

    VALUES = [float(v % 7) for v in range(20)]

    def test_no_dividers(self):
        """Test a chart without interior dividers has no dashed lines."""
        svg = line_chart_svg("Rodent", Month(2010, 1), self.VALUES, [0, 20])
        assert svg.startswith("<svg")
        assert svg.count('class="divider"') == 0
        assert "stroke-dasharray" not in svg

    def test_one_divider(self):
        """Test one interior divider gives exactly one dashed line."""
        svg = line_chart_svg("Rodent", Month(2010, 1), self.VALUES, [0, 5, 20])
        assert svg.count('class="divider"') == 1
        assert svg.count("stroke-dasharray") == 1

    def test_deterministic(self):
        """Test equal inputs give equal markup."""
        first = line_chart_svg("a & b", Month(2010, 6), self.VALUES, [0, 7, 12, 20])
        assert first == line_chart_svg("a & b", Month(2010, 6), self.VALUES, [0, 7, 12, 20])
        assert "a &amp; b" in first

    def test_flat_series(self):
        """Test a constant series renders."""
        svg = line_chart_svg("flat", Month(2010, 1), [2.0] * 5)
        assert 'class="series"' in svg

    def test_chart_filename(self):
        """Test labels become file-system safe slugs."""
        assert chart_filename("Food Establishment+Rodent") == "food-establishment-rodent.svg"
        assert chart_filename("***") == "series.svg"

    def test_render_matrix(self, tmp_path):
        """Test one chart per category, dashed lines only where dividers are given."""
        matrix = CategoryMatrix.from_array(Month(2010, 1), ["Rodent", "Noise"], [self.VALUES, self.VALUES[::-1]])
        paths = render_svg_chart(matrix, {"Rodent": [0, 10, 20]}, tmp_path / "charts")
        assert [p.name for p in paths] == ["rodent.svg", "noise.svg"]
        assert paths[0].read_text(encoding="utf-8").count('class="divider"') == 1
        assert paths[1].read_text(encoding="utf-8").count('class="divider"') == 0

    def test_colliding_names(self, tmp_path):
        """Test labels with the same slug get distinct files."""
        labels = ["Noise - Street", "Noise Street", "noise street-2"]
        matrix = CategoryMatrix.from_array(Month(2010, 1), labels, [self.VALUES] * 3)
        paths = render_svg_chart(matrix, {}, tmp_path / "charts")
        assert [p.name for p in paths] == ["noise-street.svg", "noise-street-2.svg", "noise-street-2-2.svg"]
        assert len(list((tmp_path / "charts").glob("*.svg"))) == 3
        assert "Noise Street" in paths[1].read_text(encoding="utf-8")
