"""Tests for request and bill parsing."""

import io
import json
from datetime import date, time

import pytest
from openpyxl import Workbook

from polichange.exceptions import ConfigurationError, DataParseError
from polichange.ingest import (
    BillSchema,
    RequestSchema,
    load_bills,
    load_keyword_dictionary,
    load_requests,
    load_schema_config,
    normalize_category,
    parse_bills,
    parse_requests,
)
from polichange.ingest.parsers import (
    keyword_dictionary_from_mapping,
    keyword_dictionary_to_mapping,
    resolve_column,
)


class TestParseRequests:
    """Tests for service-request CSV parsing."""

    def test_single_row_maps_fields(self, csv_bytes):
        """Test a 311-style row becomes a dated record."""
        data = csv_bytes(["Created Date", "Complaint Type"], [["05/02/2012 10:00:00 AM", "Rodent"]])
        result = parse_requests(io.BytesIO(data))
        assert len(result.records) == 1
        record = result.records[0]
        assert record.created_date == date(2012, 5, 2)
        assert record.created_time == time(10, 0, 0)
        assert record.complaint_type == "Rodent"

    def test_header_only(self, csv_bytes):
        """Test a file with only a header gives no records."""
        result = parse_requests(io.BytesIO(csv_bytes(["Created Date", "Complaint Type"], [])))
        assert result.records == []
        assert result.report.total_rows == 0
        assert result.report.rejected == 0

    def test_malformed_row_is_reported(self, csv_bytes):
        """Test 3 valid rows and 1 bad date give 3 records and 1 rejection."""
        rows = [
            ["01/05/2010 08:00:00 AM", "Rodent"],
            ["01/06/2010 09:30:00 PM", "Smoking"],
            ["not a date", "Rodent"],
            ["02/01/2010 12:00:00 PM", "Asbestos"],
        ]
        result = parse_requests(io.BytesIO(csv_bytes(["Created Date", "Complaint Type"], rows)))
        assert len(result.records) == 3
        assert result.report.rejected == 1
        assert result.report.rejections[0].row == 3
        assert [r.complaint_type for r in result.records] == ["Rodent", "Smoking", "Asbestos"]

    def test_strict_mode_names_row(self, csv_bytes):
        """Test strict mode fails on the first malformed row."""
        rows = [["01/05/2010 08:00:00 AM", "Rodent"], ["01/06/2010 08:00:00 AM", "   "]]
        with pytest.raises(DataParseError) as exc:
            parse_requests(
                io.BytesIO(csv_bytes(["Created Date", "Complaint Type"], rows)), strict=True
            )
        assert exc.value.row_number == 2
        assert "row 2" in str(exc.value)

    def test_missing_column(self, csv_bytes):
        """Test a header without the type column is a configuration error."""
        data = csv_bytes(["Created Date", "Borough"], [["05/02/2012 10:00:00 AM", "BRONX"]])
        with pytest.raises(ConfigurationError):
            parse_requests(io.BytesIO(data))

    def test_column_aliases(self, csv_bytes):
        """Test snake_case headers resolve to the schema columns."""
        data = csv_bytes(["created_date", "complaint_type"], [["05/02/2012 10:00:00 AM", "Rodent"]])
        result = parse_requests(io.BytesIO(data))
        assert len(result.records) == 1

    def test_custom_schema(self, csv_bytes):
        """Test column names and date format come from the schema."""
        schema = RequestSchema(date_column="When", date_format="%Y-%m-%d", type_column="What")
        data = csv_bytes(["When", "What"], [["2014-07-09", "Smoking"]])
        result = parse_requests(io.BytesIO(data), schema)
        assert result.records[0].created_date == date(2014, 7, 9)

    def test_byte_order_mark(self):
        """Test a UTF-8 BOM in front of the header is ignored."""
        data = "\ufeffCreated Date,Complaint Type\n05/02/2012 10:00:00 AM,Rodent\n".encode()
        assert len(parse_requests(io.BytesIO(data)).records) == 1

    def test_invalid_utf8(self):
        """Test undecodable bytes are a parse error."""
        with pytest.raises(DataParseError):
            parse_requests(io.BytesIO(b"Created Date,Complaint Type\n\xff\xfe,\xff\n"))


class TestParseBills:
    """Tests for bill CSV parsing."""

    HEADER = ["Create Date", "Bill Title", "Bill Subject"]

    def test_iso_dates(self, csv_bytes):
        """Test bills use ISO dates by default."""
        data = csv_bytes(self.HEADER, [["2013-04-01", "Prohibits the sale of sugary drinks", "Health"]])
        bill = parse_bills(io.BytesIO(data)).records[0]
        assert bill.create_date == date(2013, 4, 1)
        assert bill.subject == "Health"
        assert bill.health_area is None

    def test_empty_title_rejected(self, csv_bytes):
        """Test a row without a title is rejected."""
        rows = [["2013-04-01", "", "Health"], ["2013-04-02", "Textbook Transparency Act", "Education"]]
        result = parse_bills(io.BytesIO(csv_bytes(self.HEADER, rows)))
        assert len(result.records) == 1
        assert result.report.rejections[0].row == 1

    def test_optional_columns(self, csv_bytes):
        """Test subject and area columns may be absent."""
        data = csv_bytes(["Create Date", "Bill Title"], [["2013-04-01", "Relates to asbestos"]])
        bill = parse_bills(io.BytesIO(data)).records[0]
        assert bill.subject == ""
        assert bill.health_area is None

    def test_existing_health_area_kept(self, csv_bytes):
        """Test a pre-assigned area column is read."""
        data = csv_bytes(
            ["Create Date", "Bill Title", "Health Area"], [["2013-04-01", "A title", "Smoking"]]
        )
        assert parse_bills(io.BytesIO(data)).records[0].health_area == "Smoking"

    def test_missing_title_column(self, csv_bytes):
        """Test a header without a title column is a configuration error."""
        with pytest.raises(ConfigurationError):
            parse_bills(io.BytesIO(csv_bytes(["Create Date"], [["2013-04-01"]])))


class TestFileLoading:
    """Tests for loading CSV and Excel files from disk."""

    def test_load_requests_csv(self, write_csv):
        """Test a CSV on disk is parsed like a stream."""
        path = write_csv(
            "requests.csv",
            ["Created Date", "Complaint Type"],
            [["05/02/2012 10:00:00 AM", "Rodent"], ["05/03/2012 11:00:00 AM", "Smoking"]],
        )
        result = load_requests(path, RequestSchema())
        assert [r.complaint_type for r in result.records] == ["Rodent", "Smoking"]

    def test_load_requests_excel(self, tmp_path):
        """Test .xlsx files go through the same row validation."""
        wb = Workbook()
        ws = wb.active
        ws.append(["Created Date", "Complaint Type"])
        ws.append(["05/02/2012 10:00:00 AM", "Rodent"])
        ws.append(["garbage", "Rodent"])
        path = tmp_path / "requests.xlsx"
        wb.save(path)

        result = load_requests(path, RequestSchema())
        assert len(result.records) == 1
        assert result.records[0].created_date == date(2012, 5, 2)
        assert result.report.rejected == 1

    def test_load_bills_excel(self, tmp_path):
        """Test bills can be read from Excel."""
        wb = Workbook()
        ws = wb.active
        ws.append(["Create Date", "Bill Title", "Bill Subject"])
        ws.append(["2014-01-15", "Concentration of fluoride in water", "Health"])
        path = tmp_path / "bills.xlsx"
        wb.save(path)

        result = load_bills(path, BillSchema())
        assert result.records[0].title == "Concentration of fluoride in water"

    def test_missing_file(self, tmp_path):
        """Test an absent file raises an I/O error."""
        with pytest.raises(OSError):
            load_requests(tmp_path / "absent.csv", RequestSchema())


class TestSchemaConfig:
    """Tests for the JSON schema config."""

    def test_partial_config_keeps_defaults(self, tmp_path):
        """Test unspecified sections keep their defaults."""
        path = tmp_path / "schema.json"
        path.write_text(json.dumps({"requests": {"date_format": "%Y-%m-%d"}}))
        requests, bills = load_schema_config(path)
        assert requests.date_format == "%Y-%m-%d"
        assert requests.type_column == "Complaint Type"
        assert bills == BillSchema()

    def test_invalid_json(self, tmp_path):
        """Test malformed JSON is a configuration error."""
        path = tmp_path / "schema.json"
        path.write_text("{not json")
        with pytest.raises(ConfigurationError):
            load_schema_config(path)


class TestNormalizeCategory:
    """Tests for complaint label normalization."""

    def test_canonical_capitalization(self):
        """Test known categories map to their canonical form."""
        assert normalize_category("rodent") == "Rodent"
        assert normalize_category("HAZARDOUS MATERIALS") == "Hazardous Materials"
        assert normalize_category("  indoor   air quality ") == "Indoor Air Quality"

    def test_unknown_labels_title_cased(self):
        """Test unknown labels are trimmed and title-cased."""
        assert normalize_category(" street light condition") == "Street Light Condition"

    def test_resolve_column_prefers_exact(self):
        """Test an exact header match wins over an alias."""
        assert resolve_column(["title", "Bill Title"], "Bill Title") == "Bill Title"
        assert resolve_column(["title"], "Bill Title") == "title"
        assert resolve_column(["other"], "Bill Title") is None


class TestKeywordDictionary:
    """Tests for keyword dictionary loading."""

    def test_default_dictionary(self, keyword_dictionary):
        """Test the bundled dictionary covers the 13 areas, specific ones first."""
        labels = keyword_dictionary.labels
        assert len(labels) == 13
        assert labels.index("Indoor Air Quality") < labels.index("Air Quality")
        assert all(rule.keywords for rule in keyword_dictionary.rules)

    def test_mapping_round_trip(self, keyword_dictionary):
        """Test the JSON form rebuilds the same dictionary."""
        mapping = keyword_dictionary_to_mapping(keyword_dictionary)
        assert keyword_dictionary_from_mapping(mapping) == keyword_dictionary

    def test_keywords_lowercased(self):
        """Test keywords are stored lowercase."""
        dictionary = keyword_dictionary_from_mapping({"order": ["Smoking"], "Smoking": ["Tobacco "]})
        assert dictionary.rules[0].keywords == ("tobacco",)

    def test_order_must_match_labels(self):
        """Test an order array missing a label is rejected."""
        with pytest.raises(ConfigurationError):
            keyword_dictionary_from_mapping({"order": ["Smoking"], "Smoking": ["x"], "Rodent": ["y"]})

    def test_empty_keyword_list(self):
        """Test a rule without keywords is rejected."""
        with pytest.raises(ConfigurationError):
            keyword_dictionary_from_mapping({"order": ["Smoking"], "Smoking": []})

    def test_missing_order(self):
        """Test a mapping without an order array is rejected."""
        with pytest.raises(ConfigurationError):
            keyword_dictionary_from_mapping({"Smoking": ["tobacco"]})

    def test_load_from_file(self, tmp_path):
        """Test a dictionary file on disk."""
        path = tmp_path / "keywords.json"
        path.write_text(json.dumps({"order": ["Rodent", "Smoking"], "Smoking": ["tobacco"], "Rodent": ["rat"]}))
        dictionary = load_keyword_dictionary(path)
        assert dictionary.labels == ["Rodent", "Smoking"]

    def test_invalid_json_file(self, tmp_path):
        """Test a broken dictionary file is a configuration error."""
        path = tmp_path / "keywords.json"
        path.write_text("[")
        with pytest.raises(ConfigurationError):
            load_keyword_dictionary(path)
