"""polichange: change-point analysis of civic complaints against legislation."""

__version__ = "0.1.0"

REPORT_SCHEMA_VERSION = "polichange-report/1"
