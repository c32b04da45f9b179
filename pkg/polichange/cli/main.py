"""Command-line entry point."""

import argparse
import json
import logging
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from polichange import __version__
from polichange.cli.pipeline import run_pipeline
from polichange.config import PipelineConfig
from polichange.exceptions import EXIT_DATA, EXIT_OK, ConfigurationError, PolichangeError
from polichange.ingest import (
    BillSchema,
    classify_bills,
    default_keyword_dictionary,
    load_bills,
    load_keyword_dictionary,
    load_schema_config,
)
from polichange.report import (
    emit_classified_bills_csv,
    encode_json,
    load_report_json,
    read_series_csv,
)
from polichange.seasonal import deseasonalize_matrix
from polichange.seasonal.service import PERIOD
from polichange.segmentation import DetectionMode, classify_inflection, detect
from polichange.synthetic import write_fixture

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

# Flag destination -> PipelineConfig field
CONFIG_FLAGS = {
    "requests": "requests_path",
    "bills": "bills_path",
    "dictionary": "dictionary_path",
    "schema": "schema_path",
    "out": "out_dir",
    "subsample_n": "subsample_n",
    "seed": "seed",
    "max_categories": "max_categories",
    "min_fraction": "min_fraction",
    "group_threshold": "group_threshold",
    "mode": "detection_mode",
    "k": "n_change_points",
    "beta": "beta",
    "min_segment_length": "min_segment_length",
    "window": "window",
    "n_perm": "n_perm",
    "deseasonalize_bills": "deseasonalize_bills",
    "association_span": "association_span",
    "strict": "strict",
    "run_timestamp": "run_timestamp",
}
PATH_FIELDS = ("requests_path", "bills_path", "dictionary_path", "schema_path", "out_dir")


def _beta(text: str) -> float | str:
    if text == "auto":
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or 'auto', got {text!r}")


def _add_logging_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group()
    group.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    group.add_argument("-q", "--quiet", action="store_true", help="warnings and errors only")


def add_config_flags(parser: argparse.ArgumentParser) -> None:
    """Flags mirroring PipelineConfig; unset flags leave lower sources in charge."""
    parser.add_argument("--config", type=Path, help="JSON file of PipelineConfig fields")
    parser.add_argument("--requests", type=Path, help="service-request CSV or .xlsx")
    parser.add_argument("--bills", type=Path, help="bills CSV or .xlsx")
    parser.add_argument("--dictionary", type=Path, help="keyword dictionary JSON")
    parser.add_argument("--schema", type=Path, help="column/date-format JSON")
    parser.add_argument("--out", type=Path, help="output directory")
    parser.add_argument("--subsample-n", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--max-categories", type=int)
    parser.add_argument("--min-fraction", type=float)
    parser.add_argument("--group-threshold", type=float)
    parser.add_argument("--mode", choices=[m.value for m in DetectionMode])
    parser.add_argument("--k", "--n-change-points", dest="k", type=int)
    parser.add_argument("--beta", type=_beta, help="penalty per change point, or 'auto'")
    parser.add_argument("--min-segment-length", type=int)
    parser.add_argument("--window", type=int, help="association window in months")
    parser.add_argument("--n-perm", type=int)
    parser.add_argument("--deseasonalize-bills", action="store_true", default=None)
    parser.add_argument("--association-span", help="YYYY-MM:YYYY-MM")
    parser.add_argument("--strict", action="store_true", default=None)
    parser.add_argument("--run-timestamp", help="timestamp echoed into the report")


def load_config_file(path: Path) -> dict[str, Any]:
    """Read a JSON config file; relative paths resolve against its directory.

    Raises:
        ConfigurationError: If the file is unreadable or not a JSON object.
    """
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigurationError(f"cannot read config file {path}: {e}")
    if not isinstance(data, dict):
        raise ConfigurationError(f"config file {path} must hold a JSON object")
    base = Path(path).parent
    for key in PATH_FIELDS:
        if isinstance(data.get(key), str) and not Path(data[key]).is_absolute():
            data[key] = str(base / data[key])
    return data


def config_from_args(args: argparse.Namespace) -> PipelineConfig:
    """Merge flags over the config file and build a validated config.

    Raises:
        ConfigurationError: If a value is out of range or a field is unknown.
    """
    values: dict[str, Any] = load_config_file(args.config) if args.config else {}
    for flag, field_name in CONFIG_FLAGS.items():
        value = getattr(args, flag, None)
        if value is None:
            continue
        values[field_name] = None if value == "auto" else value
    try:
        return PipelineConfig(**values)
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}" for err in e.errors()
        )
        raise ConfigurationError(f"invalid configuration: {problems}")


def parse_config(argv: Sequence[str]) -> PipelineConfig:
    """Build a PipelineConfig from `run` flags.

    Flags override `--config` file values, which override POLICHANGE_*
    environment variables and the defaults.

    Raises:
        SystemExit: With status 2 for unknown flags or malformed values.
        ConfigurationError: For values outside their valid range.
    """
    parser = argparse.ArgumentParser(prog="polichange run")
    add_config_flags(parser)
    return config_from_args(parser.parse_args(list(argv)))


# --- Subcommands ---


def cmd_run(args: argparse.Namespace) -> int:
    config = config_from_args(args)
    if config.requests_path is None or config.bills_path is None or config.out_dir is None:
        raise ConfigurationError("run needs --requests, --bills and --out (or the config file)")
    logger.info("running pipeline with config digest %s", config.digest())
    return run_pipeline(config)


def cmd_detect(args: argparse.Namespace) -> int:
    matrix = read_series_csv(args.series)
    labels = args.column or list(matrix.categories)
    if args.deseasonalize:
        if matrix.length < PERIOD:
            raise ConfigurationError(f"--deseasonalize needs at least {PERIOD} months")
        matrix, _ = deseasonalize_matrix(matrix, PERIOD)
    months = matrix.months()
    beta = None if args.beta in (None, "auto") else args.beta
    result = {}
    for label in labels:
        try:
            series = matrix.row(label)
        except KeyError:
            raise ConfigurationError(f"no column {label!r} in {args.series}")
        segmentation = detect(series, DetectionMode(args.mode), args.k, beta, args.min_segment_length)
        result[label] = {
            "dividers": list(segmentation.dividers),
            "change_points": [
                {
                    "index": t,
                    "month": months[t].iso(),
                    "direction": classify_inflection(series, segmentation, t).value,
                }
                for t in segmentation.change_points
            ],
            "total_cost": segmentation.total_cost,
            "penalty": segmentation.penalty,
        }
    print(encode_json(result))
    return EXIT_OK


def cmd_classify(args: argparse.Namespace) -> int:
    bill_schema = load_schema_config(args.schema)[1] if args.schema else BillSchema()
    dictionary = (
        load_keyword_dictionary(args.dictionary) if args.dictionary else default_keyword_dictionary()
    )
    parsed = load_bills(args.bills, bill_schema, args.strict)
    classified = classify_bills(parsed.records, dictionary)
    if args.out:
        emit_classified_bills_csv(classified.bills, args.out, bill_schema)
    print(
        encode_json(
            {
                "total": len(classified.bills),
                "rejected_rows": parsed.report.rejected,
                "tallies": classified.tallies,
            }
        )
    )
    return EXIT_OK


def cmd_stats(args: argparse.Namespace) -> int:
    report = load_report_json(args.report)
    result = {}
    for analysis in report.categories:
        result[analysis.label] = {
            "change_points": [cp.month for cp in analysis.change_points],
            "association_p": analysis.association.p_value if analysis.association else None,
            "chi_square_p": analysis.chi_square.p_value if analysis.chi_square else None,
        }
    print(encode_json(result))
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    dictionary = (
        load_keyword_dictionary(args.dictionary) if args.dictionary else default_keyword_dictionary()
    )
    fixture = write_fixture(args.out, dictionary, seed=args.seed)
    print(
        encode_json(
            {
                "requests": str(fixture.requests_path),
                "bills": str(fixture.bills_path),
                "dictionary": str(fixture.dictionary_path),
                "target_area": fixture.target_area,
                "change_month": fixture.request_counts.start_month.shift(fixture.change_index).iso(),
            }
        )
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with all subcommands."""
    parser = argparse.ArgumentParser(
        prog="polichange",
        description="Change-point analysis of civic complaints against legislative activity.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="full pipeline: requests + bills -> report, CSVs, charts")
    add_config_flags(run)
    _add_logging_flags(run)
    run.set_defaults(handler=cmd_run)

    det = sub.add_parser("detect", help="change points of the columns of a series CSV")
    det.add_argument("series", type=Path)
    det.add_argument("--column", action="append", help="column to analyse (repeatable)")
    det.add_argument("--mode", choices=[m.value for m in DetectionMode], default="penalized")
    det.add_argument("--k", type=int, help="change points for fixed mode")
    det.add_argument("--beta", type=_beta, default="auto")
    det.add_argument("--min-segment-length", type=int, default=2)
    det.add_argument("--deseasonalize", action="store_true")
    _add_logging_flags(det)
    det.set_defaults(handler=cmd_detect)

    cls = sub.add_parser("classify", help="assign bills to areas by title keywords")
    cls.add_argument("bills", type=Path)
    cls.add_argument("--dictionary", type=Path)
    cls.add_argument("--schema", type=Path)
    cls.add_argument("--out", type=Path, help="write classified bills CSV")
    cls.add_argument("--strict", action="store_true")
    _add_logging_flags(cls)
    cls.set_defaults(handler=cmd_classify)

    sts = sub.add_parser("stats", help="p-values from a report.json")
    sts.add_argument("report", type=Path)
    _add_logging_flags(sts)
    sts.set_defaults(handler=cmd_stats)

    syn = sub.add_parser("synth", help="write the synthetic fixture")
    syn.add_argument("out", type=Path)
    syn.add_argument("--seed", type=int, default=0)
    syn.add_argument("--dictionary", type=Path)
    _add_logging_flags(syn)
    syn.set_defaults(handler=cmd_synth)
    return parser


def configure_logging(verbose: bool = False, quiet: bool = False) -> None:
    """Log to stderr at DEBUG, INFO or WARNING."""
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)


def main(argv: Sequence[str] | None = None) -> int:
    """Run the command line and return the exit status."""
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose, args.quiet)
    try:
        return args.handler(args)
    except PolichangeError as e:
        logger.error("%s", e)
        return e.exit_code
    except OSError as e:
        logger.error("%s", e)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
