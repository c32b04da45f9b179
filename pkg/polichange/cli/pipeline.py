"""End-to-end analysis pipeline."""

import logging
import shutil
from collections.abc import Iterator
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

from polichange.config import PipelineConfig
from polichange.exceptions import (
    EXIT_DATA,
    EXIT_OK,
    ArgumentError,
    ConfigurationError,
    DataParseError,
    DegenerateInputError,
    PipelineStageError,
    PolichangeError,
)
from polichange.ingest import (
    BillRecord,
    BillSchema,
    CategoryCatalog,
    CategoryMatrix,
    KeywordDictionary,
    Month,
    RequestSchema,
    ServiceRequestRecord,
    bill_monthly_counts,
    bill_monthly_share,
    bills_per_year,
    bin_monthly,
    classify_bills,
    default_keyword_dictionary,
    load_bills,
    load_keyword_dictionary,
    load_requests,
    load_schema_config,
    select_top_categories,
    subsample,
)
from polichange.ingest.service import ClassifiedBills, bill_span
from polichange.report import (
    AnalysisReport,
    BillSummary,
    CategoryAnalysis,
    ChangePoint,
    RunMetadata,
    StageCount,
    emit_report_json,
    emit_series_csv,
    render_svg_chart,
)
from polichange.seasonal import SeasonalProfile, deseasonalize_matrix
from polichange.seasonal.service import PERIOD
from polichange.segmentation import (
    InflectionDirection,
    Segmentation,
    classify_inflection,
    detect,
)
from polichange.stats import (
    AssociationResult,
    CategoryGroup,
    ChiSquareResult,
    CorrelationMatrix,
    LegislationTally,
    apply_groups,
    collapse_groups,
    correlation_matrix,
    label_legislation,
    permutation_association,
    yearly_chi_square,
)

logger = logging.getLogger(__name__)

Span = tuple[Month, Month]

REPORT_FILE = "report.json"
SERIES_DIR = "series"
CHARTS_DIR = "charts"
BILL_CHARTS_DIR = "bills"


@dataclass
class PipelineState:
    """Intermediate results handed from stage to stage."""

    requests: list[ServiceRequestRecord] = field(default_factory=list)
    bills: list[BillRecord] = field(default_factory=list)
    dictionary: KeywordDictionary | None = None
    sample: list[ServiceRequestRecord] = field(default_factory=list)
    catalog: CategoryCatalog | None = None
    counts: CategoryMatrix | None = None
    correlation: CorrelationMatrix | None = None
    groups: list[CategoryGroup] = field(default_factory=list)
    grouped: CategoryMatrix | None = None
    residual: CategoryMatrix | None = None
    profiles: dict[str, SeasonalProfile] = field(default_factory=dict)
    segmentations: dict[str, Segmentation] = field(default_factory=dict)
    directions: dict[str, dict[int, InflectionDirection]] = field(default_factory=dict)
    classified: ClassifiedBills | None = None
    association_span: Span | None = None
    bill_counts: CategoryMatrix | None = None
    bill_share: CategoryMatrix | None = None
    zero_bill_months: int = 0
    span_bills: list[BillRecord] = field(default_factory=list)
    chi_square: dict[str, ChiSquareResult | None] = field(default_factory=dict)
    association: dict[str, AssociationResult | None] = field(default_factory=dict)
    legislation: dict[str, LegislationTally] = field(default_factory=dict)
    category_notes: dict[str, list[str]] = field(default_factory=dict)
    stages: list[StageCount] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class PipelineOutcome:
    """A finished run: its report and the files written."""

    report: AnalysisReport
    out_dir: Path
    files: tuple[Path, ...]


def intersect_spans(a: Span, b: Span) -> Span | None:
    """Overlap of two inclusive month spans, or None when disjoint."""
    start, end = max(a[0], b[0]), min(a[1], b[1])
    return (start, end) if start <= end else None


class PipelineService:
    """Runs every analysis stage for one configuration.

    Each stage runs inside `stage()`, which turns any failure into a
    PipelineStageError naming the stage. Outputs are written to a staging
    directory inside out_dir and moved into place only when all stages
    succeed.
    """

    def __init__(self, config: PipelineConfig):
        self.config = config
        self.state = PipelineState()

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        """Run a block as a named stage."""
        logger.info("stage %s", name)
        try:
            yield
        except PipelineStageError:
            raise
        except (PolichangeError, OSError, ValueError, KeyError) as e:
            raise PipelineStageError(name, e) from e

    def _count(self, stage: str, records_in: int, records_out: int, note: str = "") -> None:
        self.state.stages.append(
            StageCount(stage=stage, records_in=records_in, records_out=records_out, note=note)
        )
        logger.info("%s: %d in, %d out%s", stage, records_in, records_out, f" ({note})" if note else "")

    def _note(self, label: str, message: str) -> None:
        self.state.category_notes.setdefault(label, []).append(message)
        logger.warning("%s: %s", label, message)

    # --- Stages ---

    def ingest(self) -> None:
        """Load schemas, the keyword dictionary, requests and bills."""
        cfg = self.config
        if cfg.requests_path is None or cfg.bills_path is None:
            raise ConfigurationError("requests_path and bills_path are required")
        request_schema, bill_schema = (
            load_schema_config(cfg.schema_path) if cfg.schema_path else (RequestSchema(), BillSchema())
        )
        self.state.dictionary = (
            load_keyword_dictionary(cfg.dictionary_path)
            if cfg.dictionary_path
            else default_keyword_dictionary()
        )
        requests = load_requests(cfg.requests_path, request_schema, cfg.strict)
        self._count(
            "ingest_requests",
            requests.report.total_rows,
            requests.report.accepted,
            f"{requests.report.rejected} malformed row(s) rejected",
        )
        if not requests.records:
            raise DataParseError(f"{cfg.requests_path} holds no usable service requests")
        bills = load_bills(cfg.bills_path, bill_schema, cfg.strict)
        self._count(
            "ingest_bills",
            bills.report.total_rows,
            bills.report.accepted,
            f"{bills.report.rejected} malformed row(s) rejected",
        )
        self.state.requests = requests.records
        self.state.bills = bills.records

    def select(self) -> None:
        """Subsample the requests and pick the complaint categories."""
        cfg, st = self.config, self.state
        st.sample = subsample(st.requests, cfg.subsample_n, cfg.seed)
        self._count("subsample", len(st.requests), len(st.sample))
        st.catalog = select_top_categories(st.sample, cfg.max_categories, cfg.min_fraction)
        self._count("select_categories", len(st.sample), len(st.catalog))

    def bin(self) -> None:
        """Bin the sample into a monthly count matrix."""
        st = self.state
        st.counts = bin_monthly(st.sample, st.catalog)
        kept = int(st.counts.to_array().sum())
        self._count(
            "bin_monthly", len(st.sample), kept, f"{len(st.sample) - kept} out-of-catalog record(s) dropped"
        )

    def group(self) -> None:
        """Collapse strongly correlated categories."""
        st = self.state
        st.correlation = correlation_matrix(st.counts)
        st.groups = collapse_groups(st.correlation, self.config.group_threshold)
        st.grouped = apply_groups(st.counts, st.groups)
        self._count("group", len(st.counts.categories), len(st.groups))

    def deseasonalize(self) -> None:
        """Remove the yearly profile of every grouped series."""
        st = self.state
        if st.grouped.length < PERIOD:
            st.residual = CategoryMatrix.from_array(
                st.grouped.start_month, st.grouped.categories, st.grouped.to_array(), kind="residual"
            )
            st.notes.append(
                f"series span {st.grouped.length} months, shorter than one year; not deseasonalized"
            )
            logger.warning(st.notes[-1])
        else:
            st.residual, st.profiles = deseasonalize_matrix(st.grouped, PERIOD)
        self._count("deseasonalize", len(st.grouped.categories), len(st.residual.categories))

    def detect(self) -> None:
        """Detect change points and their directions per grouped series."""
        cfg, st = self.config, self.state
        found = 0
        for label in st.residual.categories:
            series = st.residual.row(label)
            segmentation = detect(
                series,
                cfg.detection_mode,
                n_change_points=cfg.n_change_points,
                beta=cfg.beta,
                min_size=cfg.min_segment_length,
            )
            st.segmentations[label] = segmentation
            st.directions[label] = {
                t: classify_inflection(series, segmentation, t) for t in segmentation.change_points
            }
            found += segmentation.n_change_points
            logger.debug("%s: change points %s", label, list(segmentation.change_points))
        self._count("detect", len(st.residual.categories), found, "change points found")

    def classify(self) -> None:
        """Assign bills to areas by title keywords."""
        st = self.state
        st.classified = classify_bills(st.bills, st.dictionary)
        assigned = len(st.bills) - st.classified.tallies.get("N/A", 0)
        self._count("classify_bills", len(st.bills), assigned, "bills matched to an area")

    def bill_series(self) -> None:
        """Build grouped monthly bill counts and shares over the association span."""
        cfg, st = self.config, self.state
        request_span = (st.grouped.start_month, st.grouped.end_month)
        override = cfg.association_months()
        if override is not None:
            span = intersect_spans(override, request_span)
            if span != override:
                raise ArgumentError(
                    f"association span {override[0]}:{override[1]} is not inside the request span "
                    f"{request_span[0]}:{request_span[1]}"
                )
        elif not st.bills:
            span = None
            st.notes.append("no bills parsed; association tests skipped")
        else:
            span = intersect_spans(request_span, bill_span(st.bills))
            if span is None:
                st.notes.append("request and bill spans do not overlap; association tests skipped")
        st.association_span = span
        if span is None:
            logger.warning(st.notes[-1])
            self._count("bill_series", len(st.bills), 0)
            return
        labels = st.catalog.labels
        counts = apply_groups(bill_monthly_counts(st.classified.bills, labels, span), st.groups)
        if cfg.deseasonalize_bills:
            if counts.length >= PERIOD:
                counts, _ = deseasonalize_matrix(counts, PERIOD)
            else:
                st.notes.append(
                    f"association span {counts.length} months, shorter than one year; "
                    "bill counts not deseasonalized"
                )
                logger.warning(st.notes[-1])
        st.bill_counts = counts
        st.bill_share = apply_groups(bill_monthly_share(st.classified.bills, labels, span), st.groups)
        bill_months = {Month.of(b.create_date) for b in st.bills}
        st.zero_bill_months = sum(1 for m in st.bill_counts.months() if m not in bill_months)
        st.span_bills = [b for b in st.classified.bills if span[0] <= Month.of(b.create_date) <= span[1]]
        in_span = len(st.span_bills)
        self._count("bill_series", len(st.bills), in_span, f"bills created {span[0]}..{span[1]}")

    def test(self) -> None:
        """Chi-squared and permutation tests per grouped series."""
        cfg, st = self.config, self.state
        span = st.association_span
        for index, group in enumerate(st.groups):
            label = group.label
            st.chi_square[label] = None
            st.association[label] = None
            st.legislation[label] = LegislationTally()
            if span is None:
                continue
            years = list(range(span[0].year, span[1].year + 1))
            yearly = bills_per_year(st.span_bills, group.members, years)
            if len(years) < 2 or sum(yearly.values()) == 0:
                self._note(label, "fewer than two years or no bills; chi-squared test skipped")
            else:
                st.chi_square[label] = yearly_chi_square(yearly, *span)

            offset = span[0].ordinal - st.grouped.start_month.ordinal
            length = span[1].ordinal - span[0].ordinal + 1
            directions = {
                t - offset: d for t, d in st.directions[label].items() if 0 < t - offset < length
            }
            bills = st.bill_counts.row(label)
            try:
                st.association[label] = permutation_association(
                    sorted(directions),
                    bills,
                    window_months=cfg.window,
                    n_perm=cfg.n_perm,
                    seed=cfg.seed + index,
                    series_length=length,
                )
            except DegenerateInputError as e:
                self._note(label, f"association undefined: {e}")
            st.legislation[label] = label_legislation(directions, bills, cfg.window)
        tested = sum(1 for r in st.association.values() if r is not None)
        self._count("tests", len(st.groups), tested, "series with an association test")

    # --- Output ---

    def build_report(self) -> AnalysisReport:
        """Assemble the report from the pipeline state."""
        cfg, st = self.config, self.state
        months = st.grouped.months()
        analyses = []
        for group in st.groups:
            label = group.label
            segmentation = st.segmentations[label]
            profile = st.profiles.get(label)
            analyses.append(
                CategoryAnalysis(
                    label=label,
                    members=group.members,
                    counts=tuple(st.grouped.row(label).tolist()),
                    residual=tuple(st.residual.row(label).tolist()),
                    seasonal_profile=profile.offsets if profile else None,
                    dividers=segmentation.dividers,
                    change_points=tuple(
                        ChangePoint(index=t, month=months[t].iso(), direction=d)
                        for t, d in sorted(st.directions[label].items())
                    ),
                    total_cost=segmentation.total_cost,
                    penalty=segmentation.penalty,
                    bill_counts=tuple(st.bill_counts.row(label).tolist()) if st.bill_counts is not None else (),
                    bill_share=tuple(st.bill_share.row(label).tolist()) if st.bill_share is not None else (),
                    bills_per_year=(
                        bills_per_year(
                            st.span_bills,
                            group.members,
                            range(st.association_span[0].year, st.association_span[1].year + 1),
                        )
                        if st.association_span
                        else {}
                    ),
                    chi_square=st.chi_square.get(label),
                    association=st.association.get(label),
                    legislation=st.legislation.get(label, LegislationTally()),
                    notes=tuple(st.category_notes.get(label, [])),
                )
            )

        bills_span = bill_span(st.bills) if st.bills else None
        notes = [
            *st.notes,
            "chi-squared expected counts follow each year's months in the association span",
            "bill shares are 0 in months without bills",
        ]
        return AnalysisReport(
            metadata=RunMetadata(
                seed=cfg.seed,
                config_digest=cfg.digest(),
                config=cfg.effective(),
                generated_at=cfg.run_timestamp,
            ),
            start_month=st.grouped.start_month.iso(),
            months=st.grouped.length,
            association_span=(
                (st.association_span[0].iso(), st.association_span[1].iso())
                if st.association_span
                else None
            ),
            catalog=st.catalog.entries,
            correlation=st.correlation,
            groups=tuple(st.groups),
            categories=tuple(analyses),
            bills=BillSummary(
                total=len(st.bills),
                tallies=st.classified.tallies,
                start_month=bills_span[0].iso() if bills_span else None,
                end_month=bills_span[1].iso() if bills_span else None,
                months_without_bills=st.zero_bill_months,
            ),
            stages=tuple(st.stages),
            notes=tuple(notes),
        )

    def write_outputs(self, report: AnalysisReport, directory: Path) -> list[Path]:
        """Write report.json, series CSVs and charts into a directory."""
        st = self.state
        series_dir = directory / SERIES_DIR
        series_dir.mkdir(parents=True, exist_ok=True)
        emit_report_json(report, directory / REPORT_FILE)
        written = [directory / REPORT_FILE]
        matrices = {
            "counts.csv": st.counts,
            "grouped_counts.csv": st.grouped,
            "residual.csv": st.residual,
            "bill_counts.csv": st.bill_counts,
            "bill_share.csv": st.bill_share,
        }
        for name, matrix in matrices.items():
            if matrix is not None:
                emit_series_csv(matrix, series_dir / name)
                written.append(series_dir / name)
        dividers = {label: seg.dividers for label, seg in st.segmentations.items()}
        written.extend(render_svg_chart(st.grouped, dividers, directory / CHARTS_DIR))
        if st.bill_share is not None and st.association_span is not None:
            # Bill charts start at the association span; move dividers there.
            offset = st.association_span[0].ordinal - st.grouped.start_month.ordinal
            length = st.bill_share.length
            bill_dividers = {
                label: [t - offset for t in seg.dividers if 0 < t - offset < length]
                for label, seg in st.segmentations.items()
            }
            written.extend(
                render_svg_chart(st.bill_share, bill_dividers, directory / CHARTS_DIR / BILL_CHARTS_DIR)
            )
        return written

    def run(self) -> PipelineOutcome:
        """Execute all stages and publish the outputs.

        Returns:
            PipelineOutcome: Report and written files.

        Raises:
            PipelineStageError: If any stage fails; nothing is published.
            ConfigurationError: If no output directory is configured.
        """
        if self.config.out_dir is None:
            raise ConfigurationError("out_dir is required")
        steps = [
            ("ingest", self.ingest),
            ("select", self.select),
            ("bin", self.bin),
            ("group", self.group),
            ("deseasonalize", self.deseasonalize),
            ("detect", self.detect),
            ("classify_bills", self.classify),
            ("bill_series", self.bill_series),
            ("tests", self.test),
        ]
        for name, step in steps:
            with self.stage(name):
                step()

        out_dir = Path(self.config.out_dir)
        staging = out_dir / f".partial-{self.config.digest()[:12]}"
        try:
            with self.stage("emit"):
                report = self.build_report()
                if staging.exists():
                    shutil.rmtree(staging)
                staging.mkdir(parents=True)
                staged = self.write_outputs(report, staging)
                files = tuple(_publish(staging, out_dir, staged))
        finally:
            if staging.exists():
                shutil.rmtree(staging, ignore_errors=True)
        logger.info("wrote %d file(s) into %s", len(files), out_dir)
        return PipelineOutcome(report=report, out_dir=out_dir, files=files)


def _publish(staging: Path, out_dir: Path, staged: list[Path]) -> list[Path]:
    """Move staged top-level entries into out_dir, replacing earlier outputs."""
    for entry in sorted(staging.iterdir()):
        target = out_dir / entry.name
        if target.is_dir():
            shutil.rmtree(target)
        elif target.exists():
            target.unlink()
        entry.rename(target)
    return [out_dir / path.relative_to(staging) for path in staged]


def run_pipeline(config: PipelineConfig) -> int:
    """Run the full analysis and return a process exit status.

    Args:
        config: Validated configuration.

    Returns:
        int: 0 on success, otherwise the exit code of the failing stage.
    """
    try:
        PipelineService(config).run()
    except PolichangeError as e:
        logger.error("%s", e)
        return e.exit_code
    except OSError as e:
        logger.error("cannot write outputs: %s", e)
        return EXIT_DATA
    return EXIT_OK
