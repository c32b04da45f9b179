"""Command-line interface and pipeline orchestration."""

from polichange.cli.pipeline import PipelineOutcome, PipelineService, run_pipeline

__all__ = ["PipelineOutcome", "PipelineService", "run_pipeline"]
