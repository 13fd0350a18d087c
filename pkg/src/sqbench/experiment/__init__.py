"""Corpus manifest, degradation grid, runner and report bundle."""
from .manifest import CorpusManifest, ManifestError, SampleMeta, load_manifest
from .pipeline import DegradationSpec, degrade, make_noise, prepare_reference, trim_silence
from .report import REPORT_FILES, ReportConfig, ReportError, emit_report
from .runner import (DEFAULT_METRICS, DEFAULT_NOISES, DEFAULT_SNRS, Job, RunAborted, ScoreRecord, build_grid,
                     job_seed, prepare_pool, read_store, run_experiment)

__all__ = [
    "CorpusManifest", "DEFAULT_METRICS", "DEFAULT_NOISES", "DEFAULT_SNRS", "DegradationSpec", "Job",
    "ManifestError", "REPORT_FILES", "ReportConfig", "ReportError", "RunAborted", "SampleMeta", "ScoreRecord",
    "build_grid", "degrade", "emit_report", "job_seed", "load_manifest", "make_noise", "prepare_pool",
    "prepare_reference", "read_store", "run_experiment", "trim_silence",
]
