"""
Pydantic schemas for the run configuration and the verification report.
"""

from .config import (
    SUITE_MODES,
    NormalOrderConfig,
    RandomQSpec,
    RunConfig,
    TailConfig,
    Tolerances,
    load_run_config,
)
from .report import CheckRecord, DecayEntry, DecayTable, Report, ReportSummary

__all__ = [
    "SUITE_MODES",
    "RunConfig",
    "RandomQSpec",
    "TailConfig",
    "Tolerances",
    "NormalOrderConfig",
    "load_run_config",
    "CheckRecord",
    "DecayEntry",
    "DecayTable",
    "Report",
    "ReportSummary",
]
