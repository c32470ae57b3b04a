"""Report schema written by every verification run."""

import csv
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field


class CheckRecord(BaseModel):
    """One executed check."""

    suite: str = Field(..., description="Suite that ran the check")
    name: str = Field(..., description="Check name")
    parameters: Dict[str, Any] = Field(default_factory=dict, description="Inputs of the check")
    metrics: Dict[str, Any] = Field(default_factory=dict, description="Residuals, eigenvalues, counts")
    tolerance: Optional[float] = Field(default=None, description="Pass threshold, if numeric")
    passed: bool = Field(..., description="Whether the check passed")
    witness: Optional[Dict[str, Any]] = Field(
        default=None, description="Matrix indices and labels witnessing a failure"
    )
    error: Optional[str] = Field(default=None, description="Exception raised by the check")
    wall_time_s: float = Field(default=0.0, description="Wall time in seconds")


class DecayEntry(BaseModel):
    label: str
    n: int
    norm: float


class DecayTable(BaseModel):
    """||P_n(mu) e_beta|| over a window."""

    name: str = Field(..., description="Check the table belongs to")
    mu: str = Field(..., description="Tail or prefix the projections follow")
    window: Dict[str, Any] = Field(default_factory=dict, description="Window parameters")
    rows: List[DecayEntry] = Field(default_factory=list)


class ReportSummary(BaseModel):
    passed: int = 0
    failed: int = 0
    total: int = 0


class Report(BaseModel):
    """Machine-readable result of a run."""

    mode: str
    config: Dict[str, Any] = Field(default_factory=dict, description="The effective run config")
    q_matrix: List[List[List[float]]] = Field(
        default_factory=list, description="q entries as [re, im] pairs"
    )
    checks: List[CheckRecord] = Field(default_factory=list)
    decay_tables: List[DecayTable] = Field(default_factory=list)
    summary: ReportSummary = Field(default_factory=ReportSummary)
    wall_time_s: float = 0.0

    @property
    def ok(self) -> bool:
        return self.summary.failed == 0

    def summarize(self) -> ReportSummary:
        passed = sum(1 for check in self.checks if check.passed)
        self.summary = ReportSummary(
            passed=passed, failed=len(self.checks) - passed, total=len(self.checks)
        )
        return self.summary

    def write(self, path: str) -> list[Path]:
        """Write the JSON report and, when decay tables exist, ``<path>.decay.csv``."""
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(self.model_dump_json(indent=2), encoding="utf-8")
        written = [target]
        if self.decay_tables:
            decay_path = target.with_name(target.name + ".decay.csv")
            with decay_path.open("w", newline="", encoding="utf-8") as handle:
                writer = csv.writer(handle)
                writer.writerow(["table", "mu", "label", "n", "norm"])
                for table in self.decay_tables:
                    for row in table.rows:
                        writer.writerow([table.name, table.mu, row.label, row.n, repr(row.norm)])
            written.append(decay_path)
        return written
