"""Orchestrator that runs the selected verification suites and assembles the report."""

import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional

import structlog

from core.config import Settings
from schemas.config import SUITE_MODES, RunConfig
from schemas.report import CheckRecord, DecayTable, Report
from services.verification_suites import SUITES, BaseSuite, RunContext
from utils.exceptions import ConfigError, DomainError

SuiteFactory = Callable[..., BaseSuite]


class RunOrchestrator:
    """
    Runs a verification pipeline:
    1. Resolve the q matrix from the config
    2. Build the suites selected by the mode
    3. Execute them, sequentially or in a thread pool
    4. Collect records and decay tables in suite order
    """

    def __init__(
        self,
        settings: Settings,
        logger: structlog.BoundLogger,
        suite_factories: Optional[dict[str, SuiteFactory]] = None,
    ):
        self.settings = settings
        self.logger = logger
        self.suite_factories = dict(SUITES) if suite_factories is None else suite_factories

        self.stats = {
            "runs": 0,
            "checks_executed": 0,
            "checks_failed": 0,
            "total_processing_time": 0.0,
        }

    def selected_modes(self, mode: str) -> list[str]:
        modes = list(SUITE_MODES) if mode == "all" else [mode]
        missing = [name for name in modes if name not in self.suite_factories]
        if missing:
            raise ConfigError(f"no suite registered for {', '.join(missing)}", field="mode")
        return modes

    def run(self, config: RunConfig) -> Report:
        """Execute the suites for ``config.mode`` and return the summarized report."""
        start_time = time.perf_counter()
        try:
            q_matrix = config.q_matrix()
        except DomainError as e:
            raise ConfigError(f"invalid q matrix: {e}", field="q_entries") from e

        context = RunContext(config=config, q_matrix=q_matrix, max_workers=self.settings.max_workers)
        suites = [self.suite_factories[mode](context=context) for mode in self.selected_modes(config.mode)]
        self.logger.info(
            "run_started",
            mode=config.mode,
            d=config.d,
            suites=[str(suite) for suite in suites],
            parallel=config.parallel,
            max_modulus=q_matrix.max_modulus(),
        )

        if config.parallel and len(suites) > 1:
            with ThreadPoolExecutor(max_workers=self.settings.max_workers) as pool:
                results: list[list[CheckRecord]] = list(pool.map(lambda suite: suite.run(), suites))
        else:
            results = [suite.run() for suite in suites]

        checks = [record for records in results for record in records]
        decay_tables: list[DecayTable] = [table for suite in suites for table in suite.decay_tables]
        report = Report(
            mode=config.mode,
            config=config.model_dump(mode="json"),
            q_matrix=[[[value.real, value.imag] for value in row] for row in q_matrix.entries],
            checks=checks,
            decay_tables=decay_tables,
        )
        summary = report.summarize()
        elapsed = time.perf_counter() - start_time
        report.wall_time_s = elapsed

        self.stats["runs"] += 1
        self.stats["checks_executed"] += summary.total
        self.stats["checks_failed"] += summary.failed
        self.stats["total_processing_time"] += elapsed

        self.logger.info(
            "run_completed",
            mode=config.mode,
            passed=summary.passed,
            failed=summary.failed,
            processing_time_s=elapsed,
        )
        for record in checks:
            if not record.passed:
                self.logger.warning(
                    "check_not_passed",
                    suite=record.suite,
                    check=record.name,
                    witness=record.witness,
                    error=record.error,
                )
        return report
