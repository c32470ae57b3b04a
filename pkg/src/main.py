"""
qisometry command line
Runs the verification suites for q-deformed isometry relations and writes a JSON report.
"""

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from dependency_injector import providers
from prettytable import PrettyTable

from containers import container, reset_logging
from core.config import Settings, get_settings
from rewrite.engine import normal_order
from schemas.config import RunConfig, load_run_config
from schemas.report import Report
from utils.exceptions import ConfigError, DomainError, ParseError
from utils.parsing import parse_generator_word

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INVALID = 2

SUBCOMMANDS = ("fock-check", "tail-check", "dual-check", "normal-order", "all")
DEFAULT_OUTPUT = "qisometry-report.json"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qisometry",
        description="Verify Fock and tail representations of q-deformed isometry relations.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run config")
    common.add_argument("--out", help=f"Report path (default {DEFAULT_OUTPUT})")
    common.add_argument("--parallel", action="store_true", default=None, help="Run suites in a thread pool")
    common.add_argument("--tol-exact", type=float, help="Tolerance for identities without inversion")
    common.add_argument("--tol-metric", type=float, help="Tolerance for identities through Gram inversion")
    common.add_argument("--tol-inverted", type=float, help="Tolerance for identities through dual isometries")
    common.add_argument("--log-level", help="Override QISO_LOG_LEVEL")
    common.add_argument("--log-format", choices=["console", "json"], help="Override QISO_LOG_FORMAT")

    subparsers = parser.add_subparsers(dest="mode", required=True)
    for mode in SUBCOMMANDS:
        sub = subparsers.add_parser(mode, parents=[common], help=f"Run the {mode} suite")
        if mode == "normal-order":
            sub.add_argument("--word", help="Normal-order a single word such as '1* 2' and print it")
    return parser


def configure_settings(args: argparse.Namespace) -> Settings:
    """Apply CLI logging overrides on top of the environment settings."""
    overrides = {
        key: value
        for key, value in {"log_level": args.log_level, "log_format": args.log_format}.items()
        if value is not None
    }
    settings = get_settings().model_copy(update=overrides) if overrides else get_settings()
    container.settings.override(providers.Object(settings))
    reset_logging()
    return settings


def normal_order_repl(word_text: str, config: RunConfig) -> str:
    """Normal-order one generator word and render it as 'coeff * s_mu s_nu*'."""
    symbols = parse_generator_word(word_text, config.d)
    return normal_order(symbols, config.q_matrix()).format()


def summary_table(report: Report) -> PrettyTable:
    table = PrettyTable()
    table.field_names = ["suite", "check", "result", "metric", "tolerance", "time (s)"]
    table.align = "l"
    for check in report.checks:
        metric = ""
        if check.error:
            metric = check.error[:60]
        elif check.metrics:
            key, value = next(iter(check.metrics.items()))
            metric = f"{key}={value:.3e}" if isinstance(value, float) else f"{key}={value}"
        table.add_row(
            [
                check.suite,
                check.name,
                "PASS" if check.passed else "FAIL",
                metric,
                "" if check.tolerance is None else f"{check.tolerance:.0e}",
                f"{check.wall_time_s:.3f}",
            ]
        )
    return table


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_settings(args)
    logger = container.logger_factory("main")

    overrides = {
        "mode": args.mode,
        "output": args.out,
        "parallel": args.parallel,
        "tolerances.exact": args.tol_exact,
        "tolerances.metric": args.tol_metric,
        "tolerances.inverted": args.tol_inverted,
    }
    try:
        config = load_run_config(args.config, **overrides)
    except (ConfigError, ParseError) as e:
        logger.error("invalid_config", error=str(e), field=getattr(e, "field", None))
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID

    if args.mode == "normal-order" and getattr(args, "word", None):
        try:
            print(normal_order_repl(args.word, config))
        except (ParseError, DomainError) as e:
            print(f"error: {e}", file=sys.stderr)
            return EXIT_INVALID
        return EXIT_OK

    orchestrator = container.run_orchestrator()
    try:
        report = orchestrator.run(config)
    except ConfigError as e:
        logger.error("invalid_config", error=str(e), field=e.field)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID

    output = config.output or DEFAULT_OUTPUT
    written = report.write(output)
    print(summary_table(report))
    print(
        f"{report.summary.passed} passed, {report.summary.failed} failed; "
        f"report: {', '.join(str(Path(path)) for path in written)}"
    )
    return EXIT_OK if report.ok else EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
