"""Dependency injection container configuration using dependency-injector."""

import structlog
from dependency_injector import containers, providers

from core.config import get_settings
from core.logging import setup_logging
from services.run_orchestrator import RunOrchestrator
from services.verification_suites import DualSuite, FockSuite, NormalOrderSuite, TailSuite

# Initialize structlog once
_structlog_initialized = False


def create_logger(name: str, settings=None) -> structlog.BoundLogger:
    """Create and configure a structlog logger instance."""
    global _structlog_initialized

    if not _structlog_initialized:
        setup_logging(settings)
        _structlog_initialized = True

    return structlog.get_logger(name)


def reset_logging() -> None:
    """Force the next logger to reconfigure structlog, e.g. after CLI overrides."""
    global _structlog_initialized
    _structlog_initialized = False


class Container(containers.DeclarativeContainer):
    """Main DI container for the verification toolkit."""

    # Settings provider
    settings = providers.Singleton(
        get_settings,
    )

    # Logger factory
    logger_factory = providers.Factory(
        create_logger,
        settings=settings,
    )

    # Suites are built per run because they hold the run context
    fock_suite = providers.Factory(
        FockSuite,
        logger=providers.Factory(create_logger, "fock_suite", settings=settings),
    )

    tail_suite = providers.Factory(
        TailSuite,
        logger=providers.Factory(create_logger, "tail_suite", settings=settings),
    )

    dual_suite = providers.Factory(
        DualSuite,
        logger=providers.Factory(create_logger, "dual_suite", settings=settings),
    )

    normal_order_suite = providers.Factory(
        NormalOrderSuite,
        logger=providers.Factory(create_logger, "normal_order_suite", settings=settings),
    )

    run_orchestrator = providers.Singleton(
        RunOrchestrator,
        settings=settings,
        logger=providers.Factory(create_logger, "run_orchestrator", settings=settings),
        suite_factories=providers.Dict(
            {
                "fock-check": fock_suite.provider,
                "tail-check": tail_suite.provider,
                "dual-check": dual_suite.provider,
                "normal-order": normal_order_suite.provider,
            }
        ),
    )

    def shutdown_resources(self):
        """Cleanup container resources."""
        self.reset_singletons()


# Global container instance
container = Container()
