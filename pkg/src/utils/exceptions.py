"""Shared exceptions for the q-isometry toolkit."""

from typing import Any, Optional


class QIsometryError(Exception):
    """Base class for every error raised by the toolkit."""

    pass


class DomainError(QIsometryError):
    """Exception raised when an operation is called outside its contract."""

    pass


class ParseError(DomainError):
    """Exception raised when word or tail text does not follow the grammar."""

    def __init__(self, message: str, text: str, column: int):
        super().__init__(f"{message} (column {column} in {text!r})")
        self.text = text
        self.column = column


class WindowError(DomainError):
    """Exception raised when a computation does not fit into a finite window."""

    def __init__(self, message: str, **window: Any):
        details = ", ".join(f"{key}={value}" for key, value in window.items())
        super().__init__(f"{message} [{details}]" if details else message)
        self.window = window


class DualConstructionError(QIsometryError):
    """Exception raised when the middle factor of a dual isometry is numerically singular."""

    def __init__(
        self,
        message: str,
        letter: int,
        condition: float,
        window: Optional[dict[str, Any]] = None,
    ):
        super().__init__(f"{message} (letter={letter}, condition={condition:.3e}, window={window})")
        self.letter = letter
        self.condition = condition
        self.window = window or {}


class ConfigError(QIsometryError):
    """Exception raised when a run configuration is rejected."""

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message)
        self.field = field


class RewriteError(QIsometryError):
    """Exception raised when the rewrite engine leaves its single-monomial contract."""

    pass


class ConsistencyError(QIsometryError):
    """Exception raised when two independent routes to the same quantity disagree."""

    pass
