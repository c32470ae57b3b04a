"""Base classes for rewrite rules and reduction strategies."""

from abc import ABC, abstractmethod
from typing import NamedTuple, Sequence

from models.multiindex import QMatrix
from rewrite.symbols import GeneratorSymbol


class RuleOutcome(NamedTuple):
    """Single-term right-hand side: factor * replacement."""

    factor: complex
    replacement: tuple[GeneratorSymbol, ...]


class RewriteRule(ABC):
    """A rule rewriting an adjacent pair s_i^* s_j into one scalar-weighted word."""

    def __init__(self, q_matrix: QMatrix) -> None:
        self.q_matrix = q_matrix

    def __str__(self):
        return self.get_rule_name()

    @abstractmethod
    def matches(self, left: GeneratorSymbol, right: GeneratorSymbol) -> bool:
        """Whether the rule applies to the pair. Must be implemented by subclasses."""
        pass

    @abstractmethod
    def rewrite(self, left: GeneratorSymbol, right: GeneratorSymbol) -> RuleOutcome:
        """Rewrite the pair. Must be implemented by subclasses."""
        pass

    @abstractmethod
    def get_rule_name(self) -> str:
        """Return the rule name. Must be implemented by subclasses."""
        pass


class ReductionStrategy(ABC):
    """Chooses which redex the engine rewrites next."""

    def __str__(self):
        return self.get_strategy_name()

    @abstractmethod
    def select(self, redexes: Sequence[int]) -> int:
        """Pick one redex position from a nonempty list of positions."""
        pass

    @abstractmethod
    def get_strategy_name(self) -> str:
        pass
