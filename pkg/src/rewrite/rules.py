from typing import Sequence

from .base_rule import ReductionStrategy, RewriteRule, RuleOutcome
from .symbols import GeneratorSymbol


class IsometryRule(RewriteRule):
    """s_i^* s_i -> I."""

    def get_rule_name(self) -> str:
        return "ISOMETRY"

    def matches(self, left: GeneratorSymbol, right: GeneratorSymbol) -> bool:
        return left.starred and not right.starred and left.letter == right.letter

    def rewrite(self, left: GeneratorSymbol, right: GeneratorSymbol) -> RuleOutcome:
        return RuleOutcome(1 + 0j, ())


class QCommutationRule(RewriteRule):
    """s_i^* s_j -> q_ij s_j s_i^* for i != j."""

    def get_rule_name(self) -> str:
        return "Q_COMMUTATION"

    def matches(self, left: GeneratorSymbol, right: GeneratorSymbol) -> bool:
        return left.starred and not right.starred and left.letter != right.letter

    def rewrite(self, left: GeneratorSymbol, right: GeneratorSymbol) -> RuleOutcome:
        return RuleOutcome(self.q_matrix.q(left.letter, right.letter), (right, left))


class LeftmostRedex(ReductionStrategy):
    def get_strategy_name(self) -> str:
        return "leftmost"

    def select(self, redexes: Sequence[int]) -> int:
        return redexes[0]


class RightmostRedex(ReductionStrategy):
    def get_strategy_name(self) -> str:
        return "rightmost"

    def select(self, redexes: Sequence[int]) -> int:
        return redexes[-1]
