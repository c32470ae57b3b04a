"""Normal-ordering rewrite system for the q_ij relations."""

from .base_rule import ReductionStrategy, RewriteRule, RuleOutcome
from .engine import (
    REDUCTION_STRATEGIES,
    NormalOrderingEngine,
    adjoint_word,
    inversion_count,
    normal_order,
    oracle_reduce,
)
from .rules import IsometryRule, LeftmostRedex, QCommutationRule, RightmostRedex
from .symbols import GeneratorSymbol, Monomial

__all__ = [
    "GeneratorSymbol",
    "Monomial",
    "RewriteRule",
    "RuleOutcome",
    "ReductionStrategy",
    "IsometryRule",
    "QCommutationRule",
    "LeftmostRedex",
    "RightmostRedex",
    "REDUCTION_STRATEGIES",
    "NormalOrderingEngine",
    "normal_order",
    "oracle_reduce",
    "inversion_count",
    "adjoint_word",
]
