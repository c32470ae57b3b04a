"""Normal-ordering engine: the exact oracle for every q-scalar in the toolkit."""

from typing import Iterable, Optional, Sequence, Union

from models.multiindex import FiniteWord, QMatrix
from utils.exceptions import DomainError, RewriteError

from .base_rule import ReductionStrategy, RewriteRule, RuleOutcome
from .rules import IsometryRule, LeftmostRedex, QCommutationRule, RightmostRedex
from .symbols import GeneratorSymbol, Monomial

SymbolLike = Union[GeneratorSymbol, tuple[int, bool]]

REDUCTION_STRATEGIES: dict[str, type[ReductionStrategy]] = {
    "leftmost": LeftmostRedex,
    "rightmost": RightmostRedex,
}

DEFAULT_RULES: tuple[type[RewriteRule], ...] = (IsometryRule, QCommutationRule)


def as_symbols(word: Iterable[SymbolLike]) -> tuple[GeneratorSymbol, ...]:
    return tuple(
        symbol if isinstance(symbol, GeneratorSymbol) else GeneratorSymbol(*symbol)
        for symbol in word
    )


def inversion_count(word: Sequence[GeneratorSymbol]) -> int:
    """Number of (starred, unstarred) pairs with the starred symbol first."""
    count = 0
    starred_seen = 0
    for symbol in word:
        if symbol.starred:
            starred_seen += 1
        else:
            count += starred_seen
    return count


def adjoint_word(word: Iterable[SymbolLike]) -> tuple[GeneratorSymbol, ...]:
    """Formal adjoint: reversed order, stars toggled."""
    return tuple(symbol.adjoint() for symbol in reversed(as_symbols(word)))


class NormalOrderingEngine:
    """Rewrites adjacent s_i^* s_j pairs until no starred symbol precedes an unstarred one."""

    def __init__(
        self,
        q_matrix: QMatrix,
        strategy: Union[str, ReductionStrategy] = "leftmost",
        rules: Optional[Sequence[RewriteRule]] = None,
    ) -> None:
        self.q_matrix = q_matrix
        if isinstance(strategy, str):
            try:
                strategy = REDUCTION_STRATEGIES[strategy]()
            except KeyError:
                raise DomainError(
                    f"unknown reduction strategy {strategy!r}; "
                    f"expected one of {sorted(REDUCTION_STRATEGIES)}"
                ) from None
        self.strategy = strategy
        self.rules = list(rules) if rules is not None else [rule(q_matrix) for rule in DEFAULT_RULES]

    def _rule_for(self, left: GeneratorSymbol, right: GeneratorSymbol) -> RewriteRule:
        for rule in self.rules:
            if rule.matches(left, right):
                return rule
        raise RewriteError(f"no rule rewrites the redex {left} {right}")

    def reduce(
        self, word: Iterable[SymbolLike], trace: Optional[list[int]] = None
    ) -> Monomial:
        """Return the unique monomial equal to ``word``.

        ``trace`` receives the termination measure before the first and after each step.
        """
        symbols = list(as_symbols(word))
        for symbol in symbols:
            self.q_matrix.check_letter(symbol.letter)

        coeff = 1 + 0j
        measure = inversion_count(symbols)
        if trace is not None:
            trace.append(measure)

        while True:
            redexes = [
                i
                for i in range(len(symbols) - 1)
                if symbols[i].starred and not symbols[i + 1].starred
            ]
            if not redexes:
                break
            position = self.strategy.select(redexes)
            left, right = symbols[position], symbols[position + 1]
            outcome = self._rule_for(left, right).rewrite(left, right)
            if not isinstance(outcome, RuleOutcome):
                raise RewriteError(
                    f"rule for {left} {right} returned {type(outcome).__name__}; "
                    "only single-term outcomes are supported"
                )
            coeff *= outcome.factor
            symbols[position : position + 2] = outcome.replacement

            next_measure = inversion_count(symbols)
            if next_measure >= measure:
                raise RewriteError(
                    f"termination measure did not decrease ({measure} -> {next_measure})"
                )
            measure = next_measure
            if trace is not None:
                trace.append(measure)

        creators = tuple(symbol.letter for symbol in symbols if not symbol.starred)
        starred = [symbol.letter for symbol in symbols if symbol.starred]
        return Monomial(coeff, FiniteWord(creators), FiniteWord(tuple(reversed(starred))))


def normal_order(
    word: Iterable[SymbolLike],
    Q: QMatrix,
    strategy: Union[str, ReductionStrategy] = "leftmost",
    trace: Optional[list[int]] = None,
) -> Monomial:
    return NormalOrderingEngine(Q, strategy).reduce(word, trace)


def oracle_reduce(
    a: FiniteWord, b: FiniteWord, Q: QMatrix
) -> tuple[complex, FiniteWord, FiniteWord]:
    """Normal-order s_a^* s_b = s_{a_m}^* ... s_{a_1}^* s_{b_1} ... s_{b_n}."""
    word = [GeneratorSymbol(letter, True) for letter in reversed(a.letters)]
    word += [GeneratorSymbol(letter) for letter in b]
    monomial = normal_order(word, Q)
    return monomial.coeff, monomial.creators, monomial.annihilators
