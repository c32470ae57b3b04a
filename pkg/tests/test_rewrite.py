"""Tests for the word grammar and the normal-ordering engine."""

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from models.multiindex import FiniteWord, random_q, reduce_pair, setminus
from rewrite.base_rule import RuleOutcome
from rewrite.engine import (
    NormalOrderingEngine,
    adjoint_word,
    inversion_count,
    normal_order,
    oracle_reduce,
)
from rewrite.rules import IsometryRule
from rewrite.symbols import GeneratorSymbol, Monomial
from utils.exceptions import DomainError, ParseError, RewriteError
from utils.parsing import parse_finite_word, parse_generator_word, parse_tailspec

Q3 = random_q(3, 0.7, seed=5)

symbol_words = st.lists(
    st.builds(GeneratorSymbol, st.integers(min_value=1, max_value=3), st.booleans()),
    max_size=12,
)


def W(*letters):
    return FiniteWord(letters)


class TestParsing:
    """Test the text grammar for words, tails and generator words."""

    def test_finite_word(self):
        """Test whitespace and comma separators and the empty word."""
        assert parse_finite_word("1, 2 3") == W(1, 2, 3)
        assert parse_finite_word("e") == W()
        assert parse_finite_word("  ") == W()

    def test_finite_word_out_of_alphabet(self):
        """Test that the column of a bad letter is reported."""
        with pytest.raises(ParseError) as exc_info:
            parse_finite_word("1 3", d=2)
        assert exc_info.value.column == 3

    def test_tailspec(self):
        """Test 'u;v' tails, canonicalized on parse."""
        assert parse_tailspec("1;2").u == (1,)
        assert parse_tailspec(";1,2").v == (1, 2)
        assert parse_tailspec("2;2") == parse_tailspec(";2")

    @pytest.mark.parametrize("text", ["1,2", "1;", "1;2;3", "x;1"])
    def test_tailspec_rejects_malformed(self, text):
        """Test tails without exactly one separator or with an empty period."""
        with pytest.raises(ParseError):
            parse_tailspec(text)

    def test_generator_word(self):
        """Test starred and unstarred tokens."""
        assert parse_generator_word("1* 2 1 2*", d=2) == [(1, True), (2, False), (1, False), (2, True)]

    def test_generator_word_rejects_bad_token(self):
        """Test that malformed tokens raise ParseError with a column."""
        with pytest.raises(ParseError) as exc_info:
            parse_generator_word("1* s2", d=2)
        assert exc_info.value.column == 4


class TestNormalOrder:
    """Test single words against the defining relations."""

    def test_isometry_relation(self, q_half):
        """Test s_1^* s_1 = I."""
        monomial = normal_order([(1, True), (1, False)], q_half)
        assert monomial == Monomial(1)
        assert monomial.format() == "1 * I"

    def test_commutation_relation(self, q_half):
        """Test s_1^* s_2 = q_12 s_2 s_1^*."""
        monomial = normal_order([(1, True), (2, False)], q_half)
        assert monomial == Monomial(0.5, W(2), W(1))
        assert monomial.format() == "0.5 * s_2 s_1*"

    def test_two_steps(self, q_half):
        """Test s_2^* s_1 s_2 = q_21 s_1."""
        assert normal_order([(2, True), (1, False), (2, False)], q_half).format() == "0.5 * s_1"

    def test_empty_word(self, q_half):
        """Test that the empty word is the identity monomial."""
        assert normal_order([], q_half) == Monomial(1)

    def test_letter_out_of_range(self, q_half):
        """Test that letters outside 1..d raise DomainError."""
        with pytest.raises(DomainError):
            normal_order([(3, True)], q_half)

    def test_zero_coefficient_is_canonical(self, q_zero):
        """Test that a vanishing monomial carries no words."""
        monomial = normal_order([(1, True), (2, False)], q_zero)
        assert monomial.is_zero
        assert monomial.creators == monomial.annihilators == W()

    def test_complex_coefficient_format(self, q_complex):
        """Test the rendering of complex coefficients."""
        assert normal_order([(1, True), (2, False)], q_complex).format() == "(0.3+0.4j) * s_2 s_1*"

    def test_unknown_strategy(self, q_half):
        """Test that an unknown reduction strategy is rejected."""
        with pytest.raises(DomainError, match="unknown reduction strategy"):
            NormalOrderingEngine(q_half, "outermost")

    def test_multi_term_rule_rejected(self, q_half):
        """Test that a rule with a non-monomial outcome stops the engine."""

        class SplittingRule(IsometryRule):
            def rewrite(self, left, right):
                return [RuleOutcome(1, ()), RuleOutcome(1, ())]

        engine = NormalOrderingEngine(q_half, rules=[SplittingRule(q_half)])
        with pytest.raises(RewriteError, match="single-term"):
            engine.reduce([(1, True), (1, False)])


class TestOracle:
    """Test oracle_reduce and its agreement with the closed-form reduction."""

    def test_isometry_word_collapses(self, q_half):
        """Test s_(1,2)^* s_(1,2) = I."""
        assert oracle_reduce(W(1, 2), W(1, 2), q_half) == (1, W(), W())

    def test_single_commutation(self, q_complex):
        """Test s_1^* s_2 s_1 = q_12 s_2."""
        assert oracle_reduce(W(1), W(2, 1), q_complex) == (q_complex.q(1, 2), W(2), W())

    def test_no_cancellation(self, q_complex):
        """Test s_1^* s_2 s_2 = q_12^2 s_2 s_2 s_1^*."""
        coeff, creators, annihilators = oracle_reduce(W(1), W(2, 2), q_complex)
        assert coeff == pytest.approx(q_complex.q(1, 2) ** 2)
        assert (creators, annihilators) == (W(2, 2), W(1))

    @pytest.mark.slow
    def test_exhaustive_agreement_with_reduce_pair(self):
        """Test every pair of words up to length 3 over three letters."""
        words = [W(*letters) for n in range(4) for letters in itertools.product((1, 2, 3), repeat=n)]
        for a, b in itertools.product(words, repeat=2):
            coeff, creators, annihilators = oracle_reduce(a, b, Q3)
            expected, residual_b, residual_a = reduce_pair(a, b, Q3)
            assert coeff == pytest.approx(expected, abs=1e-14)
            assert creators == residual_b == setminus(b, a)
            assert annihilators == residual_a == setminus(a, b)


class TestRewriteProperties:
    """Property tests for termination, confluence and the involution."""

    @given(symbol_words)
    def test_termination_measure_decreases(self, word):
        """Test that every step lowers the inversion count down to zero."""
        trace: list[int] = []
        normal_order(word, Q3, trace=trace)
        assert trace[0] == inversion_count(word)
        assert all(after < before for before, after in zip(trace, trace[1:]))
        assert trace[-1] == 0

    @settings(max_examples=200)
    @given(symbol_words)
    def test_confluence(self, word):
        """Test that leftmost and rightmost redex orders agree."""
        first = normal_order(word, Q3, "leftmost")
        second = normal_order(word, Q3, "rightmost")
        assert first.coeff == pytest.approx(second.coeff, abs=1e-14)
        assert (first.creators, first.annihilators) == (second.creators, second.annihilators)

    @given(symbol_words)
    def test_involution(self, word):
        """Test that ordering the adjoint word gives the adjoint monomial."""
        direct = normal_order(word, Q3).adjoint()
        mirrored = normal_order(adjoint_word(word), Q3)
        assert direct.coeff == pytest.approx(mirrored.coeff, abs=1e-14)
        assert (direct.creators, direct.annihilators) == (mirrored.creators, mirrored.annihilators)
