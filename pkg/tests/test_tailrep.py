"""Tests for extended words and the tail representation windows."""

import numpy as np
import pytest

from models.extended_word import ExtendedWord, canonicalize, sstar_image
from models.multiindex import FiniteWord, TailSpec
from services.fock import gram_adjoint, positivity_certificate
from services.tailrep import (
    aligned_oracle_value,
    build_tail_window,
    cross_gram,
    gram_tail,
    op_s,
    op_sstar,
    shift_mismatched_pairs,
    sstar_target,
    tail_window,
)
from utils.exceptions import DomainError, WindowError

TWO_INF = TailSpec((), (2,))
ONE_TWO_INF = TailSpec((1,), (2,))


def label(head, offset, ref):
    return ExtendedWord(FiniteWord(tuple(head)), offset, ref)


class TestExtendedWord:
    """Test canonical labels head . sigma^offset(ref)."""

    def test_head_absorbed_by_offset(self):
        """Test 1 . sigma(1 2^inf) = 1 2^inf."""
        assert canonicalize((1,), 1, ONE_TWO_INF) == label((), 0, ONE_TWO_INF)

    def test_head_absorbed_across_period(self):
        """Test 2 . sigma(1 2^inf) = sigma(1 2^inf)."""
        assert canonicalize((2,), 1, ONE_TWO_INF) == label((), 1, ONE_TWO_INF)

    def test_offset_normalized(self):
        """Test that offsets beyond |u| + |v| - 1 wrap."""
        assert canonicalize((), 5, ONE_TWO_INF) == label((), 1, ONE_TWO_INF)

    def test_head_kept_when_letters_differ(self):
        """Test that 1 . 2^inf is already canonical."""
        word = label((1,), 0, TWO_INF)
        assert word.is_canonical()
        assert str(word) == "[1 | +0]"

    def test_denoted_sequence(self):
        """Test letters and to_tailspec of 2 1 . sigma^1(1 2^inf)."""
        word = label((2, 1), 1, ONE_TWO_INF)
        assert word.letters(4) == FiniteWord((2, 1, 2, 2))
        assert word.to_tailspec() == TailSpec((2, 1), (2,))

    def test_prepend_canonicalizes(self):
        """Test s_2 e_(2^inf) = e_(2^inf)."""
        assert label((), 0, TWO_INF).prepend(2) == label((), 0, TWO_INF)

    def test_negative_offset(self):
        """Test that offsets are non-negative."""
        with pytest.raises(DomainError):
            label((), -1, TWO_INF)


class TestSStarImage:
    """Test s_j^* on extended words."""

    def test_fixed_point_in_the_tail(self, q_complex):
        """Test s_2^* e_(1 2^inf) = q_21 e_(1 2^inf)."""
        word = label((1,), 0, TWO_INF)
        assert sstar_image(2, word, q_complex) == (word, q_complex.q(2, 1))

    def test_letter_in_head(self, q_complex):
        """Test s_1^* e_(1 2^inf) = e_(2^inf)."""
        assert sstar_image(1, label((1,), 0, TWO_INF), q_complex) == (label((), 0, TWO_INF), 1)

    def test_factor_counts_head_letters(self, q_complex):
        """Test s_1^* e_(2 1 2^inf) = q_12 e_(2^inf)."""
        image, factor = sstar_image(1, label((2, 1), 0, TWO_INF), q_complex)
        assert image == label((), 0, TWO_INF)
        assert factor == q_complex.q(1, 2)

    def test_absent_letter(self, q_complex):
        """Test that s_1^* kills 2^inf."""
        assert sstar_image(1, label((), 0, TWO_INF), q_complex) is None


class TestTailWindowBasis:
    """Test the enumeration of canonical labels."""

    def test_constant_tail_basis(self):
        """Test that over 2^inf the heads are empty or end with 1."""
        window = build_tail_window(TWO_INF, 2, 3, 2)
        assert [str(word) for word in window.basis] == ["[e | +0]", "[1 | +0]", "[1 1 | +0]", "[2 1 | +0]"]

    def test_offsets_capped_by_period(self):
        """Test that offsets stop at |u| + |v| - 1."""
        window = build_tail_window(ONE_TWO_INF, 1, 4, 2)
        assert {word.offset for word in window.basis} == {0, 1}
        assert all(word.is_canonical() for word in window.basis)

    def test_locate_outside(self):
        """Test that a label outside the window raises WindowError."""
        window = build_tail_window(TWO_INF, 1, 0, 2)
        with pytest.raises(WindowError):
            window.locate(label((1, 1), 0, TWO_INF))

    def test_negative_caps(self):
        """Test that negative caps are rejected."""
        with pytest.raises(DomainError):
            build_tail_window(TWO_INF, -1, 0, 2)


class TestTailGram:
    """Test the Gram matrix of a tail window."""

    def test_transposed_heads_entry(self, q_complex):
        """Test <e_(1 2^inf), e_(2 1 2^inf)> = q_21."""
        window = build_tail_window(TWO_INF, 2, 0, 2)
        G = gram_tail(window, q_complex)
        row = window.locate(label((1,), 0, TWO_INF))
        column = window.locate(label((2, 1), 0, TWO_INF))
        assert G.entries[row, column] == q_complex.q(2, 1)
        assert G.entries[column, row] == q_complex.q(1, 2)

    def test_oracle_agrees(self, q_complex):
        """Test the rewrite system on aligned heads."""
        beta, gamma = label((1,), 0, TWO_INF), label((2, 1), 0, TWO_INF)
        assert aligned_oracle_value(beta, gamma, q_complex) == q_complex.q(2, 1)

    def test_positive_definite(self, q_random3):
        """Test positivity on a window over a period-2 reference."""
        window = build_tail_window(TailSpec((3,), (1, 2)), 2, 2, 3)
        G = gram_tail(window, q_random3, parallel=True, max_workers=2)
        assert positivity_certificate(G).ok
        assert np.allclose(np.diag(G.entries), 1)

    def test_shift_mismatched_pairs(self, q_half):
        """Test that labels aligned only at unequal shifts have zero inner product."""
        window = build_tail_window(TailSpec((), (1, 2)), 1, 1, 2)
        G = gram_tail(window, q_half)
        pairs = shift_mismatched_pairs(window)
        assert pairs
        for row, column in pairs:
            assert G.entries[row, column] == 0


class TestTailOperators:
    """Test the truncated generators on tail windows."""

    def test_op_s_targets_larger_window(self, q_half):
        """Test that s_j maps window(L) into window(L + 1)."""
        window = build_tail_window(TWO_INF, 2, 0, 2)
        target = build_tail_window(TWO_INF, 3, 0, 2)
        S = op_s(1, window, q_half, target)
        assert S.shape == (len(target.basis), len(window.basis))
        assert S[target.locate(label((1, 1), 0, TWO_INF)), window.locate(label((1,), 0, TWO_INF))] == 1

    def test_op_s_escape(self, q_half):
        """Test that an image outside the target raises WindowError."""
        window = build_tail_window(TWO_INF, 2, 0, 2)
        with pytest.raises(WindowError):
            op_s(1, window, q_half, target=window)

    def test_op_sstar_fixed_point(self, q_complex):
        """Test the diagonal entry of s_2^* at 1 2^inf."""
        window = build_tail_window(TWO_INF, 2, 0, 2)
        target = sstar_target(window)
        S = op_sstar(2, window, q_complex)
        fixed = label((1,), 0, TWO_INF)
        assert S.shape == (len(target.basis), len(window.basis))
        assert S[target.locate(fixed), window.locate(fixed)] == q_complex.q(2, 1)

    def test_op_sstar_pulls_tail_letters_into_the_head(self, q_half):
        """Test that s_2^* on (1 2)^inf labels lands in the default target window."""
        ref = TailSpec((), (1, 2))
        window = build_tail_window(ref, 2, 2, 2)
        target = sstar_target(window)
        S = op_sstar(2, window, q_half)
        assert S.shape == (len(target.basis), len(window.basis))
        # 1 1 . (1 2)^inf loses the 2 after three 1s
        beta = label((1, 1), 0, ref)
        image = label((1, 1, 1), 0, ref)
        assert S[target.locate(image), window.locate(beta)] == pytest.approx(q_half.q(2, 1) ** 3)
        assert all(np.count_nonzero(S[:, column]) == 1 for column in range(len(window.basis)))

    def test_op_sstar_explicit_target_too_small(self, q_half):
        """Test that an explicit target without room for the images raises WindowError."""
        window = build_tail_window(TailSpec((), (1, 2)), 2, 2, 2)
        with pytest.raises(WindowError):
            op_sstar(2, window, q_half, target=window)

    def test_window_relations_on_exact_columns(self, q_complex):
        """Test s_j^* s_j = I where both factors stay inside the window."""
        W = tail_window(TWO_INF, 3, 0, q_complex)
        for j in W.letters:
            columns = np.flatnonzero(W.s_exact[j])
            product = W.op_sstar[j] @ W.op_s[j][:, columns]
            assert np.allclose(product, np.eye(W.size)[:, columns], atol=1e-12)

    def test_window_adjointness_inside_the_interior(self, q_complex):
        """Test that the Gram adjoint of s_j matches s_j^* on columns whose images stay inside."""
        W = tail_window(TWO_INF, 3, 0, q_complex)
        for j in W.letters:
            X = np.flatnonzero(W.s_exact[j])
            inside = np.zeros(W.size, dtype=bool)
            inside[X] = True
            adjoint = gram_adjoint(W.op_s[j][:, X], W.gram.submatrix(X), W.gram)
            supported = ~np.any((W.op_sstar[j] != 0) & ~inside[:, None], axis=0)
            columns = np.flatnonzero(W.sstar_exact[j] & supported)
            assert np.allclose(adjoint[:, columns], W.op_sstar[j][np.ix_(X, columns)], atol=1e-10)

    def test_window_metadata(self, q_half):
        """Test kind, grades and parameters of a tail window."""
        W = tail_window(TWO_INF, 2, 0, q_half)
        assert W.kind == "tail"
        assert W.grades.tolist() == [0, 1, 2, 2]
        assert W.params == {"ref": ";2", "L": 2, "M": 0, "d": 2}


class TestCrossClass:
    """Test orthogonality between inequivalent references."""

    def test_inequivalent_refs_are_orthogonal(self, q_half):
        """Test that 2^inf and 1^inf windows share no inner product."""
        entries = cross_gram(
            build_tail_window(TWO_INF, 2, 0, 2),
            build_tail_window(TailSpec((), (1,)), 2, 0, 2),
            q_half,
        )
        assert entries.shape == (4, 4)
        assert not np.any(entries)

    def test_equivalent_refs_overlap(self, q_half):
        """Test that 1 2^inf and 2^inf windows overlap."""
        entries = cross_gram(
            build_tail_window(ONE_TWO_INF, 1, 1, 2),
            build_tail_window(TWO_INF, 1, 0, 2),
            q_half,
        )
        assert np.any(entries)
