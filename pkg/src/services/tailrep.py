"""The tail representations pi_alpha on finite windows of H_alpha.

A window over ``ref`` holds every canonical extended word with head length at
most ``L`` and offset at most ``M``. Offsets past ``|u| + |v| - 1`` repeat
earlier suffixes, so larger ``M`` never adds labels.
"""

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np
import structlog

from models.extended_word import ExtendedWord, canonicalize, sstar_image
from models.multiindex import (
    FiniteWord,
    QMatrix,
    TailSpec,
    align_shift,
    is_permutation,
    q_infinite,
    tails_equivalent,
)
from models.window import GramMatrix, RepWindow
from rewrite.engine import oracle_reduce
from utils.exceptions import ConsistencyError, DomainError, WindowError

logger = structlog.get_logger(__name__)

CROSS_CHECK_TOLERANCE = 1e-12


@dataclass(frozen=True)
class TailWindow:
    ref: TailSpec
    L: int
    M: int
    d: int
    basis: tuple[ExtendedWord, ...]

    @cached_property
    def index(self) -> dict[ExtendedWord, int]:
        return {label: position for position, label in enumerate(self.basis)}

    @property
    def params(self) -> dict:
        return {"ref": str(self.ref), "L": self.L, "M": self.M, "d": self.d}

    def locate(self, label: ExtendedWord) -> int:
        try:
            return self.index[label]
        except KeyError:
            raise WindowError(f"{label} lies outside the tail window", **self.params) from None


def build_tail_window(ref: TailSpec, L: int, M: int, d: int) -> TailWindow:
    """Enumerate canonical labels ordered by (offset, head length, head)."""
    if L < 0 or M < 0:
        raise DomainError(f"window caps must be non-negative, got L={L}, M={M}")
    ref.check_alphabet(d)
    max_offset = min(M, ref.preperiod + ref.period - 1)
    basis = []
    for offset in range(max_offset + 1):
        for length in range(L + 1):
            for letters in itertools.product(range(1, d + 1), repeat=length):
                label = ExtendedWord(FiniteWord(letters), offset, ref)
                if canonicalize(letters, offset, ref) == label:
                    basis.append(label)
    return TailWindow(ref=ref, L=L, M=M, d=d, basis=tuple(basis))


def aligned_oracle_value(beta: ExtendedWord, gamma: ExtendedWord, Q: QMatrix) -> complex:
    """<e_beta, e_gamma> through the rewrite system on the aligned heads."""
    m = align_shift(beta, gamma)
    if m is None:
        return 0j
    head_beta, head_gamma = beta.letters(m), gamma.letters(m)
    if not is_permutation(head_beta, head_gamma):
        return 0j
    coeff, creators, annihilators = oracle_reduce(head_gamma, head_beta, Q)
    if len(creators) or len(annihilators):
        raise ConsistencyError(f"permuted heads {head_gamma}, {head_beta} left a residual monomial")
    return coeff


def _gram_row(
    window: TailWindow, row: int, Q: QMatrix, cross_check: bool
) -> list[tuple[int, int, complex]]:
    beta = window.basis[row]
    values = []
    for column in range(row + 1, len(window.basis)):
        gamma = window.basis[column]
        value = q_infinite(gamma, beta, Q)
        if cross_check:
            oracle = aligned_oracle_value(beta, gamma, Q)
            if abs(oracle - value) > CROSS_CHECK_TOLERANCE:
                raise ConsistencyError(
                    f"<{beta}, {gamma}>: q_infinite gives {value}, the rewrite oracle gives {oracle}"
                )
        if value != 0:
            values.append((row, column, value))
    return values


def gram_tail(
    window: TailWindow,
    Q: QMatrix,
    cross_check: bool = True,
    parallel: bool = False,
    max_workers: int = 4,
) -> GramMatrix:
    """<e_beta, e_gamma> = q_infinite(gamma, beta); blocks from the nonzero pattern."""
    size = len(window.basis)
    entries = np.eye(size, dtype=np.complex128)
    rows = range(size)
    if parallel:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(lambda row: _gram_row(window, row, Q, cross_check), rows))
    else:
        results = [_gram_row(window, row, Q, cross_check) for row in rows]
    for values in results:
        for row, column, value in values:
            entries[row, column] = value
            entries[column, row] = np.conj(value)
    logger.debug("gram_tail_built", size=size, cross_check=cross_check, **window.params)
    return GramMatrix.from_entries(entries)


def op_s(
    j: int, window: TailWindow, Q: QMatrix, target: Optional[TailWindow] = None
) -> np.ndarray:
    """s_j: window(L, M) -> window(L + 1, M), e_beta -> e_(j beta)."""
    Q.check_letter(j)
    target = target or build_tail_window(window.ref, window.L + 1, window.M, window.d)
    matrix = np.zeros((len(target.basis), len(window.basis)), dtype=np.complex128)
    for column, beta in enumerate(window.basis):
        matrix[target.locate(beta.prepend(j)), column] = 1
    return matrix


def sstar_target(window: TailWindow) -> TailWindow:
    """A window holding every s_j^* image of ``window``.

    Deleting a tail letter moves at most ``|u| + |v| - 1`` tail letters into the
    head, and canonical offsets stay below ``|u| + |v|``.
    """
    ref = window.ref
    reach = ref.preperiod + ref.period
    return build_tail_window(ref, window.L + reach - 1, max(window.M, reach - 1), window.d)


def op_sstar(
    j: int, window: TailWindow, Q: QMatrix, target: Optional[TailWindow] = None
) -> np.ndarray:
    """s_j^*: delete the first j of the sequence, scaled by q over the letters before it.

    Without ``target`` the images land in ``sstar_target(window)``.
    """
    target = target or sstar_target(window)
    matrix = np.zeros((len(target.basis), len(window.basis)), dtype=np.complex128)
    for column, beta in enumerate(window.basis):
        image = sstar_image(j, beta, Q)
        if image is None or image[1] == 0:
            continue
        label, factor = image
        matrix[target.locate(label), column] = factor
    return matrix


def tail_window(
    ref: TailSpec,
    L: int,
    M: int,
    Q: QMatrix,
    parallel: bool = False,
    max_workers: int = 4,
) -> RepWindow:
    """Square truncated operators over one window; escaping columns are marked inexact."""
    window = build_tail_window(ref, L, M, Q.d)
    size = len(window.basis)
    G = gram_tail(window, Q, parallel=parallel, max_workers=max_workers)

    op_s_, op_sstar_, s_exact, sstar_exact = {}, {}, {}, {}
    for j in range(1, Q.d + 1):
        s = np.zeros((size, size), dtype=np.complex128)
        sstar = np.zeros((size, size), dtype=np.complex128)
        s_mask = np.ones(size, dtype=bool)
        sstar_mask = np.ones(size, dtype=bool)
        for column, beta in enumerate(window.basis):
            row = window.index.get(beta.prepend(j))
            if row is None:
                s_mask[column] = False
            else:
                s[row, column] = 1

            image = sstar_image(j, beta, Q)
            if image is None or image[1] == 0:
                continue
            label, factor = image
            row = window.index.get(label)
            if row is None:
                sstar_mask[column] = False
            else:
                sstar[row, column] = factor
        op_s_[j], op_sstar_[j] = s, sstar
        s_exact[j], sstar_exact[j] = s_mask, sstar_mask

    logger.debug(
        "tail_window_built",
        size=size,
        interior=int(np.count_nonzero(np.logical_and.reduce([*s_exact.values(), *sstar_exact.values()]))),
        **window.params,
    )
    return RepWindow(
        kind="tail",
        labels=window.basis,
        grades=np.asarray([len(label.head) for label in window.basis]),
        gram=G,
        op_s=op_s_,
        op_sstar=op_sstar_,
        s_exact=s_exact,
        sstar_exact=sstar_exact,
        params=window.params,
    )


def cross_gram(window_a: TailWindow, window_b: TailWindow, Q: QMatrix) -> np.ndarray:
    """Inner products <e_beta, e_gamma> for beta in window_a and gamma in window_b."""
    equivalent = tails_equivalent(window_a.ref, window_b.ref)
    entries = np.zeros((len(window_a.basis), len(window_b.basis)), dtype=np.complex128)
    for row, beta in enumerate(window_a.basis):
        for column, gamma in enumerate(window_b.basis):
            entries[row, column] = q_infinite(gamma, beta, Q)
    if not equivalent and np.any(entries != 0):
        raise ConsistencyError(
            f"refs {window_a.ref} and {window_b.ref} are inequivalent but share a nonzero inner product"
        )
    return entries


def shift_mismatched_pairs(window: TailWindow) -> list[tuple[int, int]]:
    """Pairs of one window that agree only after unequal shifts; their inner product is 0."""
    return [
        (row, column)
        for row, column in itertools.combinations(range(len(window.basis)), 2)
        if align_shift(window.basis[row], window.basis[column]) is None
    ]
