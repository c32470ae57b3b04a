"""Truncated Fock space: level bases, Gram matrices, generator matrices and the embeddings J_k."""

import itertools
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Optional, Union

import numpy as np
import scipy.linalg
import structlog

from models.multiindex import FiniteWord, QMatrix, TailSpec, q_finite, remove_first
from models.window import GramMatrix, RepWindow
from utils.exceptions import DomainError

logger = structlog.get_logger(__name__)

GramLike = Union[GramMatrix, np.ndarray]


def fock_basis(n: int, d: int) -> list[FiniteWord]:
    """All words of length n over 1..d in lexicographic order."""
    if n < 0:
        raise DomainError(f"level must be non-negative, got {n}")
    return [FiniteWord(letters) for letters in itertools.product(range(1, d + 1), repeat=n)]


def word_rank(word: FiniteWord, d: int) -> int:
    """Position of ``word`` in ``fock_basis(len(word), d)``."""
    rank = 0
    for letter in word:
        rank = rank * d + (letter - 1)
    return rank


@dataclass(frozen=True)
class FockLevel:
    n: int
    d: int
    basis: tuple[FiniteWord, ...]
    blocks: tuple[tuple[int, ...], ...]

    @property
    def dimension(self) -> int:
        return len(self.basis)


def multinomial(signature: tuple[int, ...]) -> int:
    counts = Counter(signature).values()
    return math.factorial(len(signature)) // math.prod(math.factorial(c) for c in counts)


def fock_level(n: int, d: int) -> FockLevel:
    """Level F_n with its basis partitioned by letter multiset."""
    basis = fock_basis(n, d)
    grouped: dict[tuple[int, ...], list[int]] = {}
    for index, word in enumerate(basis):
        grouped.setdefault(word.letter_counts(), []).append(index)
    blocks = tuple(tuple(grouped[signature]) for signature in sorted(grouped))
    return FockLevel(n=n, d=d, basis=tuple(basis), blocks=blocks)


def _gram_block(
    basis: tuple[FiniteWord, ...], block: tuple[int, ...], Q: QMatrix
) -> tuple[tuple[int, ...], np.ndarray]:
    values = np.empty((len(block), len(block)), dtype=np.complex128)
    for x, a in enumerate(block):
        for y, b in enumerate(block):
            values[x, y] = 1.0 if a == b else q_finite(basis[b], basis[a], Q)
    return block, values


def gram(n: int, Q: QMatrix, parallel: bool = False, max_workers: int = 4) -> GramMatrix:
    """Gram matrix of F_n: entries[a][b] = q_finite(b, a) within a multiset block, 0 across."""
    level = fock_level(n, Q.d)
    entries = np.zeros((level.dimension, level.dimension), dtype=np.complex128)

    if parallel and len(level.blocks) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(lambda block: _gram_block(level.basis, block, Q), level.blocks))
    else:
        results = [_gram_block(level.basis, block, Q) for block in level.blocks]

    for block, values in results:
        index = np.asarray(block)
        entries[np.ix_(index, index)] = values

    logger.debug("gram_level_built", level=n, d=Q.d, blocks=len(level.blocks), parallel=parallel)
    return GramMatrix(entries, level.blocks)


class PositivityCertificate(NamedTuple):
    min_eigenvalue: float
    ok: bool


def positivity_certificate(G: GramMatrix, tolerance: float = 1e-12) -> PositivityCertificate:
    """Smallest eigenvalue over the diagonal blocks; ok iff it exceeds ``tolerance``."""
    defect = G.hermitian_defect()
    if defect > tolerance:
        raise DomainError(f"Gram matrix is not Hermitian (defect {defect:.3e})")
    minimum = math.inf
    for block in G.blocks:
        index = np.asarray(block)
        eigenvalues = scipy.linalg.eigh(G.entries[np.ix_(index, index)], eigvals_only=True)
        minimum = min(minimum, float(eigenvalues[0]))
    return PositivityCertificate(minimum, minimum > tolerance)


def matrix_s(j: int, n: int, Q: QMatrix) -> np.ndarray:
    """s_j: F_n -> F_{n+1}, e_alpha -> e_(j, alpha)."""
    Q.check_letter(j)
    if n < 0:
        raise DomainError(f"level must be non-negative, got {n}")
    size = Q.d**n
    matrix = np.zeros((Q.d * size, size), dtype=np.complex128)
    # prepending j shifts the lexicographic rank by (j - 1) d^n
    columns = np.arange(size)
    matrix[(j - 1) * size + columns, columns] = 1
    return matrix


def matrix_sstar(j: int, n: int, Q: QMatrix) -> np.ndarray:
    """s_j^*: F_n -> F_{n-1}, e_alpha -> q(j, alpha) e_(alpha minus j), zero without j."""
    Q.check_letter(j)
    if n < 1:
        raise DomainError(f"s_{j}^* has no matrix on level {n}; the vacuum level maps to 0")
    matrix = np.zeros((Q.d ** (n - 1), Q.d**n), dtype=np.complex128)
    for column, word in enumerate(fock_basis(n, Q.d)):
        hit = remove_first(word, j, Q)
        if hit is not None:
            residual, factor = hit
            matrix[word_rank(residual, Q.d), column] = factor
    return matrix


def gram_adjoint(A: np.ndarray, G_X: GramLike, G_Y: GramLike) -> np.ndarray:
    """Adjoint of A: X -> Y in the Gram metrics, M_X^{-1} A^H M_Y."""
    metric_x = G_X.metric if isinstance(G_X, GramMatrix) else np.asarray(G_X).T
    metric_y = G_Y.metric if isinstance(G_Y, GramMatrix) else np.asarray(G_Y).T
    A = np.asarray(A)
    if A.shape != (metric_y.shape[0], metric_x.shape[0]):
        raise DomainError(
            f"operator shape {A.shape} does not match Gram sizes "
            f"{metric_x.shape[0]} -> {metric_y.shape[0]}"
        )
    if A.size == 0:
        return np.zeros(A.shape[::-1], dtype=np.complex128)
    try:
        return scipy.linalg.solve(metric_x, A.conj().T @ metric_y, assume_a="pos")
    except np.linalg.LinAlgError as error:
        raise DomainError(f"Gram matrix is singular or not positive definite: {error}") from error


def embed_J(k: int, tail: TailSpec, Q: QMatrix) -> np.ndarray:
    """J_k: F_k -> F_{k+1}, e_gamma -> e_(gamma, alpha_{k+1})."""
    if k < 0:
        raise DomainError(f"level must be non-negative, got {k}")
    tail.check_alphabet(Q.d)
    size = Q.d**k
    matrix = np.zeros((Q.d * size, size), dtype=np.complex128)
    columns = np.arange(size)
    matrix[columns * Q.d + (tail.letter(k + 1) - 1), columns] = 1
    return matrix


def fock_window(
    N: int, Q: QMatrix, parallel: bool = False, max_workers: int = 4
) -> RepWindow:
    """Levels 0..N as one window; s_j escapes from level N, s_j^* is always exact."""
    if N < 0:
        raise DomainError(f"Fock depth must be non-negative, got {N}")
    offsets = [sum(Q.d**m for m in range(n)) for n in range(N + 2)]
    size = offsets[N + 1]
    labels: list[FiniteWord] = []
    grades: list[int] = []
    entries = np.zeros((size, size), dtype=np.complex128)
    blocks: list[tuple[int, ...]] = []
    for n in range(N + 1):
        level_gram = gram(n, Q, parallel=parallel, max_workers=max_workers)
        labels.extend(fock_basis(n, Q.d))
        grades.extend([n] * Q.d**n)
        span = slice(offsets[n], offsets[n + 1])
        entries[span, span] = level_gram.entries
        blocks.extend(tuple(offsets[n] + i for i in block) for block in level_gram.blocks)

    op_s, op_sstar, s_exact, sstar_exact = {}, {}, {}, {}
    for j in range(1, Q.d + 1):
        s = np.zeros((size, size), dtype=np.complex128)
        sstar = np.zeros((size, size), dtype=np.complex128)
        for n in range(N + 1):
            columns = slice(offsets[n], offsets[n + 1])
            if n < N:
                s[offsets[n + 1] : offsets[n + 2], columns] = matrix_s(j, n, Q)
            if n > 0:
                sstar[offsets[n - 1] : offsets[n], columns] = matrix_sstar(j, n, Q)
        op_s[j], op_sstar[j] = s, sstar
        s_exact[j] = np.asarray(grades) < N
        sstar_exact[j] = np.ones(size, dtype=bool)

    return RepWindow(
        kind="fock",
        labels=tuple(labels),
        grades=np.asarray(grades),
        gram=GramMatrix(entries, tuple(blocks)),
        op_s=op_s,
        op_sstar=op_sstar,
        s_exact=s_exact,
        sstar_exact=sstar_exact,
        params={"N": N, "d": Q.d},
    )


def vacuum_expectation(creators: FiniteWord, annihilators: FiniteWord, coeff: complex) -> complex:
    """<coeff s_mu s_nu^* Omega, Omega>: only the identity monomial survives."""
    return coeff if not len(creators) and not len(annihilators) else 0j


def isometry_residual(k: int, tail: TailSpec, Q: QMatrix, grams: Optional[dict] = None) -> float:
    """max |J^T M_{k+1} J - M_k|; zero iff J_k is isometric."""
    grams = grams if grams is not None else {}
    for level in (k, k + 1):
        if level not in grams:
            grams[level] = gram(level, Q)
    J = embed_J(k, tail, Q)
    pulled = J.conj().T @ grams[k + 1].metric @ J
    return float(np.max(np.abs(pulled - grams[k].metric), initial=0.0))
