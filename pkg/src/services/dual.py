"""Gram-metric projections, dual isometries, the projections P_n(mu) and the vacuum test."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Hashable, NamedTuple, Optional, Sequence, Union

import numpy as np
import scipy.linalg
import structlog

from models.multiindex import FiniteWord, TailSpec
from models.window import GramMatrix, RepWindow
from services.fock import gram_adjoint
from utils.exceptions import DomainError, DualConstructionError, WindowError

logger = structlog.get_logger(__name__)

RANK_THRESHOLD = 1e-10
MAX_CONDITION = 1e12
KERNEL_THRESHOLD = 1e-9


def metric(G: GramMatrix) -> np.ndarray:
    """M with <x, y> = y^H M x; the transpose of the Gram entries."""
    return G.metric


def metric_cholesky(G: GramMatrix) -> np.ndarray:
    """Upper R with M = R^H R, so that <x, y> = (R y)^H (R x)."""
    try:
        return scipy.linalg.cholesky(metric(G), lower=False)
    except np.linalg.LinAlgError as error:
        raise DomainError(f"Gram matrix is not positive definite: {error}") from error


def metric_norm(x: np.ndarray, G: GramMatrix) -> float:
    """sqrt(x^H M x), clipped at 0."""
    value = np.vdot(x, metric(G) @ x).real
    return float(np.sqrt(max(value, 0.0)))


@dataclass(frozen=True, eq=False)
class ProjectionOperator:
    matrix: np.ndarray
    gram: GramMatrix
    rank: int
    orthogonal: bool = True

    def idempotence_residual(self, columns: Optional[np.ndarray] = None) -> float:
        defect = self.matrix @ self.matrix - self.matrix
        if columns is not None:
            defect = defect[:, columns]
        return float(np.max(np.abs(defect), initial=0.0))

    def adjointness_residual(self, columns: Optional[np.ndarray] = None) -> float:
        defect = gram_adjoint(self.matrix, self.gram, self.gram) - self.matrix
        if columns is not None:
            defect = defect[:, columns]
        return float(np.max(np.abs(defect), initial=0.0))

    def apply(self, vector: np.ndarray) -> np.ndarray:
        return self.matrix @ vector


def range_projection(vectors: Union[Sequence[np.ndarray], np.ndarray], G: GramMatrix) -> ProjectionOperator:
    """Gram-orthogonal projection onto the span of ``vectors``."""
    size = G.size
    V = np.asarray(vectors, dtype=np.complex128)
    if isinstance(vectors, (list, tuple)):
        V = V.T if len(vectors) else np.zeros((size, 0), dtype=np.complex128)
    R = metric_cholesky(G)
    if V.shape[1] == 0:
        return ProjectionOperator(np.zeros((size, size), dtype=np.complex128), G, 0)

    # orthonormalize in the whitened coordinates R x
    U, singular, _ = scipy.linalg.svd(R @ V, full_matrices=False)
    rank = int(np.count_nonzero(singular > RANK_THRESHOLD * singular[0])) if singular[0] > 0 else 0
    U = U[:, :rank]
    matrix = scipy.linalg.solve_triangular(R, U @ (U.conj().T @ R), lower=False)
    return ProjectionOperator(matrix, G, rank)


def exact_columns(W: RepWindow, j: int) -> np.ndarray:
    return np.flatnonzero(W.s_exact[j])


def complement_projection(j: int, W: RepWindow) -> ProjectionOperator:
    """Join of the ranges of s_k, k != j, over their exact columns."""
    stacked = [W.op_s[k][:, exact_columns(W, k)] for k in W.letters if k != j]
    V = np.hstack(stacked) if stacked else np.zeros((W.size, 0))
    return range_projection(V, W.gram)


class MiddleFactor(NamedTuple):
    matrix: np.ndarray
    spectrum: np.ndarray
    min_modulus: float
    condition: float


def middle_factor(
    j: int, W: RepWindow, complement: Optional[ProjectionOperator] = None
) -> tuple[np.ndarray, MiddleFactor]:
    """c_j = (I - p_check_j) s_j and M_j = c_j^* c_j on the exact columns of s_j."""
    X = exact_columns(W, j)
    if X.size == 0:
        raise WindowError(f"s_{j} has no exact column in the window", kind=W.kind, **W.params)
    complement = complement or complement_projection(j, W)
    A = W.op_s[j][:, X]
    C = A - complement.matrix @ A
    G_X = W.gram.submatrix(X)
    M = gram_adjoint(C, G_X, W.gram) @ C
    spectrum = scipy.linalg.eigvals(M)
    return C, MiddleFactor(
        matrix=M,
        spectrum=spectrum,
        min_modulus=float(np.min(np.abs(spectrum))),
        condition=float(np.linalg.cond(M)),
    )


@dataclass(frozen=True, eq=False)
class DualIsometry:
    """T_j on the window: biorthogonal to every s_k over the exact columns."""

    letter: int
    domain: np.ndarray
    matrix: np.ndarray
    adjoint: np.ndarray
    middle: MiddleFactor
    complement: ProjectionOperator


def dual_isometry(j: int, W: RepWindow, max_condition: float = MAX_CONDITION) -> DualIsometry:
    """T_j = (I - p_check_j) s_j M_j^{-1}; its Gram adjoint satisfies T_j^* s_k = delta_jk I."""
    complement = complement_projection(j, W)
    C, middle = middle_factor(j, W, complement)
    if not np.isfinite(middle.condition) or middle.condition > max_condition:
        logger.warning(
            "dual_isometry_failed", letter=j, condition=middle.condition, kind=W.kind, **W.params
        )
        raise DualConstructionError(
            "middle factor is numerically singular",
            letter=j,
            condition=middle.condition,
            window={"kind": W.kind, **W.params},
        )
    X = exact_columns(W, j)
    T = scipy.linalg.solve(middle.matrix.T, C.T).T
    adjoint = gram_adjoint(T, W.gram.submatrix(X), W.gram)
    return DualIsometry(
        letter=j, domain=X, matrix=T, adjoint=adjoint, middle=middle, complement=complement
    )


def biorthogonality_residual(dual: DualIsometry, k: int, W: RepWindow) -> float:
    """max |T_j^* s_k - delta_jk I| over the exact columns of s_k."""
    X_k = exact_columns(W, k)
    product = dual.adjoint @ W.op_s[k][:, X_k]
    if k == dual.letter:
        product = product - np.eye(len(X_k))
    return float(np.max(np.abs(product), initial=0.0))


def principal_angle(j: int, W: RepWindow) -> float:
    """Smallest angle between the range of s_j and the join of the other ranges."""
    R = metric_cholesky(W.gram)
    own = R @ W.op_s[j][:, exact_columns(W, j)]
    others = [W.op_s[k][:, exact_columns(W, k)] for k in W.letters if k != j]
    if own.shape[1] == 0 or not others:
        return float(np.pi / 2)
    angles = scipy.linalg.subspace_angles(own, R @ np.hstack(others))
    return float(np.min(angles))


@dataclass
class DualSystem:
    """Dual isometries on every depth truncation W_k of a window, k = 1..depth."""

    window: RepWindow
    parallel: bool = False
    max_workers: int = 4
    max_condition: float = MAX_CONDITION
    duals: dict[int, dict[int, DualIsometry]] = field(init=False)
    truncations: dict[int, RepWindow] = field(init=False)
    positions: dict[int, np.ndarray] = field(init=False)

    def __post_init__(self) -> None:
        levels = range(1, self.window.depth + 1)
        self.truncations = {k: self.window.truncate(k) for k in levels}
        self.positions = {k: np.flatnonzero(self.window.grades <= k) for k in levels}
        jobs = [(k, j) for k in self.truncations for j in self.window.letters]

        def build(job: tuple[int, int]) -> DualIsometry:
            k, j = job
            return dual_isometry(j, self.truncations[k], self.max_condition)

        if self.parallel:
            with ThreadPoolExecutor(max_workers=self.max_workers) as pool:
                built = list(pool.map(build, jobs))
        else:
            built = [build(job) for job in jobs]
        self.duals = {k: {} for k in self.truncations}
        for (k, j), dual in zip(jobs, built):
            self.duals[k][j] = dual

    @property
    def depth(self) -> int:
        return self.window.depth

    def lifted_adjoint(self, j: int, k: int) -> np.ndarray:
        """T_j^* built on W_k, written in the coordinates of the full window."""
        dual = self.duals[k][j]
        columns = self.positions[k]
        lifted = np.zeros((self.window.size, self.window.size), dtype=np.complex128)
        lifted[np.ix_(columns[dual.domain], columns)] = dual.adjoint
        return lifted


def _prefix_letters(mu_prefix: Union[FiniteWord, Sequence[int]]) -> tuple[int, ...]:
    return tuple(mu_prefix.letters if isinstance(mu_prefix, FiniteWord) else mu_prefix)


def word_operator(
    mu: Union[FiniteWord, Sequence[int]],
    nu: Union[FiniteWord, Sequence[int]],
    W: RepWindow,
    system: Optional[DualSystem] = None,
    operand: Optional[np.ndarray] = None,
) -> np.ndarray:
    """s_mu1 ... s_mum T*_nuk ... T*_nu1, with T*_nui taken on W_(K - i + 1).

    Maps e_(nu x) to e_(mu x) whenever both labels lie in the window. With ``operand``
    (a matrix of column vectors) the product is applied to it instead of returned whole.
    """
    creators, annihilators = _prefix_letters(mu), _prefix_letters(nu)
    K = W.depth
    if len(annihilators) > K:
        raise WindowError(
            f"{len(annihilators)} dual letters do not fit the window depth", depth=K, kind=W.kind, **W.params
        )
    for letter in creators + annihilators:
        if letter not in W.op_s:
            raise DomainError(f"letter {letter} is outside the window alphabet {W.letters}")
    if annihilators:
        system = system or DualSystem(W)

    product = np.eye(W.size, dtype=np.complex128) if operand is None else np.asarray(operand, dtype=np.complex128)
    for i, letter in enumerate(annihilators, start=1):
        product = system.lifted_adjoint(letter, K - i + 1) @ product
    for letter in reversed(creators):
        support = np.any(product != 0, axis=1)
        if np.any(support & ~W.s_exact[letter]):
            raise WindowError(f"s_{letter} escapes the window", depth=K, kind=W.kind, **W.params)
        product = W.op_s[letter] @ product
    return product


def pn_projection(
    mu_prefix: Union[FiniteWord, Sequence[int]],
    W: RepWindow,
    system: Optional[DualSystem] = None,
) -> ProjectionOperator:
    """P_n(mu) = s_mu1 ... s_mun T*_mun ... T*_mu1, with T*_mui taken on W_(K - i + 1)."""
    letters = _prefix_letters(mu_prefix)
    n, K = len(letters), W.depth
    if not 1 <= n <= K:
        raise WindowError(f"prefix length {n} does not fit the window depth", depth=K, kind=W.kind, **W.params)
    return ProjectionOperator(word_operator(letters, letters, W, system), W.gram, rank=n, orthogonal=False)


class DecayRow(NamedTuple):
    label: Hashable
    n: int
    norm: float


def decay_table(
    mu: Union[FiniteWord, TailSpec],
    W: RepWindow,
    system: Optional[DualSystem] = None,
    max_n: Optional[int] = None,
) -> list[DecayRow]:
    """||P_n(mu) e_beta|| for every basis label and n = 1..depth."""
    system = system or DualSystem(W)
    max_n = min(max_n or W.depth, W.depth)
    if isinstance(mu, TailSpec):
        prefix = mu.head(max_n)
    else:
        if len(mu) < max_n:
            raise WindowError(f"prefix {mu} is shorter than {max_n}", depth=W.depth, **W.params)
        prefix = mu
    rows = []
    for n in range(1, max_n + 1):
        P = pn_projection(prefix[:n], W, system)
        for column, label in enumerate(W.labels):
            rows.append(DecayRow(label, n, metric_norm(P.matrix[:, column], W.gram)))
    return rows


class VacuumResult(NamedTuple):
    kernel_dim: int
    min_singular: float
    kernel_support: tuple[Hashable, ...]


def vacuum_test(W: RepWindow, threshold: float = KERNEL_THRESHOLD) -> VacuumResult:
    """Joint kernel of the s_j^* restricted to the interior, measured in the Gram metric."""
    interior = np.flatnonzero(W.interior)
    if interior.size == 0:
        raise WindowError("the window has an empty interior", kind=W.kind, **W.params)
    R = metric_cholesky(W.gram)
    R_interior = metric_cholesky(W.gram.submatrix(interior))
    stacked = np.vstack([R @ W.op_sstar[j][:, interior] for j in W.letters])
    # x -> R_interior x whitens the domain; apply the inverse on the right
    whitened = scipy.linalg.solve_triangular(R_interior, stacked.conj().T, lower=False, trans="C").conj().T
    singular = scipy.linalg.svdvals(whitened)
    kernel_dim = int(np.count_nonzero(singular < threshold)) + max(0, interior.size - singular.size)

    support: tuple[Hashable, ...] = ()
    if kernel_dim:
        kernel = scipy.linalg.null_space(whitened, rcond=threshold / singular.max() if singular.max() > 0 else 1.0)
        coordinates = scipy.linalg.solve_triangular(R_interior, kernel, lower=False)
        mask = np.any(np.abs(coordinates) > threshold, axis=1)
        support = tuple(W.labels[i] for i in interior[mask])
    return VacuumResult(kernel_dim, float(singular.min()) if singular.size else 0.0, support)
