"""Verification suites: each executes a family of checks and returns report records."""

import itertools
import threading
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Optional

import numpy as np
import structlog

from models.extended_word import canonicalize, sstar_image
from models.multiindex import (
    EMPTY_WORD,
    FiniteWord,
    QMatrix,
    TailSpec,
    is_permutation,
    q_finite,
    reduce_pair,
    setminus,
)
from models.window import GramMatrix, RepWindow
from rewrite.engine import (
    NormalOrderingEngine,
    adjoint_word,
    oracle_reduce,
)
from rewrite.symbols import GeneratorSymbol
from schemas.config import RunConfig
from schemas.report import CheckRecord, DecayEntry, DecayTable
from services.dual import (
    DualSystem,
    biorthogonality_residual,
    decay_table,
    exact_columns,
    metric_cholesky,
    metric_norm,
    pn_projection,
    principal_angle,
    vacuum_test,
    word_operator,
)
from services.fock import (
    fock_basis,
    fock_level,
    fock_window,
    gram,
    gram_adjoint,
    isometry_residual,
    matrix_s,
    matrix_sstar,
    multinomial,
    positivity_certificate,
    vacuum_expectation,
)
from services.tailrep import (
    TailWindow,
    build_tail_window,
    cross_gram,
    gram_tail,
    shift_mismatched_pairs,
    tail_window,
)
from utils.exceptions import QIsometryError

DECAY_THRESHOLD = 1e-6
VACUUM_MIN_SINGULAR = 1e-3


@dataclass
class RunContext:
    """Shared, lazily built inputs of one run; builds are serialized per context."""

    config: RunConfig
    q_matrix: QMatrix
    max_workers: int = 4
    _cache: dict[str, Any] = field(default_factory=dict, init=False, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False)

    def _cached(self, key: str, builder: Callable[[], Any]) -> Any:
        with self._lock:
            if key not in self._cache:
                self._cache[key] = builder()
            return self._cache[key]

    @property
    def parallel(self) -> bool:
        return self.config.parallel

    @property
    def ref(self) -> TailSpec:
        return self.config.tail.ref_tail()

    @property
    def contrast(self) -> TailSpec:
        return self.config.contrast_tail()

    def fock_gram(self, n: int) -> GramMatrix:
        return self._cached(
            f"fock_gram:{n}",
            lambda: gram(n, self.q_matrix, parallel=self.parallel, max_workers=self.max_workers),
        )

    def fock_window(self) -> RepWindow:
        return self._cached(
            "fock_window",
            lambda: fock_window(
                self.config.fock_depth,
                self.q_matrix,
                parallel=self.parallel,
                max_workers=self.max_workers,
            ),
        )

    def tail_basis(self, ref: Optional[TailSpec] = None) -> TailWindow:
        ref = ref or self.ref
        tail = self.config.tail
        return self._cached(
            f"tail_basis:{ref}", lambda: build_tail_window(ref, tail.L, tail.M, self.q_matrix.d)
        )

    def tail_window(self) -> RepWindow:
        tail = self.config.tail
        return self._cached(
            "tail_window",
            lambda: tail_window(
                self.ref,
                tail.L,
                tail.M,
                self.q_matrix,
                parallel=self.parallel,
                max_workers=self.max_workers,
            ),
        )

    def dual_system(self, kind: str) -> DualSystem:
        window = self.fock_window() if kind == "fock" else self.tail_window()
        return self._cached(
            f"dual_system:{kind}",
            lambda: DualSystem(window, parallel=self.parallel, max_workers=self.max_workers),
        )


class ResidualTracker:
    """Running maximum of |defect| with the matrix position that attains it."""

    def __init__(self) -> None:
        self.value = 0.0
        self.witness: Optional[dict[str, Any]] = None
        self.columns = 0

    def update(
        self,
        defect: np.ndarray,
        row_labels: Optional[Iterable[Any]] = None,
        column_labels: Optional[Iterable[Any]] = None,
        **context: Any,
    ) -> None:
        defect = np.atleast_2d(np.asarray(defect))
        if defect.size == 0:
            return
        self.columns += defect.shape[1]
        magnitude = np.abs(defect)
        row, column = np.unravel_index(int(np.argmax(magnitude)), magnitude.shape)
        value = float(magnitude[row, column])
        if self.witness is None or value > self.value:
            self.value = value
            self.witness = {"row": int(row), "column": int(column), **context}
            if row_labels is not None:
                self.witness["row_label"] = str(list(row_labels)[row])
            if column_labels is not None:
                self.witness["column_label"] = str(list(column_labels)[column])


@dataclass
class CheckOutcome:
    passed: bool
    metrics: dict[str, Any] = field(default_factory=dict)
    parameters: dict[str, Any] = field(default_factory=dict)
    tolerance: Optional[float] = None
    witness: Optional[dict[str, Any]] = None


def residual_outcome(
    tracker: ResidualTracker, tolerance: float, **parameters: Any
) -> CheckOutcome:
    passed = tracker.value <= tolerance
    return CheckOutcome(
        passed=passed,
        metrics={"max_residual": tracker.value, "columns_checked": tracker.columns},
        parameters=parameters,
        tolerance=tolerance,
        witness=None if passed else tracker.witness,
    )


def composed_exact(
    W: RepWindow, steps: list[tuple[dict[int, np.ndarray], dict[int, np.ndarray], int]]
) -> np.ndarray:
    """Columns on which applying the truncated operators in ``steps`` (rightmost first) is exact."""
    current = np.eye(W.size, dtype=np.complex128)
    valid = np.ones(W.size, dtype=bool)
    for matrices, exact, letter in steps:
        support = current != 0
        valid &= ~np.any(support & ~exact[letter][:, None], axis=0)
        current = matrices[letter] @ current
    return valid


class BaseSuite(ABC):
    """Base class for verification suites: named checks executed in a fixed order."""

    def __init__(self, context: RunContext, logger: structlog.BoundLogger = None) -> None:
        self.context = context
        self.config = context.config
        self.Q = context.q_matrix
        self.tol = context.config.tolerances
        self.logger = logger or structlog.get_logger(f"{__name__}.{self.__class__.__name__}")
        self.decay_tables: list[DecayTable] = []

    def __str__(self):
        return self.get_suite_name()

    @abstractmethod
    def get_suite_name(self) -> str:
        """Return the suite name used in reports."""
        pass

    @abstractmethod
    def checks(self) -> list[tuple[str, Callable[[], CheckOutcome]]]:
        """Return the (name, check) pairs in execution order."""
        pass

    def run(self) -> list[CheckRecord]:
        records = [self._execute(name, check) for name, check in self.checks()]
        self.logger.info(
            "suite_completed",
            suite=self.get_suite_name(),
            passed=sum(record.passed for record in records),
            failed=sum(not record.passed for record in records),
        )
        return records

    def _execute(self, name: str, check: Callable[[], CheckOutcome]) -> CheckRecord:
        start = time.perf_counter()
        try:
            outcome = check()
        except (QIsometryError, np.linalg.LinAlgError) as e:
            elapsed = time.perf_counter() - start
            self.logger.error(
                "check_failed", suite=self.get_suite_name(), check=name, error=str(e)
            )
            witness = {"exception": type(e).__name__}
            for attribute in ("window", "letter", "condition", "column", "field"):
                if hasattr(e, attribute):
                    witness[attribute] = getattr(e, attribute)
            return CheckRecord(
                suite=self.get_suite_name(),
                name=name,
                passed=False,
                witness=witness,
                error=str(e),
                wall_time_s=elapsed,
            )
        elapsed = time.perf_counter() - start
        self.logger.debug(
            "check_completed",
            suite=self.get_suite_name(),
            check=name,
            passed=outcome.passed,
            wall_time_s=elapsed,
        )
        return CheckRecord(
            suite=self.get_suite_name(),
            name=name,
            parameters=outcome.parameters,
            metrics=outcome.metrics,
            tolerance=outcome.tolerance,
            passed=outcome.passed,
            witness=outcome.witness,
            wall_time_s=elapsed,
        )


class FockSuite(BaseSuite):
    """Gram positivity, operator formulas and the relations on the truncated Fock space."""

    def get_suite_name(self) -> str:
        return "fock"

    @property
    def depth(self) -> int:
        return self.config.fock_depth

    def checks(self):
        return [
            ("gram_positivity", self.check_gram_positivity),
            ("gram_block_sparsity", self.check_block_sparsity),
            ("gram_oracle_agreement", self.check_oracle_agreement),
            ("adjointness", self.check_adjointness),
            ("isometry", self.check_isometry),
            ("isometry_gram_adjoint", self.check_isometry_gram_adjoint),
            ("commutation", self.check_commutation),
            ("embedding_isometry", self.check_embedding_isometry),
        ]

    def check_gram_positivity(self) -> CheckOutcome:
        minimum, witness, ok = np.inf, None, True
        for n in range(self.depth + 1):
            certificate = positivity_certificate(self.context.fock_gram(n), self.tol.exact)
            ok &= certificate.ok
            if certificate.min_eigenvalue < minimum:
                minimum, witness = certificate.min_eigenvalue, {"level": n}
        return CheckOutcome(
            passed=bool(ok),
            metrics={"min_eigenvalue": float(minimum)},
            parameters={"N": self.depth, "d": self.Q.d},
            tolerance=self.tol.exact,
            witness=None if ok else witness,
        )

    def check_block_sparsity(self) -> CheckOutcome:
        worst, bad_block = 0.0, None
        for n in range(self.depth + 1):
            G = self.context.fock_gram(n)
            worst = max(worst, G.off_block_max())
            level = fock_level(n, self.Q.d)
            for block in level.blocks:
                signature = level.basis[block[0]].letter_counts()
                if len(block) != multinomial(signature):
                    bad_block = {"level": n, "signature": list(signature), "size": len(block)}
        passed = worst == 0.0 and bad_block is None
        return CheckOutcome(
            passed=passed,
            metrics={"off_block_max": worst},
            parameters={"N": self.depth},
            tolerance=0.0,
            witness=None if passed else (bad_block or {"off_block_max": worst}),
        )

    def check_oracle_agreement(self) -> CheckOutcome:
        tracker = ResidualTracker()
        top = min(self.depth, 4)
        for n in range(top + 1):
            basis = fock_basis(n, self.Q.d)
            G = self.context.fock_gram(n)
            oracle = np.zeros_like(G.entries)
            for a, b in itertools.product(range(len(basis)), repeat=2):
                coeff, creators, annihilators = oracle_reduce(basis[b], basis[a], self.Q)
                oracle[a, b] = vacuum_expectation(creators, annihilators, coeff)
            tracker.update(G.entries - oracle, basis, basis, level=n)
        return residual_outcome(tracker, self.tol.exact, max_level=top)

    def check_adjointness(self) -> CheckOutcome:
        tracker = ResidualTracker()
        for n in range(self.depth):
            for j in range(1, self.Q.d + 1):
                adjoint = gram_adjoint(
                    matrix_s(j, n, self.Q), self.context.fock_gram(n), self.context.fock_gram(n + 1)
                )
                tracker.update(adjoint - matrix_sstar(j, n + 1, self.Q), letter=j, level=n + 1)
        return residual_outcome(tracker, self.tol.metric, N=self.depth)

    def check_isometry(self) -> CheckOutcome:
        tracker = ResidualTracker()
        for n in range(self.depth):
            identity = np.eye(self.Q.d**n)
            for j in range(1, self.Q.d + 1):
                product = matrix_sstar(j, n + 1, self.Q) @ matrix_s(j, n, self.Q)
                tracker.update(product - identity, letter=j, level=n)
        return residual_outcome(tracker, self.tol.exact, N=self.depth)

    def check_isometry_gram_adjoint(self) -> CheckOutcome:
        tracker = ResidualTracker()
        for n in range(self.depth):
            identity = np.eye(self.Q.d**n)
            for j in range(1, self.Q.d + 1):
                S = matrix_s(j, n, self.Q)
                adjoint = gram_adjoint(S, self.context.fock_gram(n), self.context.fock_gram(n + 1))
                tracker.update(adjoint @ S - identity, letter=j, level=n)
        return residual_outcome(tracker, self.tol.metric, N=self.depth)

    def check_commutation(self) -> CheckOutcome:
        tracker = ResidualTracker()
        for n in range(1, self.depth):
            for i, j in itertools.permutations(range(1, self.Q.d + 1), 2):
                left = matrix_sstar(i, n + 1, self.Q) @ matrix_s(j, n, self.Q)
                right = self.Q.q(i, j) * (matrix_s(j, n - 1, self.Q) @ matrix_sstar(i, n, self.Q))
                tracker.update(left - right, i=i, j=j, level=n)
        return residual_outcome(tracker, self.tol.exact, N=self.depth)

    def check_embedding_isometry(self) -> CheckOutcome:
        tracker = ResidualTracker()
        ref = self.context.ref
        grams = {level: self.context.fock_gram(level) for level in range(self.config.j_depth + 2)}
        for k in range(self.config.j_depth + 1):
            residual = isometry_residual(k, ref, self.Q, grams)
            tracker.update(np.array([[residual]]), k=k)
        return residual_outcome(tracker, self.tol.metric, ref=str(ref), max_k=self.config.j_depth)


class TailSuite(BaseSuite):
    """Well-definedness of the tail representation on a finite window."""

    def get_suite_name(self) -> str:
        return "tail"

    def checks(self):
        return [
            ("tail_gram_cross_check", self.check_gram_cross_check),
            ("tail_gram_positivity", self.check_gram_positivity),
            ("tail_adjointness", self.check_adjointness),
            ("tail_isometry", self.check_isometry),
            ("tail_commutation", self.check_commutation),
            ("tail_fixed_points", self.check_fixed_points),
            ("tail_fock_consistency", self.check_fock_consistency),
            ("cross_class_orthogonality", self.check_cross_class),
            ("shift_mismatched_pairs", self.check_shift_mismatch),
        ]

    @property
    def window_parameters(self) -> dict[str, Any]:
        tail = self.config.tail
        return {"ref": str(self.context.ref), "L": tail.L, "M": tail.M}

    def check_gram_cross_check(self) -> CheckOutcome:
        G = gram_tail(self.context.tail_basis(), self.Q, cross_check=True)
        return CheckOutcome(
            passed=True,
            metrics={"size": G.size, "blocks": len(G.blocks)},
            parameters=self.window_parameters,
        )

    def check_gram_positivity(self) -> CheckOutcome:
        W = self.context.tail_window()
        certificate = positivity_certificate(W.gram, self.tol.exact)
        return CheckOutcome(
            passed=certificate.ok,
            metrics={
                "min_eigenvalue": certificate.min_eigenvalue,
                "size": W.size,
                "unit_diagonal_defect": float(np.max(np.abs(np.diag(W.gram.entries) - 1))),
            },
            parameters=self.window_parameters,
            tolerance=self.tol.exact,
        )

    def check_adjointness(self) -> CheckOutcome:
        W = self.context.tail_window()
        tracker = ResidualTracker()
        for j in W.letters:
            X = exact_columns(W, j)
            inside = np.zeros(W.size, dtype=bool)
            inside[X] = True
            adjoint = gram_adjoint(W.op_s[j][:, X], W.gram.submatrix(X), W.gram)
            # the Riesz representer in span(X) is exact where the true image lies in span(X)
            supported = ~np.any((W.op_sstar[j] != 0) & ~inside[:, None], axis=0)
            columns = np.flatnonzero(W.sstar_exact[j] & supported)
            defect = adjoint[:, columns] - W.op_sstar[j][np.ix_(X, columns)]
            tracker.update(
                defect,
                [W.labels[i] for i in X],
                [W.labels[i] for i in columns],
                letter=j,
            )
        outcome = residual_outcome(tracker, self.tol.metric, **self.window_parameters)
        outcome.metrics["interior_size"] = int(np.count_nonzero(W.interior))
        return outcome

    def check_isometry(self) -> CheckOutcome:
        W = self.context.tail_window()
        tracker = ResidualTracker()
        for j in W.letters:
            valid = composed_exact(W, [(W.op_s, W.s_exact, j), (W.op_sstar, W.sstar_exact, j)])
            columns = np.flatnonzero(valid)
            product = W.op_sstar[j] @ W.op_s[j]
            defect = product[:, columns] - np.eye(W.size)[:, columns]
            tracker.update(defect, W.labels, [W.labels[i] for i in columns], letter=j)
        return residual_outcome(tracker, self.tol.exact, **self.window_parameters)

    def check_commutation(self) -> CheckOutcome:
        W = self.context.tail_window()
        tracker = ResidualTracker()
        for i, j in itertools.permutations(W.letters, 2):
            left_valid = composed_exact(W, [(W.op_s, W.s_exact, j), (W.op_sstar, W.sstar_exact, i)])
            right_valid = composed_exact(W, [(W.op_sstar, W.sstar_exact, i), (W.op_s, W.s_exact, j)])
            columns = np.flatnonzero(left_valid & right_valid)
            left = W.op_sstar[i] @ W.op_s[j]
            right = self.Q.q(i, j) * (W.op_s[j] @ W.op_sstar[i])
            tracker.update(
                (left - right)[:, columns], W.labels, [W.labels[c] for c in columns], i=i, j=j
            )
        return residual_outcome(tracker, self.tol.exact, **self.window_parameters)

    def check_fixed_points(self) -> CheckOutcome:
        """Labels fixed by s_j^*: compare the sequences letter by letter and the factor via the rewrite system."""
        basis = self.context.tail_basis()
        ref = self.context.ref
        fixed, witness = [], None
        for j in range(1, self.Q.d + 1):
            for beta in basis.basis:
                image = sstar_image(j, beta, self.Q)
                if image is None or image[1] == 0 or image[0] != beta:
                    continue
                depth = len(beta.head) + ref.preperiod + 2 * ref.period + 2
                letters = list(beta.letters(depth + 1).letters)
                position = letters.index(j)
                deleted = letters[:position] + letters[position + 1 :]
                prefix = FiniteWord(tuple(letters[:position]))
                coeff, creators, annihilators = oracle_reduce(FiniteWord((j,)), prefix, self.Q)
                consistent = (
                    deleted[:depth] == list(beta.letters(depth).letters)
                    and creators == prefix
                    and annihilators == FiniteWord((j,))
                    and abs(coeff - image[1]) <= self.tol.exact
                )
                fixed.append({"letter": j, "label": str(beta), "factor": [image[1].real, image[1].imag]})
                if not consistent and witness is None:
                    witness = {"letter": j, "label": str(beta)}
        return CheckOutcome(
            passed=witness is None,
            metrics={"fixed_points": len(fixed), "examples": fixed[:8]},
            parameters=self.window_parameters,
            tolerance=self.tol.exact,
            witness=witness,
        )

    def check_fock_consistency(self) -> CheckOutcome:
        """Labels with equal offsets and equal head lengths pair like their heads in F_n."""
        W = self.context.tail_window()
        tracker = ResidualTracker()
        pairs = 0
        for row, column in itertools.combinations(range(W.size), 2):
            beta, gamma = W.labels[row], W.labels[column]
            if beta.offset != gamma.offset or len(beta.head) != len(gamma.head):
                continue
            pairs += 1
            expected = q_finite(gamma.head, beta.head, self.Q) if is_permutation(beta.head, gamma.head) else 0j
            tracker.update(
                np.array([[W.gram.entries[row, column] - expected]]),
                row_label=str(beta),
                column_label=str(gamma),
            )
        outcome = residual_outcome(tracker, self.tol.exact, **self.window_parameters)
        outcome.metrics["pairs"] = pairs
        return outcome

    def check_cross_class(self) -> CheckOutcome:
        contrast = self.context.contrast
        entries = cross_gram(self.context.tail_basis(), self.context.tail_basis(contrast), self.Q)
        worst = float(np.max(np.abs(entries), initial=0.0))
        return CheckOutcome(
            passed=worst == 0.0,
            metrics={"max_modulus": worst, "shape": list(entries.shape)},
            parameters={**self.window_parameters, "contrast_ref": str(contrast)},
            tolerance=0.0,
        )

    def check_shift_mismatch(self) -> CheckOutcome:
        basis = self.context.tail_basis()
        pairs = shift_mismatched_pairs(basis)
        return CheckOutcome(
            passed=True,
            metrics={
                "pairs": len(pairs),
                "examples": [[str(basis.basis[a]), str(basis.basis[b])] for a, b in pairs[:8]],
            },
            parameters=self.window_parameters,
        )


class DualSuite(BaseSuite):
    """Dual isometries, the projections P_n and the vacuum test on both window kinds."""

    def get_suite_name(self) -> str:
        return "dual"

    def checks(self):
        checks = []
        for kind in ("fock", "tail"):
            checks += [
                (f"{kind}_biorthogonality", lambda kind=kind: self.check_biorthogonality(kind)),
                (f"{kind}_complement_projection", lambda kind=kind: self.check_complement(kind)),
                (f"{kind}_middle_factor", lambda kind=kind: self.check_middle_factor(kind)),
                (f"{kind}_principal_angle", lambda kind=kind: self.check_principal_angle(kind)),
                (f"{kind}_pn_projection", lambda kind=kind: self.check_pn_projection(kind)),
                (f"{kind}_vacuum", lambda kind=kind: self.check_vacuum(kind)),
            ]
            if self.Q.max_modulus() == 0:
                checks.append((f"{kind}_orthogonal_duals", lambda kind=kind: self.check_q_zero(kind)))
        checks += [
            ("tail_pn_fixes_reference", self.check_fixes_reference),
            ("tail_transitivity", self.check_transitivity),
            ("tail_decay_reference", lambda: self.check_decay("tail_decay_reference", self.context.ref)),
            ("tail_decay_cross_class", lambda: self.check_decay("tail_decay_cross_class", self.context.contrast)),
        ]
        return checks

    def window(self, kind: str) -> RepWindow:
        return self.context.fock_window() if kind == "fock" else self.context.tail_window()

    def parameters(self, kind: str) -> dict[str, Any]:
        return {"kind": kind, **{key: str(value) for key, value in self.window(kind).params.items()}}

    def check_biorthogonality(self, kind: str) -> CheckOutcome:
        system = self.context.dual_system(kind)
        tracker = ResidualTracker()
        for depth, duals in system.duals.items():
            sub = system.truncations[depth]
            for j, dual in duals.items():
                for k in sub.letters:
                    residual = biorthogonality_residual(dual, k, sub)
                    tracker.update(np.array([[residual]]), j=j, k=k, depth=depth)
        return residual_outcome(tracker, self.tol.inverted, **self.parameters(kind))

    def check_complement(self, kind: str) -> CheckOutcome:
        W = self.window(kind)
        system = self.context.dual_system(kind)
        R = metric_cholesky(W.gram)
        tracker = ResidualTracker()
        rank_mismatch = None
        for j, dual in system.duals[system.depth].items():
            complement = dual.complement
            others = [W.op_s[k][:, exact_columns(W, k)] for k in W.letters if k != j]
            for k, block in zip([k for k in W.letters if k != j], others):
                tracker.update(complement.matrix @ block - block, j=j, k=k, kind="containment")
            tracker.update(
                np.array([[complement.idempotence_residual(), complement.adjointness_residual()]]),
                j=j,
                kind="projection",
            )
            stacked_rank = int(np.linalg.matrix_rank(R @ np.hstack(others))) if others else 0
            if stacked_rank != complement.rank:
                rank_mismatch = {"letter": j, "rank": complement.rank, "stacked_rank": stacked_rank}
        outcome = residual_outcome(tracker, self.tol.inverted, **self.parameters(kind))
        if rank_mismatch is not None:
            outcome.passed = False
            outcome.witness = rank_mismatch
        return outcome

    def check_middle_factor(self, kind: str) -> CheckOutcome:
        system = self.context.dual_system(kind)
        smallest, worst_condition = np.inf, 0.0
        for duals in system.duals.values():
            for dual in duals.values():
                smallest = min(smallest, dual.middle.min_modulus)
                worst_condition = max(worst_condition, dual.middle.condition)
        return CheckOutcome(
            passed=bool(worst_condition <= system.max_condition),
            metrics={"min_modulus": float(smallest), "max_condition": float(worst_condition)},
            parameters=self.parameters(kind),
            tolerance=system.max_condition,
        )

    def check_principal_angle(self, kind: str) -> CheckOutcome:
        W = self.window(kind)
        angles = {j: principal_angle(j, W) for j in W.letters}
        smallest = min(angles.values())
        return CheckOutcome(
            passed=smallest > self.tol.exact,
            metrics={"min_angle": smallest, "angles": {str(j): a for j, a in angles.items()}},
            parameters=self.parameters(kind),
            tolerance=self.tol.exact,
        )

    def reference_prefix(self, W: RepWindow) -> FiniteWord:
        return self.context.ref.head(W.depth)

    def check_pn_projection(self, kind: str) -> CheckOutcome:
        """P_n is idempotent; it is Gram-self-adjoint only when all q vanish."""
        W = self.window(kind)
        system = self.context.dual_system(kind)
        interior = np.flatnonzero(W.interior)
        prefix = self.reference_prefix(W)
        idempotence, adjointness = ResidualTracker(), ResidualTracker()
        for n in range(1, W.depth + 1):
            P = pn_projection(prefix[:n], W, system)
            idempotence.update(np.array([[P.idempotence_residual(interior)]]), n=n)
            adjointness.update(np.array([[P.adjointness_residual(interior)]]), n=n)
        orthogonal_ranges = self.Q.max_modulus() == 0
        passed = idempotence.value <= self.tol.inverted and (
            not orthogonal_ranges or adjointness.value <= self.tol.inverted
        )
        return CheckOutcome(
            passed=passed,
            metrics={
                "idempotence_residual": idempotence.value,
                "self_adjointness_residual": adjointness.value,
                "self_adjointness_required": orthogonal_ranges,
            },
            parameters={**self.parameters(kind), "mu": str(prefix)},
            tolerance=self.tol.inverted,
            witness=None if passed else (idempotence.witness or adjointness.witness),
        )

    def check_vacuum(self, kind: str) -> CheckOutcome:
        W = self.window(kind)
        result = vacuum_test(W)
        if kind == "fock":
            passed = result.kernel_dim == 1 and result.kernel_support == (EMPTY_WORD,)
        else:
            passed = result.kernel_dim == 0 and result.min_singular > VACUUM_MIN_SINGULAR
        return CheckOutcome(
            passed=passed,
            metrics={
                "kernel_dim": result.kernel_dim,
                "min_singular": result.min_singular,
                "kernel_support": [str(label) for label in result.kernel_support],
            },
            parameters=self.parameters(kind),
        )

    def check_q_zero(self, kind: str) -> CheckOutcome:
        W = self.window(kind)
        system = self.context.dual_system(kind)
        tracker = ResidualTracker()
        for j, dual in system.duals[system.depth].items():
            tracker.update(dual.matrix - W.op_s[j][:, dual.domain], letter=j)
        return residual_outcome(tracker, self.tol.exact, **self.parameters(kind))

    def check_fixes_reference(self) -> CheckOutcome:
        W = self.context.tail_window()
        system = self.context.dual_system("tail")
        ref = self.context.ref
        vacuum_label = canonicalize((), 0, ref)
        e_ref = W.basis_vector(vacuum_label)
        tracker = ResidualTracker()
        for n in range(1, W.depth + 1):
            P = pn_projection(ref.head(n), W, system)
            tracker.update(np.array([[metric_norm(P.apply(e_ref) - e_ref, W.gram)]]), n=n)
        return residual_outcome(tracker, self.tol.inverted, **self.parameters("tail"))

    def check_transitivity(self) -> CheckOutcome:
        """s_mu T*_nu e_(nu x) = e_(mu x) for window labels sharing the tail x, |mu| <= |nu|."""
        W = self.context.tail_window()
        system = self.context.dual_system("tail")
        by_offset: dict[int, list] = {}
        for label in W.labels:
            by_offset.setdefault(label.offset, []).append(label)
        tracker = ResidualTracker()
        pairs = 0
        for labels in by_offset.values():
            for beta in labels:
                # T*_nu e_(nu x) = e_x, shared by every gamma below
                reduced = word_operator((), beta.head, W, system, operand=W.basis_vector(beta)[:, None])
                for gamma in labels:
                    if len(gamma.head) > len(beta.head):
                        continue
                    image = word_operator(gamma.head, (), W, operand=reduced)[:, 0]
                    residual = metric_norm(image - W.basis_vector(gamma), W.gram)
                    tracker.update(np.array([[residual]]), beta=str(beta), gamma=str(gamma))
                    pairs += 1
        outcome = residual_outcome(tracker, self.tol.inverted, **self.parameters("tail"))
        outcome.metrics["pairs"] = pairs
        return outcome

    def check_decay(self, name: str, mu: TailSpec) -> CheckOutcome:
        """||P_n(mu) e_beta|| must not grow with n and must vanish once the prefixes differ."""
        W = self.context.tail_window()
        system = self.context.dual_system("tail")
        rows = decay_table(mu, W, system)
        self.decay_tables.append(
            DecayTable(
                name=name,
                mu=str(mu),
                window=self.parameters("tail"),
                rows=[DecayEntry(label=str(row.label), n=row.n, norm=row.norm) for row in rows],
            )
        )
        K = W.depth
        mu_prefix = mu.head(K)
        by_label: dict[Any, list[float]] = {}
        for row in rows:
            by_label.setdefault(row.label, []).append(row.norm)

        growth, witness, undecided, final_max = 0.0, None, 0, 0.0
        for label, norms in by_label.items():
            if label.to_tailspec() == mu:
                continue
            steps = np.diff(norms)
            if steps.size and steps.max() > growth:
                growth = float(steps.max())
                if growth > self.tol.inverted:
                    witness = {"label": str(label), "norms": norms}
            if label.letters(K) == mu_prefix:
                undecided += 1
                continue
            final_max = max(final_max, norms[-1])
            if norms[-1] >= DECAY_THRESHOLD and witness is None:
                witness = {"label": str(label), "final_norm": norms[-1]}
        passed = witness is None
        return CheckOutcome(
            passed=passed,
            metrics={
                "max_growth": growth,
                "final_max": final_max,
                "undecided_labels": undecided,
                "depth": K,
            },
            parameters={**self.parameters("tail"), "mu": str(mu)},
            tolerance=DECAY_THRESHOLD,
            witness=witness,
        )


class NormalOrderSuite(BaseSuite):
    """The rewrite system against the closed-form reduction, plus termination and confluence."""

    def get_suite_name(self) -> str:
        return "normal_order"

    def checks(self):
        return [
            ("oracle_equivalence", self.check_oracle_equivalence),
            ("termination", self.check_termination),
            ("confluence", self.check_confluence),
            ("involution", self.check_involution),
        ]

    @property
    def sweep(self):
        return self.config.normal_order

    def _words(self, max_length: int) -> Iterable[FiniteWord]:
        for length in range(max_length + 1):
            yield from fock_basis(length, self.Q.d)

    def _random_word(self, rng: np.random.Generator, max_length: int) -> FiniteWord:
        length = int(rng.integers(0, max_length + 1))
        return FiniteWord(tuple(int(x) for x in rng.integers(1, self.Q.d + 1, size=length)))

    def _random_symbols(self) -> list[list[GeneratorSymbol]]:
        rng = np.random.default_rng(self.sweep.seed)
        words = []
        for _ in range(self.sweep.random_words):
            length = int(rng.integers(0, self.sweep.word_length + 1))
            letters = rng.integers(1, self.Q.d + 1, size=length)
            stars = rng.random(length) < 0.5
            words.append([GeneratorSymbol(int(a), bool(s)) for a, s in zip(letters, stars)])
        return words

    def check_oracle_equivalence(self) -> CheckOutcome:
        exhaustive = list(self._words(self.sweep.max_length))
        pairs = list(itertools.product(exhaustive, repeat=2))
        rng = np.random.default_rng(self.sweep.seed)
        pairs += [
            (self._random_word(rng, self.sweep.random_length), self._random_word(rng, self.sweep.random_length))
            for _ in range(self.sweep.random_pairs)
        ]
        mismatches, worst, witness = 0, 0.0, None
        for a, b in pairs:
            coeff, creators, annihilators = oracle_reduce(a, b, self.Q)
            expected, residual_b, residual_a = reduce_pair(a, b, self.Q)
            difference = abs(coeff - expected)
            worst = max(worst, difference)
            # a zero monomial carries no words
            agrees = difference <= self.tol.exact and (
                expected == 0
                or (
                    creators == residual_b == setminus(b, a)
                    and annihilators == residual_a == setminus(a, b)
                )
            )
            if not agrees:
                mismatches += 1
                witness = witness or {"a": str(a), "b": str(b)}
        return CheckOutcome(
            passed=mismatches == 0,
            metrics={"pairs": len(pairs), "mismatches": mismatches, "max_coeff_difference": worst},
            parameters={"d": self.Q.d, "max_length": self.sweep.max_length},
            tolerance=self.tol.exact,
            witness=witness,
        )

    def check_termination(self) -> CheckOutcome:
        engine = NormalOrderingEngine(self.Q)
        max_steps, witness = 0, None
        words = self._random_symbols()
        for word in words:
            trace: list[int] = []
            engine.reduce(word, trace)
            max_steps = max(max_steps, len(trace) - 1)
            decreasing = all(b < a for a, b in zip(trace, trace[1:])) and trace[-1] == 0
            if not decreasing and witness is None:
                witness = {"word": " ".join(map(str, word)), "trace": trace}
        return CheckOutcome(
            passed=witness is None,
            metrics={"words": len(words), "max_steps": max_steps},
            parameters={"word_length": self.sweep.word_length, "seed": self.sweep.seed},
            witness=witness,
        )

    def check_confluence(self) -> CheckOutcome:
        leftmost = NormalOrderingEngine(self.Q, "leftmost")
        rightmost = NormalOrderingEngine(self.Q, "rightmost")
        worst, witness = 0.0, None
        for word in self._random_symbols():
            first, second = leftmost.reduce(word), rightmost.reduce(word)
            difference = abs(first.coeff - second.coeff)
            worst = max(worst, difference)
            same_shape = first.creators == second.creators and first.annihilators == second.annihilators
            if (difference > self.tol.exact or not same_shape) and witness is None:
                witness = {"word": " ".join(map(str, word))}
        return CheckOutcome(
            passed=witness is None,
            metrics={"max_coeff_difference": worst},
            parameters={"strategies": ["leftmost", "rightmost"]},
            tolerance=self.tol.exact,
            witness=witness,
        )

    def check_involution(self) -> CheckOutcome:
        engine = NormalOrderingEngine(self.Q)
        worst, witness = 0.0, None
        for word in self._random_symbols():
            direct = engine.reduce(word).adjoint()
            mirrored = engine.reduce(adjoint_word(word))
            difference = abs(direct.coeff - mirrored.coeff)
            worst = max(worst, difference)
            same_shape = direct.creators == mirrored.creators and direct.annihilators == mirrored.annihilators
            if (difference > self.tol.exact or not same_shape) and witness is None:
                witness = {"word": " ".join(map(str, word))}
        return CheckOutcome(
            passed=witness is None,
            metrics={"max_coeff_difference": worst},
            tolerance=self.tol.exact,
            witness=witness,
        )


SUITES: dict[str, type[BaseSuite]] = {
    "fock-check": FockSuite,
    "tail-check": TailSuite,
    "dual-check": DualSuite,
    "normal-order": NormalOrderSuite,
}
