"""Finite windows: Gram matrices and truncated generator matrices on a labelled basis."""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Hashable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from utils.exceptions import DomainError, WindowError


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.asarray(array)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class GramMatrix:
    """entries[a][b] = <e_a, e_b>, linear in the first argument.

    ``blocks`` partitions the basis; entries between different blocks are exactly zero.
    """

    entries: np.ndarray
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        entries = np.asarray(self.entries, dtype=np.complex128)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise DomainError(f"a Gram matrix must be square, got shape {entries.shape}")
        object.__setattr__(self, "entries", _frozen(entries))

    @classmethod
    def from_entries(cls, entries: np.ndarray) -> "GramMatrix":
        """Derive the blocks from the sparsity pattern."""
        entries = np.asarray(entries, dtype=np.complex128)
        graph = csr_matrix(entries != 0)
        _, labels = connected_components(graph, directed=False)
        blocks: dict[int, list[int]] = {}
        for index, label in enumerate(labels):
            blocks.setdefault(int(label), []).append(index)
        return cls(entries, tuple(tuple(block) for block in blocks.values()))

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    @property
    def metric(self) -> np.ndarray:
        """M with <x, y> = y^H M x for coordinate vectors x, y."""
        return self.entries.T

    def inner(self, x: np.ndarray, y: np.ndarray) -> complex:
        return complex(np.conj(y) @ self.metric @ x)

    def norm(self, x: np.ndarray) -> float:
        return float(np.sqrt(max(self.inner(x, x).real, 0.0)))

    def submatrix(self, index: Sequence[int]) -> "GramMatrix":
        index = np.asarray(index, dtype=int)
        return GramMatrix.from_entries(self.entries[np.ix_(index, index)])

    def off_block_max(self) -> float:
        """Largest modulus outside the declared blocks; zero for a correct block structure."""
        mask = np.ones(self.entries.shape, dtype=bool)
        for block in self.blocks:
            index = np.asarray(block, dtype=int)
            mask[np.ix_(index, index)] = False
        outside = np.abs(self.entries[mask])
        return float(outside.max()) if outside.size else 0.0

    def hermitian_defect(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.conj().T), initial=0.0))


@dataclass(frozen=True, eq=False)
class RepWindow:
    """A finite piece of a representation space with truncated generator matrices.

    ``op_s[j]`` and ``op_sstar[j]`` are square in the window basis. A column is
    marked exact when the true image of that basis vector lies in the window
    (or is zero); escaped columns are zero and not exact.
    """

    kind: str
    labels: tuple[Hashable, ...]
    grades: np.ndarray
    gram: GramMatrix
    op_s: dict[int, np.ndarray]
    op_sstar: dict[int, np.ndarray]
    s_exact: dict[int, np.ndarray]
    sstar_exact: dict[int, np.ndarray]
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        size = len(self.labels)
        if self.gram.size != size:
            raise DomainError(f"Gram size {self.gram.size} does not match {size} labels")
        object.__setattr__(self, "grades", _frozen(np.asarray(self.grades, dtype=int)))

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def letters(self) -> list[int]:
        return sorted(self.op_s)

    @property
    def depth(self) -> int:
        return int(self.grades.max()) if self.size else 0

    @cached_property
    def index(self) -> dict[Hashable, int]:
        return {label: position for position, label in enumerate(self.labels)}

    @cached_property
    def interior(self) -> np.ndarray:
        """Columns on which every truncated generator is exact."""
        mask = np.ones(self.size, dtype=bool)
        for j in self.letters:
            mask &= self.s_exact[j] & self.sstar_exact[j]
        return mask

    def locate(self, label: Hashable) -> int:
        try:
            return self.index[label]
        except KeyError:
            raise WindowError(f"{label} is not in the window", kind=self.kind, **self.params) from None

    def basis_vector(self, label: Hashable) -> np.ndarray:
        vector = np.zeros(self.size, dtype=np.complex128)
        vector[self.locate(label)] = 1
        return vector

    def restrict(self, mask: np.ndarray, **params: Any) -> "RepWindow":
        """Sub-window on the labels selected by ``mask``; exactness is recomputed."""
        mask = np.asarray(mask, dtype=bool)
        keep = np.flatnonzero(mask)
        if keep.size == 0:
            raise WindowError("restriction leaves an empty window", kind=self.kind, **self.params)

        def narrow(matrices, exact):
            narrowed, narrowed_exact = {}, {}
            for j, matrix in matrices.items():
                escapes = np.any(matrix[~mask][:, keep] != 0, axis=0)
                narrowed[j] = matrix[np.ix_(keep, keep)]
                narrowed_exact[j] = exact[j][keep] & ~escapes
            return narrowed, narrowed_exact

        op_s, s_exact = narrow(self.op_s, self.s_exact)
        op_sstar, sstar_exact = narrow(self.op_sstar, self.sstar_exact)
        return RepWindow(
            kind=self.kind,
            labels=tuple(self.labels[i] for i in keep),
            grades=self.grades[keep],
            gram=self.gram.submatrix(keep),
            op_s=op_s,
            op_sstar=op_sstar,
            s_exact=s_exact,
            sstar_exact=sstar_exact,
            params={**self.params, **params},
        )

    def truncate(self, depth: int) -> "RepWindow":
        """W_k: the labels of grade at most ``depth``."""
        return self.restrict(self.grades <= depth, max_grade=depth)
