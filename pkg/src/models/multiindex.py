"""Finite and eventually periodic multiindices and the q-scalars they carry.

A finite multiindex is a :class:`FiniteWord`; an infinite one is restricted to
eventually periodic sequences ``u v v v ...`` held in canonical form by
:class:`TailSpec`. For a canonical ``TailSpec`` the shifts satisfy
``sigma^a == sigma^b`` iff ``a == b`` or both are at least ``|u|`` and agree
modulo ``|v|``; alignment and canonical offsets below rely on that.
"""

from __future__ import annotations

import cmath
import math
from collections import Counter
from dataclasses import dataclass, field
from functools import singledispatch
from typing import Iterable, Iterator, Optional, Protocol, Sequence, Union

import numpy as np

from utils.exceptions import DomainError


@dataclass(frozen=True, slots=True)
class QMatrix:
    """Deformation coefficients q_ij of the relations s_i^* s_j = q_ij s_j s_i^*."""

    d: int
    entries: tuple[tuple[complex, ...], ...]

    def __post_init__(self) -> None:
        if self.d < 2:
            raise DomainError(f"QMatrix needs d >= 2 generators, got d={self.d}")
        if len(self.entries) != self.d or any(len(row) != self.d for row in self.entries):
            raise DomainError(f"QMatrix entries must be {self.d}x{self.d}")
        for i in range(self.d):
            for j in range(self.d):
                if i == j:
                    continue
                value = complex(self.entries[i][j])
                if value != complex(self.entries[j][i]).conjugate():
                    raise DomainError(
                        f"q_{i + 1}{j + 1} = {value} is not the conjugate of "
                        f"q_{j + 1}{i + 1} = {self.entries[j][i]}"
                    )
                if abs(value) >= 1:
                    raise DomainError(f"|q_{i + 1}{j + 1}| = {abs(value)} is not below 1")

    @classmethod
    def from_array(cls, array: Sequence[Sequence[Optional[complex]]]) -> "QMatrix":
        """Build from a square array; diagonal entries (possibly None) are ignored."""
        d = len(array)
        entries = tuple(
            tuple(0j if i == j or array[i][j] is None else complex(array[i][j]) for j in range(d))
            for i in range(d)
        )
        return cls(d=d, entries=entries)

    @classmethod
    def from_pairs(cls, d: int, pairs: dict[tuple[int, int], complex]) -> "QMatrix":
        """Build from upper pairs {(i, j): q_ij}; the lower triangle is mirrored.

        Pairs not listed are zero.
        """
        array = [[0j] * d for _ in range(d)]
        for (i, j), value in pairs.items():
            if i == j:
                raise DomainError(f"diagonal pair ({i}, {j}) is not a deformation coefficient")
            array[i - 1][j - 1] = complex(value)
            array[j - 1][i - 1] = complex(value).conjugate()
        return cls.from_array(array)

    @classmethod
    def zero(cls, d: int) -> "QMatrix":
        """The Cuntz-Toeplitz case q = 0."""
        return cls.from_pairs(d, {})

    def q(self, i: int, j: int) -> complex:
        """Return q_ij for 1-based letters i != j."""
        if i == j:
            raise DomainError(f"q_{i}{i} is undefined; diagonal entries are never read")
        self.check_letter(i)
        self.check_letter(j)
        return self.entries[i - 1][j - 1]

    def check_letter(self, j: int) -> None:
        if not 1 <= j <= self.d:
            raise DomainError(f"letter {j} is outside the alphabet 1..{self.d}")

    def max_modulus(self) -> float:
        return max(
            (abs(self.entries[i][j]) for i in range(self.d) for j in range(self.d) if i != j),
            default=0.0,
        )

    def to_array(self) -> np.ndarray:
        return np.array(self.entries, dtype=np.complex128)


def random_q(d: int, max_modulus: float, seed: Optional[int] = None) -> QMatrix:
    """Draw a Hermitian q-matrix with moduli uniform in [0, max_modulus] and uniform phases."""
    if not 0 <= max_modulus < 1:
        raise DomainError(f"max_modulus must lie in [0, 1), got {max_modulus}")
    rng = np.random.default_rng(seed)
    pairs = {}
    for i in range(1, d + 1):
        for j in range(i + 1, d + 1):
            modulus = rng.uniform(0.0, max_modulus)
            phase = rng.uniform(0.0, 2 * math.pi)
            pairs[(i, j)] = cmath.rect(modulus, phase)
    return QMatrix.from_pairs(d, pairs)


@dataclass(frozen=True, slots=True)
class FiniteWord:
    """A finite multiindex (alpha_1, ..., alpha_m); the empty word stands for s_e = I."""

    letters: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        letters = tuple(int(letter) for letter in self.letters)
        if any(letter < 1 for letter in letters):
            raise DomainError(f"letters must be positive integers, got {letters}")
        object.__setattr__(self, "letters", letters)

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[int]:
        return iter(self.letters)

    def __getitem__(self, key: Union[int, slice]) -> Union[int, "FiniteWord"]:
        if isinstance(key, slice):
            return FiniteWord(self.letters[key])
        return self.letters[key]

    def __add__(self, other: "FiniteWord") -> "FiniteWord":
        return FiniteWord(self.letters + tuple(other))

    def __lt__(self, other: "FiniteWord") -> bool:
        return self.letters < other.letters

    def __str__(self) -> str:
        return format_word(self)

    def contains(self, j: int) -> bool:
        return j in self.letters

    def letter_counts(self) -> tuple[int, ...]:
        """Multiset signature: sorted letters, equal exactly for permutations."""
        return tuple(sorted(self.letters))

    def check_alphabet(self, d: int) -> None:
        for letter in self.letters:
            if letter > d:
                raise DomainError(f"letter {letter} is outside the alphabet 1..{d}")


EMPTY_WORD = FiniteWord()


def format_word(word: FiniteWord) -> str:
    return " ".join(str(letter) for letter in word) if len(word) else "e"


def _primitive_root(period: tuple[int, ...]) -> tuple[int, ...]:
    size = len(period)
    for p in range(1, size + 1):
        if size % p == 0 and period[:p] * (size // p) == period:
            return period[:p]
    return period


@dataclass(frozen=True, slots=True)
class TailSpec:
    """Eventually periodic infinite multiindex u . v . v . v ...

    Construction always canonicalizes: v is primitive and the last letter of u
    differs from the last letter of v, so equal sequences have equal fields.
    """

    u: tuple[int, ...]
    v: tuple[int, ...]
    _period: int = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        u = tuple(int(letter) for letter in self.u)
        v = tuple(int(letter) for letter in self.v)
        if not v:
            raise DomainError("the period of a TailSpec must be nonempty")
        if any(letter < 1 for letter in u + v):
            raise DomainError(f"letters must be positive integers, got u={u}, v={v}")
        v = _primitive_root(v)
        while u and u[-1] == v[-1]:
            u = u[:-1]
            v = (v[-1],) + v[:-1]
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "_period", len(v))

    @classmethod
    def from_parts(cls, u: Iterable[int], v: Iterable[int]) -> "TailSpec":
        return cls(tuple(u), tuple(v))

    @property
    def preperiod(self) -> int:
        return len(self.u)

    @property
    def period(self) -> int:
        return self._period

    def canonical(self) -> "TailSpec":
        return TailSpec(self.u, self.v)

    def to_tailspec(self) -> "TailSpec":
        return self

    def letter(self, k: int) -> int:
        """The k-th letter, 1-based."""
        if k < 1:
            raise DomainError(f"letter positions are 1-based, got {k}")
        if k <= len(self.u):
            return self.u[k - 1]
        return self.v[(k - len(self.u) - 1) % self._period]

    def head(self, n: int) -> FiniteWord:
        return FiniteWord(tuple(self.letter(k) for k in range(1, n + 1)))

    def normalize_offset(self, m: int) -> int:
        """Smallest shift with the same suffix as sigma^m."""
        if m < len(self.u):
            return m
        return len(self.u) + (m - len(self.u)) % self._period

    def shift(self, m: int) -> "TailSpec":
        """sigma^m of this sequence."""
        if m < 0:
            raise DomainError(f"shift must be non-negative, got {m}")
        if m <= len(self.u):
            return TailSpec(self.u[m:], self.v)
        r = (m - len(self.u)) % self._period
        return TailSpec((), self.v[r:] + self.v[:r])

    def first_occurrence(self, j: int) -> Optional[int]:
        """1-based position of the first j; scanning u and one period decides absence."""
        for k in range(1, len(self.u) + self._period + 1):
            if self.letter(k) == j:
                return k
        return None

    def check_alphabet(self, d: int) -> None:
        for letter in self.u + self.v:
            if letter > d:
                raise DomainError(f"letter {letter} is outside the alphabet 1..{d}")

    def __str__(self) -> str:
        return format_tailspec(self)


def format_tailspec(tail: TailSpec) -> str:
    return ",".join(map(str, tail.u)) + ";" + ",".join(map(str, tail.v))


class SequenceLike(Protocol):
    """Anything denoting an eventually periodic infinite multiindex."""

    def to_tailspec(self) -> TailSpec: ...


@singledispatch
def sigma(word):
    """Drop the first letter."""
    raise DomainError(f"sigma is not defined for {type(word).__name__}")


@sigma.register
def _(word: FiniteWord) -> FiniteWord:
    if not len(word):
        raise DomainError("sigma of the empty word is undefined")
    return word[1:]


@sigma.register
def _(word: TailSpec) -> TailSpec:
    return word.shift(1)


def prepend(j: int, word: Union[FiniteWord, TailSpec], d: Optional[int] = None):
    """Put the letter j in front of the word (the action of s_j on labels)."""
    if j < 1 or (d is not None and j > d):
        raise DomainError(f"letter {j} is outside the alphabet 1..{d}")
    if isinstance(word, FiniteWord):
        return FiniteWord((j,) + word.letters)
    if isinstance(word, TailSpec):
        return TailSpec((j,) + word.u, word.v)
    raise DomainError(f"prepend is not defined for {type(word).__name__}")


def is_permutation(a: FiniteWord, b: FiniteWord) -> bool:
    return Counter(a.letters) == Counter(b.letters)


def q_scalar(j: int, word: FiniteWord, Q: QMatrix) -> complex:
    """q(j, w) = q_{j w_1} ... q_{j w_m}; w must not contain j."""
    return math.prod((Q.q(j, letter) for letter in word), start=1 + 0j)


def remove_first(
    word: FiniteWord, j: int, Q: QMatrix
) -> Optional[tuple[FiniteWord, complex]]:
    """Delete the first j; the factor is the q-product over the letters before it."""
    Q.check_letter(j)
    try:
        position = word.letters.index(j)
    except ValueError:
        return None
    residual = FiniteWord(word.letters[:position] + word.letters[position + 1 :])
    return residual, q_scalar(j, word[:position], Q)


def setminus(a: FiniteWord, b: FiniteWord) -> FiniteWord:
    """a minus b: remove the first occurrence of each letter of b in turn, skipping absent ones."""
    residual = list(a.letters)
    for letter in b:
        if letter in residual:
            residual.remove(letter)
    return FiniteWord(tuple(residual))


def reduce_pair(
    a: FiniteWord, b: FiniteWord, Q: QMatrix
) -> tuple[complex, FiniteWord, FiniteWord]:
    """s_a^* s_b = coeff s_{b minus a} s^*_{a minus b}; returns (coeff, b minus a, a minus b)."""
    coeff = 1 + 0j
    residual = b
    unmatched: list[int] = []
    # s_a^* = s_{a_m}^* ... s_{a_1}^*, so a_1 meets s_b first
    for letter in a:
        hit = remove_first(residual, letter, Q)
        if hit is None:
            coeff *= q_scalar(letter, residual, Q)
            unmatched.append(letter)
        else:
            residual, factor = hit
            coeff *= factor
    return coeff, residual, FiniteWord(tuple(unmatched))


def q_finite(a: FiniteWord, b: FiniteWord, Q: QMatrix) -> complex:
    """The scalar q(a, b) of s_a^* s_b = q(a, b) s_{b minus a} s^*_{a minus b}."""
    return reduce_pair(a, b, Q)[0]


def tails_equivalent(a: TailSpec, b: TailSpec) -> bool:
    """True iff sigma^m(a) == sigma^n(b) for some m, n."""
    if a.period != b.period:
        return False
    doubled = b.v + b.v
    return any(doubled[r : r + a.period] == a.v for r in range(b.period))


def align_shift(a: SequenceLike, b: SequenceLike) -> Optional[int]:
    """Least m with sigma^m(a) == sigma^m(b), or None when no equal-shift alignment exists."""
    a, b = a.to_tailspec(), b.to_tailspec()
    bound = max(a.preperiod, b.preperiod)
    if a.shift(bound) != b.shift(bound):
        return None
    # alignment is inherited by larger shifts, so the first hit is the least one
    return next(m for m in range(bound + 1) if a.shift(m) == b.shift(m))


def q_infinite(a: SequenceLike, b: SequenceLike, Q: QMatrix) -> complex:
    """lim q(a[:m], b[:m]); zero unless the sequences align with permuted heads."""
    a, b = a.to_tailspec(), b.to_tailspec()
    m = align_shift(a, b)
    if m is None:
        return 0j
    head_a, head_b = a.head(m), b.head(m)
    if not is_permutation(head_a, head_b):
        return 0j
    return q_finite(head_a, head_b, Q)
