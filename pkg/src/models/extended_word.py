"""Labels of the spanning vectors e_beta of the tail spaces H_alpha."""

from dataclasses import dataclass
from typing import Iterable, Optional

from models.multiindex import FiniteWord, QMatrix, TailSpec, q_scalar
from utils.exceptions import DomainError


@dataclass(frozen=True, slots=True)
class ExtendedWord:
    """head . sigma^offset(ref)."""

    head: FiniteWord
    offset: int
    ref: TailSpec

    def __post_init__(self) -> None:
        if self.offset < 0:
            raise DomainError(f"offset must be non-negative, got {self.offset}")
        if not isinstance(self.head, FiniteWord):
            object.__setattr__(self, "head", FiniteWord(tuple(self.head)))

    def to_tailspec(self) -> TailSpec:
        tail = self.ref.shift(self.offset)
        return TailSpec(self.head.letters + tail.u, tail.v)

    def letters(self, k: int) -> FiniteWord:
        """The first k letters of the denoted sequence."""
        return self.to_tailspec().head(k)

    def is_canonical(self) -> bool:
        return canonicalize(self.head, self.offset, self.ref) == self

    def prepend(self, j: int) -> "ExtendedWord":
        return canonicalize((j,) + self.head.letters, self.offset, self.ref)

    def __str__(self) -> str:
        head = " ".join(map(str, self.head)) if len(self.head) else "e"
        return f"[{head} | +{self.offset}]"


def canonicalize(head: Iterable[int], offset: int, ref: TailSpec) -> ExtendedWord:
    """Shortest head and smallest offset denoting the same infinite sequence."""
    if offset < 0:
        raise DomainError(f"offset must be non-negative, got {offset}")
    m = ref.normalize_offset(offset)
    letters = list(head)
    while letters:
        last = letters[-1]
        if m >= 1 and ref.letter(m) == last:
            m -= 1
        elif m == ref.preperiod and ref.v[-1] == last:
            # wrap around the period: the letter before sigma^|u| is also the last of v
            m = ref.preperiod + ref.period - 1
        else:
            break
        letters.pop()
    return ExtendedWord(FiniteWord(tuple(letters)), m, ref)


def sstar_image(
    j: int, word: ExtendedWord, Q: QMatrix
) -> Optional[tuple[ExtendedWord, complex]]:
    """Delete the first j of the sequence; the factor is q over the letters before it.

    Returns None when the sequence never contains j.
    """
    Q.check_letter(j)
    letters = word.head.letters
    if j in letters:
        position = letters.index(j)
        factor = q_scalar(j, FiniteWord(letters[:position]), Q)
        residual = letters[:position] + letters[position + 1 :]
        return canonicalize(residual, word.offset, word.ref), factor

    tail = word.ref.shift(word.offset)
    position = tail.first_occurrence(j)
    if position is None:
        return None
    passed = tail.head(position - 1)
    factor = q_scalar(j, word.head + passed, Q)
    return canonicalize(letters + passed.letters, word.offset + position, word.ref), factor
