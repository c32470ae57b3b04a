"""Text grammar shared by the CLI and the config loader.

Finite words: decimal letters separated by whitespace or commas, ``e`` for the
empty word. Tails: ``u;v`` for u v v v ..., e.g. ``1;2`` or ``;1,2``.
Generator words: tokens ``j`` or ``j*``, whitespace separated.
"""

import re
from typing import Optional

from models.multiindex import FiniteWord, TailSpec
from utils.exceptions import ParseError

_LETTER_TOKEN = re.compile(r"[^\s,]+")
_GENERATOR_TOKEN = re.compile(r"\S+")
_GENERATOR_SHAPE = re.compile(r"(\d+)(\*?)")


def _letter(token: str, text: str, column: int, d: Optional[int]) -> int:
    if not token.isdigit():
        raise ParseError(f"expected a letter, got {token!r}", text, column)
    letter = int(token)
    if letter < 1 or (d is not None and letter > d):
        bound = f"1..{d}" if d is not None else "1.."
        raise ParseError(f"letter {letter} is outside the alphabet {bound}", text, column)
    return letter


def parse_finite_word(text: str, d: Optional[int] = None, offset: int = 0) -> FiniteWord:
    """Parse a finite word; ``offset`` shifts reported columns for embedded fields."""
    stripped = text.strip()
    if stripped in ("", "e"):
        return FiniteWord()
    letters = []
    for match in _LETTER_TOKEN.finditer(text):
        letters.append(_letter(match.group(), text, offset + match.start() + 1, d))
    return FiniteWord(tuple(letters))


def parse_tailspec(text: str, d: Optional[int] = None) -> TailSpec:
    """Parse ``u;v`` into a canonical TailSpec."""
    if text.count(";") != 1:
        raise ParseError("a tail needs exactly one ';' between preperiod and period", text, 1)
    head, period = text.split(";")
    u = parse_finite_word(head, d)
    v = parse_finite_word(period, d, offset=len(head) + 1)
    if not len(v):
        raise ParseError("the period of a tail must be nonempty", text, len(head) + 2)
    return TailSpec(u.letters, v.letters)


def parse_generator_word(text: str, d: int) -> list[tuple[int, bool]]:
    """Parse ``"1* 2 1 2*"`` into (letter, starred) pairs."""
    symbols = []
    for match in _GENERATOR_TOKEN.finditer(text):
        token = match.group()
        column = match.start() + 1
        shape = _GENERATOR_SHAPE.fullmatch(token)
        if shape is None:
            raise ParseError(f"expected 'j' or 'j*', got {token!r}", text, column)
        symbols.append((_letter(shape.group(1), text, column, d), bool(shape.group(2))))
    return symbols
