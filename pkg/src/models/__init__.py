from .extended_word import ExtendedWord, canonicalize, sstar_image
from .multiindex import (
    EMPTY_WORD,
    FiniteWord,
    QMatrix,
    SequenceLike,
    TailSpec,
    align_shift,
    format_tailspec,
    format_word,
    is_permutation,
    prepend,
    q_finite,
    q_infinite,
    q_scalar,
    random_q,
    reduce_pair,
    remove_first,
    setminus,
    sigma,
    tails_equivalent,
)
from .window import GramMatrix, RepWindow

__all__ = [
    "EMPTY_WORD",
    "FiniteWord",
    "QMatrix",
    "SequenceLike",
    "TailSpec",
    "ExtendedWord",
    "GramMatrix",
    "RepWindow",
    "align_shift",
    "canonicalize",
    "format_tailspec",
    "format_word",
    "is_permutation",
    "prepend",
    "q_finite",
    "q_infinite",
    "q_scalar",
    "random_q",
    "reduce_pair",
    "remove_first",
    "setminus",
    "sigma",
    "sstar_image",
    "tails_equivalent",
]
