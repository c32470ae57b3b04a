"""Generator symbols and normal-ordered monomials."""

from dataclasses import dataclass

from models.multiindex import EMPTY_WORD, FiniteWord


@dataclass(frozen=True, slots=True)
class GeneratorSymbol:
    """s_j, or s_j^* when ``starred``."""

    letter: int
    starred: bool = False

    def adjoint(self) -> "GeneratorSymbol":
        return GeneratorSymbol(self.letter, not self.starred)

    def __str__(self) -> str:
        return f"s_{self.letter}*" if self.starred else f"s_{self.letter}"


def format_coefficient(coeff: complex) -> str:
    """15 significant digits; complex values as (a+bj)."""
    coeff = complex(coeff)
    if coeff.imag == 0:
        return format(coeff.real + 0.0, ".15g")
    return f"({coeff.real:.15g}{coeff.imag:+.15g}j)"


@dataclass(frozen=True, slots=True)
class Monomial:
    """coeff * s_mu s_nu^*, with a single canonical zero."""

    coeff: complex
    creators: FiniteWord = EMPTY_WORD
    annihilators: FiniteWord = EMPTY_WORD

    def __post_init__(self) -> None:
        object.__setattr__(self, "coeff", complex(self.coeff))
        if self.coeff == 0:
            object.__setattr__(self, "creators", EMPTY_WORD)
            object.__setattr__(self, "annihilators", EMPTY_WORD)

    @classmethod
    def zero(cls) -> "Monomial":
        return cls(0j)

    @property
    def is_zero(self) -> bool:
        return self.coeff == 0

    def adjoint(self) -> "Monomial":
        return Monomial(self.coeff.conjugate(), self.annihilators, self.creators)

    def symbols(self) -> tuple[GeneratorSymbol, ...]:
        """The word s_mu_1 ... s_mu_m s_nu_k^* ... s_nu_1^*."""
        creators = tuple(GeneratorSymbol(letter) for letter in self.creators)
        annihilators = tuple(
            GeneratorSymbol(letter, starred=True) for letter in reversed(self.annihilators.letters)
        )
        return creators + annihilators

    def format(self) -> str:
        body = " ".join(str(symbol) for symbol in self.symbols()) or "I"
        return f"{format_coefficient(self.coeff)} * {body}"

    def __str__(self) -> str:
        return self.format()
