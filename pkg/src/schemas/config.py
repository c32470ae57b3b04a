"""Run configuration schema."""

import json
from pathlib import Path
from typing import Annotated, Any, List, Literal, Optional

from pydantic import (
    BaseModel,
    BeforeValidator,
    ConfigDict,
    Field,
    PlainSerializer,
    ValidationError,
    field_validator,
    model_validator,
)

from models.multiindex import QMatrix, TailSpec, random_q, tails_equivalent
from utils.exceptions import ConfigError, DomainError
from utils.parsing import parse_tailspec

RunMode = Literal["fock-check", "tail-check", "dual-check", "normal-order", "all"]
SUITE_MODES: tuple[str, ...] = ("fock-check", "tail-check", "dual-check", "normal-order")


def _parse_complex(value: Any) -> Any:
    """Accept numbers, "a+bj" strings and [re, im] pairs."""
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValueError(f"complex pairs must be [re, im], got {value!r}")
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, str):
        try:
            return complex(value.replace(" ", ""))
        except ValueError:
            raise ValueError(f"cannot read {value!r} as a complex number") from None
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    return value


ComplexValue = Annotated[
    complex,
    BeforeValidator(_parse_complex),
    PlainSerializer(lambda z: [z.real, z.imag], return_type=list),
]


class RandomQSpec(BaseModel):
    """Seeded random deformation matrix."""

    model_config = ConfigDict(extra="forbid")

    max_modulus: float = Field(default=0.5, ge=0.0, lt=1.0, description="Upper bound for |q_ij|")
    seed: int = Field(default=0, description="Seed for numpy's default_rng")


class TailConfig(BaseModel):
    """Window over the tail representation space of ``ref``."""

    model_config = ConfigDict(extra="forbid")

    ref: str = Field(default=";2", description="Reference tail as 'u;v'")
    L: int = Field(default=4, ge=0, description="Maximum head length")
    M: int = Field(default=4, ge=0, description="Maximum offset")
    contrast_ref: Optional[str] = Field(
        default=None, description="Inequivalent tail for cross-class checks; picked when absent"
    )

    @field_validator("ref", "contrast_ref")
    @classmethod
    def validate_tail_text(cls, v):
        if v is not None:
            try:
                parse_tailspec(v)
            except DomainError as e:
                raise ValueError(str(e)) from e
        return v

    def ref_tail(self) -> TailSpec:
        return parse_tailspec(self.ref)


class Tolerances(BaseModel):
    model_config = ConfigDict(extra="forbid")

    exact: float = Field(default=1e-12, gt=0, description="Identities built without inversion")
    metric: float = Field(default=1e-10, gt=0, description="Identities through Gram inversion")
    inverted: float = Field(default=1e-8, gt=0, description="Identities through dual isometries")


class NormalOrderConfig(BaseModel):
    """Sizes of the rewrite-system sweeps."""

    model_config = ConfigDict(extra="forbid")

    max_length: int = Field(default=4, ge=0, description="Exhaustive sweep bound on |a|, |b|")
    random_pairs: int = Field(default=200, ge=0, description="Extra random pairs")
    random_length: int = Field(default=5, ge=0, description="Length bound for random pairs")
    random_words: int = Field(default=1000, ge=0, description="Random words for termination")
    word_length: int = Field(default=12, ge=0, description="Length bound for random words")
    seed: int = Field(default=0, description="Seed for the random sweeps")


class RunConfig(BaseModel):
    """Everything a verification run depends on."""

    model_config = ConfigDict(extra="forbid")

    d: int = Field(default=2, ge=2, description="Number of generators")
    q_entries: Optional[List[List[Optional[ComplexValue]]]] = Field(
        default=None, description="Explicit q matrix; diagonal entries are ignored"
    )
    random_q: RandomQSpec = Field(default_factory=RandomQSpec)
    mode: RunMode = Field(default="all", description="Suite selection")
    fock_depth: int = Field(default=4, ge=1, description="Fock window depth N")
    j_depth: int = Field(default=5, ge=0, description="Largest k for the J_k isometry check")
    tail: TailConfig = Field(default_factory=TailConfig)
    normal_order: NormalOrderConfig = Field(default_factory=NormalOrderConfig)
    tolerances: Tolerances = Field(default_factory=Tolerances)
    output: Optional[str] = Field(default=None, description="Report path")
    parallel: bool = Field(default=False, description="Run suites and blocks in a thread pool")

    @model_validator(mode="after")
    def validate_q_entries(self):
        if self.q_entries is None:
            return self
        if len(self.q_entries) != self.d or any(len(row) != self.d for row in self.q_entries):
            raise ValueError(f"q_entries must be a {self.d}x{self.d} matrix")
        for i in range(self.d):
            for j in range(i + 1, self.d):
                upper, lower = self.q_entries[i][j], self.q_entries[j][i]
                if upper is None or lower is None:
                    raise ValueError(f"q_entries pair ({i + 1}, {j + 1}) is missing")
                if upper != lower.conjugate():
                    raise ValueError(
                        f"q_entries pair ({i + 1}, {j + 1}) is not Hermitian: "
                        f"{upper} vs conj({lower})"
                    )
                if abs(upper) >= 1:
                    raise ValueError(f"q_entries pair ({i + 1}, {j + 1}) has modulus {abs(upper)} >= 1")
        return self

    @model_validator(mode="after")
    def validate_tails(self):
        ref = self.tail.ref_tail()
        for letter in ref.u + ref.v:
            if letter > self.d:
                raise ValueError(f"tail.ref uses letter {letter} outside 1..{self.d}")
        if self.tail.contrast_ref is not None:
            contrast = parse_tailspec(self.tail.contrast_ref)
            if any(letter > self.d for letter in contrast.u + contrast.v):
                raise ValueError(f"tail.contrast_ref uses a letter outside 1..{self.d}")
            if tails_equivalent(ref, contrast):
                raise ValueError("tail.contrast_ref must not be tail-equivalent to tail.ref")
        return self

    def q_matrix(self) -> QMatrix:
        if self.q_entries is not None:
            return QMatrix.from_array(self.q_entries)
        return random_q(self.d, self.random_q.max_modulus, self.random_q.seed)

    def contrast_tail(self) -> TailSpec:
        """The configured contrast ref, or the first constant tail c^inf inequivalent to ref."""
        if self.tail.contrast_ref is not None:
            return parse_tailspec(self.tail.contrast_ref)
        ref = self.tail.ref_tail()
        for letter in range(1, self.d + 1):
            candidate = TailSpec((), (letter,))
            if not tails_equivalent(ref, candidate):
                return candidate
        raise ConfigError("no constant tail is inequivalent to tail.ref", field="tail.contrast_ref")


def load_run_config(path: Optional[str] = None, **overrides: Any) -> RunConfig:
    """Read a JSON config (when given) and apply non-None overrides on top."""
    data: dict[str, Any] = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {path}: {e}", field="config") from e
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must hold a JSON object", field="config")
    for key, value in overrides.items():
        if value is None:
            continue
        section, _, name = key.partition(".")
        if name:
            data.setdefault(section, {})[name] = value
        else:
            data[key] = value
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        error = e.errors()[0]
        field = ".".join(str(part) for part in error["loc"]) or None
        raise ConfigError(f"invalid config: {error['msg']}", field=field) from e
    except DomainError as e:
        raise ConfigError(f"invalid config: {e}") from e
