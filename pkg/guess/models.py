"""Data models for guesser output, alignments, error masks and mutations."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from asm.models import Program
from asm.tokens import Token
from blockfinder.models import SubseqSpan
from core.errors import ConfigError

NORMS = ("frobenius", "sum", "max")

MUTATION_KINDS = (
    "replace-immediate",
    "replace-register",
    "drop-global-definition",
    "rename-label",
    "swap-mnemonic-within-class",
)


@dataclass(frozen=True, eq=False)
class GuessTuple:
    """One candidate translation as the guesser produced it.

    tokens are the producer's own text-preserving tokens; their concatenation is
    the candidate program text. attention has one row per token and one column per
    source token (source_tokens when the producer supplies its table, otherwise
    the operand-level tokens of the input program).
    """
    input_id: str
    rank: int
    tokens: Tuple[str, ...]
    probs: np.ndarray
    attention: np.ndarray
    source_tokens: Optional[Tuple[str, ...]] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def text(self) -> str:
        return "".join(self.tokens)

    @property
    def truncated(self) -> bool:
        return bool(self.metadata.get("truncated", False))


@dataclass(frozen=True, eq=False)
class Candidate:
    """A guess projected onto the operand-level tokens of its parsed program.

    program is None when the candidate text does not parse; parse_error says why.
    attention is |tokens| x |source tokens| with stochastic rows.
    """
    guess: GuessTuple
    program: Optional[Program]
    tokens: Tuple[Token, ...] = ()
    probs: np.ndarray = field(default_factory=lambda: np.zeros(0))
    attention: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    parse_error: str = ""

    @property
    def rank(self) -> int:
        return self.guess.rank


@dataclass(frozen=True)
class Alignment:
    """For each output span, the index of its aligned input span and the score."""
    output_spans: Tuple[SubseqSpan, ...]
    input_spans: Tuple[SubseqSpan, ...]
    mapping: Tuple[int, ...]
    scores: Tuple[float, ...]

    def aligned(self, j: int) -> SubseqSpan:
        return self.input_spans[self.mapping[j]]

    def aligned_to(self, span: SubseqSpan) -> SubseqSpan:
        return self.aligned(self.output_spans.index(span))

    def span_of_token(self, token: int) -> Optional[int]:
        for j, span in enumerate(self.output_spans):
            if span.contains_token(token):
                return j
        return None


class ErrorFlag(str, Enum):
    NONE = "none"
    LOW_CONFIDENCE = "low-confidence"
    OUT_OF_SCOPE = "out-of-scope-ref"


@dataclass(frozen=True)
class ErrorMask:
    flags: Tuple[ErrorFlag, ...]

    def __len__(self) -> int:
        return len(self.flags)

    def flagged(self) -> List[int]:
        return [i for i, f in enumerate(self.flags) if f is not ErrorFlag.NONE]

    def within(self, span: SubseqSpan) -> Dict[int, ErrorFlag]:
        """Flags of the span's tokens, keyed by token index."""
        return {i: self.flags[i] for i in span.token_range
                if i < len(self.flags) and self.flags[i] is not ErrorFlag.NONE}

    def kinds(self, span: SubseqSpan) -> Tuple[ErrorFlag, ...]:
        return tuple(sorted(set(self.within(span).values()), key=lambda f: f.value))

    @property
    def any(self) -> bool:
        return any(f is not ErrorFlag.NONE for f in self.flags)


@dataclass(frozen=True)
class Mutation:
    """One corruption site: a kind and an optional target label."""
    kind: str
    target: Optional[str] = None

    def __post_init__(self) -> None:
        if self.kind not in MUTATION_KINDS:
            raise ConfigError(f"unknown mutation kind {self.kind!r}; expected one of {MUTATION_KINDS}")


@dataclass(frozen=True)
class MutationSpec:
    """Mutations mock_guess applies to the ground truth.

    same_block places every immediate/register/mnemonic mutation inside one pure
    block; solvable_only restricts them to blocks the sketch solver can handle.
    """
    mutations: Tuple[Mutation, ...] = ()
    same_block: bool = False
    solvable_only: bool = True

    @classmethod
    def parse(cls, text: str, same_block: bool = False) -> "MutationSpec":
        """From "kind[=target][*count],..." e.g. "replace-immediate*2,drop-global-definition=.LC0"."""
        mutations: List[Mutation] = []
        for item in (p.strip() for p in (text or "").split(",")):
            if not item:
                continue
            count = 1
            if "*" in item:
                item, _, n = item.partition("*")
                try:
                    count = int(n)
                except ValueError as e:
                    raise ConfigError(f"bad mutation count in {item!r}*{n!r}") from e
            kind, _, target = item.partition("=")
            mutations.extend(Mutation(kind.strip(), target.strip() or None) for _ in range(count))
        return cls(tuple(mutations), same_block)

    @classmethod
    def of(cls, *kinds: str, same_block: bool = False) -> "MutationSpec":
        return cls(tuple(Mutation(k) for k in kinds), same_block)

    def to_list(self) -> List[Dict[str, Optional[str]]]:
        return [{"kind": m.kind, "target": m.target} for m in self.mutations]


def check_norm(norm: str) -> str:
    if norm not in NORMS:
        raise ConfigError(f"norm must be one of {NORMS}, got {norm!r}")
    return norm


def stochastic_rows(matrix: np.ndarray) -> np.ndarray:
    """Renormalise rows to sum to 1; all-zero rows become uniform."""
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.size == 0:
        return matrix
    sums = matrix.sum(axis=1, keepdims=True)
    uniform = np.full_like(matrix, 1.0 / matrix.shape[1])
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(sums > 0, matrix / np.where(sums > 0, sums, 1.0), uniform)


def token_strings(tokens: Sequence[Token]) -> Tuple[str, ...]:
    return tuple(t.lead + t.text + t.trail for t in tokens)
