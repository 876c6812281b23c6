"""Data models for block extraction and scope analysis."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Tuple

from asm.isa import Isa
from asm.models import AsmLine, LabelRef


@dataclass(frozen=True)
class SubseqSpan:
    """A contiguous run of lines and their tokens.

    Line and token indices are inclusive and relative to the unit that was
    scanned: a function's header+body for extract_pure_blocks, the whole program
    for partition_spans.
    """
    function: int
    start_line: int
    end_line: int
    start_token: int = 0
    end_token: int = 0
    kind: str = field(default="block", compare=False)  # block | line

    @property
    def token_range(self) -> range:
        return range(self.start_token, self.end_token + 1)

    @property
    def line_range(self) -> range:
        return range(self.start_line, self.end_line + 1)

    def contains_token(self, index: int) -> bool:
        return self.start_token <= index <= self.end_token

    def to_dict(self) -> dict:
        return {
            "function": self.function, "start_line": self.start_line, "end_line": self.end_line,
            "start_token": self.start_token, "end_token": self.end_token, "kind": self.kind,
        }


@dataclass(frozen=True)
class PureBlock:
    span: SubseqSpan
    lines: Tuple[AsmLine, ...]
    inputs: Tuple[str, ...]
    outputs: Tuple[str, ...]
    isa: Isa
    global_refs: Tuple[LabelRef, ...] = ()
    is_solvable: bool = True


class RefStatus(str, Enum):
    LOCAL = "local"
    GLOBAL_DEFINED = "global-defined"
    EXTERNAL = "external"
    UNDEFINED = "undefined"


@dataclass(frozen=True)
class ScopedRef:
    """A label reference with its resolution status and position."""
    ref: LabelRef
    status: RefStatus
    line: int
    token: int
