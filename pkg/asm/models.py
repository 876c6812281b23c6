"""Data models for parsed assembly: operands, lines, functions and programs."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterator, List, Optional, Tuple, Union

from .isa import Isa


class LineKind(str, Enum):
    LABEL = "label"
    DIRECTIVE = "directive"
    INSTRUCTION = "instruction"


class IndexMode(str, Enum):
    OFFSET = "offset"
    PRE = "pre"
    POST = "post"


@dataclass(frozen=True)
class Register:
    name: str


@dataclass(frozen=True)
class Immediate:
    value: int
    # Source spelling ("#0x10"); printing reuses it while it still denotes value.
    text: str = field(default="", compare=False)


@dataclass(frozen=True)
class FloatImmediate:
    """A floating-point literal, held as its IEEE-754 double bit pattern."""
    bits: int
    text: str = field(default="", compare=False)


@dataclass(frozen=True)
class LabelRef:
    name: str
    modifier: Optional[str] = None  # lo12, got, got_lo12, hi, lo, plt, ...


@dataclass(frozen=True)
class Shift:
    op: str
    amount: Optional[int] = None
    hash: bool = field(default=False, compare=False)


@dataclass(frozen=True)
class Memory:
    base: str
    offset: int = 0
    mode: IndexMode = IndexMode.OFFSET
    offset_ref: Optional[LabelRef] = None
    index: Optional[str] = None
    extend: Optional[Shift] = None
    has_offset: bool = field(default=False, compare=False)
    hash: bool = field(default=False, compare=False)


@dataclass(frozen=True)
class Hole:
    hole_id: int


@dataclass(frozen=True)
class RawOperand:
    """Operand text of an opaque instruction that no operand production matched."""
    text: str


Operand = Union[Register, Immediate, FloatImmediate, LabelRef, Shift, Memory, Hole, RawOperand]


@dataclass(frozen=True)
class AsmLine:
    kind: LineKind
    mnemonic: Optional[str] = None
    operands: Tuple[Operand, ...] = ()
    label: Optional[str] = None
    args: Optional[str] = None
    opaque: bool = False
    raw: str = field(default="", compare=False)
    index: int = field(default=-1, compare=False)
    comment: str = field(default="", compare=False)

    @property
    def is_label(self) -> bool:
        return self.kind is LineKind.LABEL

    @property
    def is_directive(self) -> bool:
        return self.kind is LineKind.DIRECTIVE

    @property
    def is_instruction(self) -> bool:
        return self.kind is LineKind.INSTRUCTION

    @property
    def mnemonic_hole(self) -> Optional[int]:
        if self.is_instruction and self.mnemonic and self.mnemonic.startswith("?"):
            return int(self.mnemonic[1:])
        return None

    def label_refs(self) -> Iterator[LabelRef]:
        for op in self.operands:
            if isinstance(op, LabelRef):
                yield op
            elif isinstance(op, Memory) and op.offset_ref is not None:
                yield op.offset_ref

    def registers(self) -> Iterator[str]:
        """Register names in operand order, memory bases and indices included."""
        for op in self.operands:
            if isinstance(op, Register):
                yield op.name
            elif isinstance(op, Memory):
                yield op.base
                if op.index:
                    yield op.index

    def holes(self) -> Iterator[int]:
        if self.mnemonic_hole is not None:
            yield self.mnemonic_hole
        for op in self.operands:
            if isinstance(op, Hole):
                yield op.hole_id

    def with_operands(self, operands: Tuple[Operand, ...]) -> "AsmLine":
        return AsmLine(self.kind, self.mnemonic, tuple(operands), self.label, self.args,
                       self.opaque, "", self.index, self.comment)

    def with_mnemonic(self, mnemonic: str, opaque: bool = False) -> "AsmLine":
        return AsmLine(self.kind, mnemonic, self.operands, self.label, self.args,
                       opaque, "", self.index, self.comment)


@dataclass(frozen=True)
class GlobalDefinition:
    """A data label and the directive lines that define it."""
    label: str
    lines: Tuple[AsmLine, ...]
    decoded_value: Optional[int] = None
    width: int = 0  # bytes covered by decoded_value

    @property
    def strings(self) -> Tuple[str, ...]:
        from core.constants import STRING_DIRECTIVES
        return tuple(l.args or "" for l in self.lines if l.mnemonic in STRING_DIRECTIVES)


@dataclass(frozen=True)
class AsmFunction:
    name: str
    lines: Tuple[AsmLine, ...]
    isa: Isa
    header: Tuple[AsmLine, ...] = ()

    @property
    def instructions(self) -> List[Tuple[int, AsmLine]]:
        return [(i, l) for i, l in enumerate(self.lines) if l.is_instruction]


@dataclass
class Program:
    isa: Isa
    preamble: Tuple[AsmLine, ...] = ()
    functions: Tuple[AsmFunction, ...] = ()
    _globals: Optional[Dict[str, GlobalDefinition]] = field(default=None, compare=False, repr=False)

    def all_lines(self) -> List[AsmLine]:
        lines = list(self.preamble)
        for fn in self.functions:
            lines.extend(fn.header)
            lines.extend(fn.lines)
        return lines

    @property
    def globals(self) -> Dict[str, GlobalDefinition]:
        """Data definitions by label, derived from the program text on first use."""
        if self._globals is None:
            from blockfinder.globals import collect_globals
            self._globals = collect_globals(self)
        return self._globals

    def function(self, name: str) -> Optional[AsmFunction]:
        for fn in self.functions:
            if fn.name == name:
                return fn
        return None

    def defined_labels(self) -> Dict[str, int]:
        """Every label defined anywhere, mapped to its position in all_lines()."""
        return {l.label: i for i, l in enumerate(self.all_lines()) if l.is_label}
