"""Canonical printer: tab after the mnemonic, comma-space between operands."""

from typing import Iterable, List, Tuple

from .isa import Isa
from .models import (
    AsmLine, FloatImmediate, Hole, Immediate, IndexMode, LabelRef, Memory, Operand,
    Program, RawOperand, Register, Shift,
)

ARM_MODIFIERS = ("lo12", "got", "got_lo12", "tprel", "tprel_lo12", "lo12_nc")

# (kind, lead, text, trail) for every token of a printed line.
Piece = Tuple[str, str, str, str]


def _immediate_text(op: Immediate) -> str:
    from .parsing import parse_int
    if op.text and parse_int(op.text) == op.value:
        return op.text
    return str(op.value)


def _float_text(op: FloatImmediate) -> str:
    from .parsing import bits_float, float_bits
    if op.text and float_bits(float(op.text.lstrip("#"))) == op.bits:
        return op.text
    return repr(bits_float(op.bits))


def format_label_ref(ref: LabelRef, isa: Isa) -> str:
    if ref.modifier is None:
        return ref.name
    if ref.modifier == "plt":
        return f"{ref.name}@plt"
    if isa is Isa.ARMV8:
        return f":{ref.modifier}:{ref.name}"
    return f"%{ref.modifier}({ref.name})"


def _format_shift(op: Shift) -> str:
    if op.amount is None:
        return op.op
    return f"{op.op} {'#' if op.hash else ''}{op.amount}"


def _format_memory(op: Memory, isa: Isa) -> str:
    if isa is Isa.RISCV64:
        if op.offset_ref is not None:
            return f"{format_label_ref(op.offset_ref, isa)}({op.base})"
        if op.offset or op.has_offset:
            return f"{op.offset}({op.base})"
        return f"({op.base})"
    hash_ = "#" if op.hash else ""
    if op.mode is IndexMode.POST:
        return f"[{op.base}], {hash_}{op.offset}"
    if op.offset_ref is not None:
        inner = f"{op.base}, {format_label_ref(op.offset_ref, isa)}"
    elif op.index is not None:
        inner = f"{op.base}, {op.index}"
        if op.extend is not None:
            inner += f", {_format_shift(op.extend)}"
    elif op.offset or op.has_offset:
        inner = f"{op.base}, {hash_}{op.offset}"
    else:
        inner = op.base
    return f"[{inner}]" + ("!" if op.mode is IndexMode.PRE else "")


def format_operand(op: Operand, isa: Isa) -> str:
    if isinstance(op, Register):
        return op.name
    if isinstance(op, Immediate):
        return _immediate_text(op)
    if isinstance(op, FloatImmediate):
        return _float_text(op)
    if isinstance(op, LabelRef):
        return format_label_ref(op, isa)
    if isinstance(op, Shift):
        return _format_shift(op)
    if isinstance(op, Memory):
        return _format_memory(op, isa)
    if isinstance(op, Hole):
        return f"?{op.hole_id}"
    if isinstance(op, RawOperand):
        return op.text
    raise TypeError(f"not an operand: {op!r}")


def line_pieces(line: AsmLine, isa: Isa) -> List[Piece]:
    """Token pieces of one printed line; the last piece's trail ends with a newline."""
    if line.is_label:
        return [("label", "", line.label, ":\n")]
    if line.is_directive:
        if line.args:
            return [("directive", "\t", line.mnemonic, ""), ("args", "\t", line.args, "\n")]
        return [("directive", "\t", line.mnemonic, "\n")]
    pieces: List[Piece] = [("mnemonic", "\t", line.mnemonic, "")]
    for n, op in enumerate(line.operands):
        pieces.append(("operand", "\t" if n == 0 else ", ", format_operand(op, isa), ""))
    kind, lead, text, _ = pieces[-1]
    pieces[-1] = (kind, lead, text, "\n")
    return pieces


def format_line(line: AsmLine, isa: Isa) -> str:
    return "".join(lead + text + trail for _, lead, text, trail in line_pieces(line, isa))


def print_lines(lines: Iterable[AsmLine], isa: Isa) -> str:
    return "".join(format_line(line, isa) for line in lines)


def print_program(program: Program) -> str:
    """Render a Program as canonical assembly text."""
    return print_lines(program.all_lines(), program.isa)
