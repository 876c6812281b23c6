"""Assembler-level checks that report problems instead of raising."""

from typing import List, Optional

from .isa import Isa, is_register, other_isa, register_info
from .models import (
    AsmLine, FloatImmediate, Hole, Immediate, LabelRef, Memory, Operand, RawOperand,
    Register, Shift,
)
from .table import InstructionSpec, lookup

# ARM arithmetic immediates: 12 bits, optionally shifted left by 12; the assembler
# flips add/sub for negative values.
ARM_ARITH = ("add", "sub", "adds", "subs", "cmp")


def _slot_accepts(slot: str, op: Operand) -> bool:
    if isinstance(op, Hole):
        return True
    slot = slot.rstrip("?")
    if slot in ("d", "s"):
        return isinstance(op, Register)
    if slot == "si":
        return isinstance(op, (Register, Immediate)) or (isinstance(op, LabelRef) and op.modifier is not None)
    if slot == "i":
        return isinstance(op, Immediate) or (isinstance(op, LabelRef) and op.modifier is not None)
    if slot == "f":
        return isinstance(op, (FloatImmediate, Immediate, Register))
    if slot in ("l", "a"):
        return isinstance(op, LabelRef)
    if slot == "m":
        return isinstance(op, Memory)
    if slot == "sh":
        return isinstance(op, Shift)
    return False


def view_width(line: AsmLine, isa: Isa) -> int:
    """Operation width: the destination register's view (32 for w registers)."""
    spec = lookup(isa, line.mnemonic or "")
    if spec is not None and spec.is_word_op:
        return 32
    for op in line.operands:
        if isinstance(op, Register):
            info = register_info(isa, op.name)
            return info.width if info else 64
    return 64


def _immediate_legal(spec: InstructionSpec, line: AsmLine, value: int, isa: Isa) -> bool:
    if isa is Isa.ARMV8 and spec.mnemonic in ARM_ARITH:
        v = abs(value)
        return v <= 4095 or (v & 0xFFF == 0 and v >> 12 <= 4095)
    return spec.legal_immediate(value, view_width(line, isa))


def validate_line(line: AsmLine, isa: Isa) -> List[str]:
    """Problems an assembler would report for line; empty when it assembles."""
    if not line.is_instruction or line.mnemonic_hole is not None:
        return []
    spec = lookup(isa, line.mnemonic)
    if spec is None:
        other = lookup(other_isa(isa), line.mnemonic)
        where = f" (a {other_isa(isa).value} mnemonic)" if other is not None else ""
        return [f"unknown mnemonic {line.mnemonic!r}{where}"]
    problems: List[str] = []
    n = len(line.operands)
    if not len(spec.required_slots) <= n <= len(spec.slots):
        problems.append(f"{line.mnemonic} takes {len(spec.required_slots)} operands, got {n}")
        return problems
    for slot, op in zip(spec.slots, line.operands):
        if isinstance(op, RawOperand):
            problems.append(f"unrecognised operand {op.text!r}")
            continue
        if not _slot_accepts(slot, op):
            if isinstance(op, LabelRef) and is_register(other_isa(isa), op.name):
                problems.append(f"register {op.name!r} belongs to {other_isa(isa).value}")
            else:
                problems.append(f"operand {op!r} does not fit slot {slot!r} of {line.mnemonic}")
            continue
        if isinstance(op, Immediate) and slot.rstrip("?") in ("si", "i"):
            if not _immediate_legal(spec, line, op.value, isa):
                problems.append(f"immediate {op.value} out of range for {line.mnemonic}")
    return problems


def first_problem(line: AsmLine, isa: Isa) -> Optional[str]:
    problems = validate_line(line, isa)
    return problems[0] if problems else None
