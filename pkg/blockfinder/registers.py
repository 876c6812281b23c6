"""Per-instruction register reads and writes."""

from typing import List, Sequence, Tuple

from asm.isa import ARM_FLAGS, Isa, is_zero_register, register_info
from asm.models import AsmLine, Memory, Register
from asm.table import lookup
from core.errors import UnsupportedInstruction


def canonical(isa: Isa, name: str) -> str:
    if name == ARM_FLAGS:
        return name
    info = register_info(isa, name)
    return info.canonical if info else name


def width_of(isa: Isa, name: str) -> int:
    info = register_info(isa, name)
    return info.width if info else 64


def reads_writes(line: AsmLine, isa: Isa) -> Tuple[List[str], List[str]]:
    """(registers read, registers written) by one instruction, as spelled.

    Reads happen before writes. Zero registers are omitted; flag-setting
    instructions write the pseudo-register "nzcv".
    """
    spec = lookup(isa, line.mnemonic or "")
    if spec is None or line.opaque:
        raise UnsupportedInstruction(line.mnemonic or "?", "no operand roles known")
    reads: List[str] = []
    writes: List[str] = []
    for slot, op in zip(spec.slots, line.operands):
        if isinstance(op, Register):
            if is_zero_register(isa, op.name):
                continue
            if slot == "d":
                if spec.reads_dst:
                    reads.append(op.name)
                writes.append(op.name)
            else:
                reads.append(op.name)
        elif isinstance(op, Memory):
            reads.append(op.base)
            if op.index:
                reads.append(op.index)
            if op.mode.value != "offset":
                writes.append(op.base)
    if spec.flags:
        writes.append(ARM_FLAGS)
    return reads, writes


def free_registers_of(lines: Sequence[AsmLine], isa: Isa) -> Tuple[str, ...]:
    """Registers read before written, in first-read order.

    A register first read through a narrow view and later through a wider one is
    reported by its wider name.
    """
    written = set()
    order: List[str] = []
    names = {}
    for line in lines:
        if not line.is_instruction:
            continue
        reads, writes = reads_writes(line, isa)
        for name in reads:
            c = canonical(isa, name)
            if c in written:
                continue
            if c not in names:
                order.append(c)
                names[c] = name
            elif width_of(isa, name) > width_of(isa, names[c]):
                names[c] = name
        written.update(canonical(isa, w) for w in writes)
    return tuple(names[c] for c in order)


def written_registers(lines: Sequence[AsmLine], isa: Isa) -> Tuple[str, ...]:
    """Registers written, in first-write order, each spelled as in its last write."""
    order: List[str] = []
    names = {}
    for line in lines:
        if not line.is_instruction:
            continue
        for name in reads_writes(line, isa)[1]:
            c = canonical(isa, name)
            if c not in names:
                order.append(c)
            names[c] = name
    return tuple(names[c] for c in order)


def last_written_registers(lines: Sequence[AsmLine], isa: Isa) -> Tuple[str, ...]:
    """Registers written by the block's final writing instruction."""
    for line in reversed(lines):
        if line.is_instruction:
            writes = reads_writes(line, isa)[1]
            if writes:
                return tuple(writes)
    return ()
