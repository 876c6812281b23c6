"""Hole placement and substitution."""

import bisect
import logging
from typing import Collection, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from asm.isa import Isa, float_registers, general_registers, register_info
from asm.models import (
    AsmLine, FloatImmediate, Hole, Immediate, LabelRef, Register, Shift,
)
from asm.table import InstructionSpec, group_members, lookup, mnemonics
from asm.validation import view_width
from blockfinder.models import SubseqSpan
from blockfinder.scanner import token_offsets
from core.errors import ConfigError, HoleOnMnemonic, IncompleteAssignment, UnsupportedInstruction

from .models import HoleAssignment, HoleDomain, HoleValue, Sketch

logger = logging.getLogger(__name__)

DEFAULT_WINDOW = (-4096, 4095)
FIELD_SHIFTS = (0, 16, 32, 48)
SHIFT_OPS = ("lsl", "lsr", "asr")


def _ordered(original, values: Iterable, preferred: Sequence = ()) -> Tuple:
    """preferred first, then original, then the rest, without repeats."""
    out = list(dict.fromkeys([*preferred, original, *values]))
    if original is None:
        out.remove(None)
    return tuple(out)


def register_pool(isa: Isa, name: str) -> Tuple[str, ...]:
    info = register_info(isa, name)
    if info is not None and info.kind == "fpr":
        if isa is Isa.ARMV8 and info.width == 32:
            return tuple(f"s{n}" for n in range(32))
        return float_registers(isa)
    return general_registers(isa, info.width if info else 64)


def _register_domain(isa: Isa, op: Register, preferred: Sequence[str], line: int, k: int) -> HoleDomain:
    pool = register_pool(isa, op.name)
    by_canon = {register_info(isa, r).canonical: r for r in pool}
    first = [by_canon[c] for c in preferred if c in by_canon]
    return HoleDomain("register", _ordered(op.name, pool, first), original=op.name, line=line, operand=k)


def immediate_bounds(spec: InstructionSpec, line: AsmLine, isa: Isa,
                     window: Tuple[int, int]) -> Tuple[int, int]:
    lo, hi = spec.immediate_bounds(view_width(line, isa))
    return max(lo, window[0]), min(hi, window[1])


def _shift_domain(spec: InstructionSpec, line: AsmLine, isa: Isa, op: Shift, li: int, k: int) -> HoleDomain:
    view = view_width(line, isa)
    if spec.shift == "field":
        values = [Shift("lsl", a) for a in FIELD_SHIFTS if a < view]
    else:
        values = [Shift(s, a) for s in SHIFT_OPS for a in range(view)]
    return HoleDomain("shift", _ordered(op, values), original=op, line=li, operand=k)


def operand_domain(line: AsmLine, k: int, isa: Isa, window: Tuple[int, int] = DEFAULT_WINDOW,
                   preferred: Sequence[str] = (), labels: Sequence[str] = (),
                   floats: Sequence[FloatImmediate] = (), li: int = 0) -> HoleDomain:
    """Domain of operand k of line, typed by the operand slot it occupies."""
    op = line.operands[k]
    spec = lookup(isa, line.mnemonic)
    if spec is None:
        raise UnsupportedInstruction(line.mnemonic, "no operand slots known")
    if isinstance(op, Register):
        return _register_domain(isa, op, preferred, li, k)
    if isinstance(op, Immediate):
        slot = spec.slots[k].rstrip("?") if k < len(spec.slots) else ""
        kind = "shift-amount" if spec.imm_range == "shift" and slot in ("i", "si") else "immediate"
        return HoleDomain(kind, bounds=immediate_bounds(spec, line, isa, window),
                          original=op.value, line=li, operand=k)
    if isinstance(op, Shift):
        return _shift_domain(spec, line, isa, op, li, k)
    if isinstance(op, FloatImmediate):
        return HoleDomain("float", _ordered(op, floats), original=op, line=li, operand=k)
    if isinstance(op, LabelRef):
        values = [LabelRef(name, op.modifier) for name in labels]
        return HoleDomain("label", _ordered(op, values), original=op, line=li, operand=k)
    raise UnsupportedInstruction(line.mnemonic, f"operand {op!r} cannot become a hole")


def mnemonic_domain(line: AsmLine, isa: Isa, position: int, li: int = 0) -> HoleDomain:
    spec = lookup(isa, line.mnemonic)
    members = group_members(isa, spec.group) if spec is not None else ()
    if len(members) < 2:
        raise HoleOnMnemonic(position, line.mnemonic, members)
    return HoleDomain("mnemonic", _ordered(spec.mnemonic, members), original=spec.mnemonic,
                      line=li, operand=-1)


def make_sketch(lines: Sequence[AsmLine], flagged: Collection[int], isa: Isa,
                origin: Optional[SubseqSpan] = None, token_base: Optional[int] = None,
                window: Tuple[int, int] = DEFAULT_WINDOW, preferred: Sequence[str] = (),
                labels: Sequence[str] = (), floats: Sequence[FloatImmediate] = ()) -> Sketch:
    """Replace every flagged token of a candidate block with a hole.

    flagged holds token indices in the same numbering as origin (program-global
    when the block came from partition_spans); token_base defaults to the
    origin's first token. preferred lists canonical registers a register hole
    tries first.
    """
    if token_base is None:
        token_base = origin.start_token if origin is not None else 0
    offsets = token_offsets(lines, isa, token_base)
    by_line: Dict[int, List[int]] = {}
    for t in sorted(set(flagged)):
        if not offsets[0] <= t < offsets[-1]:
            continue
        li = bisect.bisect_right(offsets, t) - 1
        by_line.setdefault(li, []).append(t - offsets[li])
    out = list(lines)
    domains: Dict[int, HoleDomain] = {}
    hole = 0
    for li in sorted(by_line):
        line = lines[li]
        if not line.is_instruction:
            continue
        operands = list(line.operands)
        mnemonic = line.mnemonic
        for piece in by_line[li]:
            if piece == 0:
                domains[hole] = mnemonic_domain(line, isa, offsets[li], li)
                mnemonic = f"?{hole}"
            else:
                k = piece - 1
                domains[hole] = operand_domain(line, k, isa, window, preferred, labels, floats, li)
                operands[k] = Hole(hole)
            hole += 1
        new = line.with_operands(tuple(operands))
        if mnemonic != line.mnemonic:
            new = new.with_mnemonic(mnemonic)
        out[li] = new
    logger.debug("sketch with %d holes over %d lines", len(domains), len(lines))
    return Sketch(tuple(out), isa, domains, origin)


def _compatible_mnemonics(isa: Isa, n_operands: int) -> Tuple[str, ...]:
    out = []
    for m in mnemonics(isa):
        spec = lookup(isa, m)
        if spec.group and len(spec.required_slots) <= n_operands <= len(spec.slots):
            out.append(m)
    return tuple(out)


def _line_view(line: AsmLine, isa: Isa) -> str:
    """A concrete register of line to type its register holes by, if any."""
    for op in line.operands:
        if isinstance(op, Register):
            return op.name
    return "x0" if isa is Isa.ARMV8 else "a0"


def sketch_from_lines(lines: Sequence[AsmLine], isa: Isa, window: Tuple[int, int] = DEFAULT_WINDOW,
                      labels: Sequence[str] = ()) -> Sketch:
    """Sketch from parsed sketch-file lines, where holes are written ?<id>.

    Operand holes take the domain of the slot they occupy; a mnemonic hole ranges
    over every grouped mnemonic with a fitting operand count.
    """
    domains: Dict[int, HoleDomain] = {}
    instructions = [l for l in lines if l.is_instruction]

    def claim(hole_id: int, domain: HoleDomain) -> None:
        if hole_id in domains:
            raise ConfigError(f"hole ?{hole_id} appears more than once")
        domains[hole_id] = domain

    for li, line in enumerate(instructions):
        mnemonic = line.mnemonic
        if line.mnemonic_hole is not None:
            values = _compatible_mnemonics(isa, len(line.operands))
            if not values:
                raise ConfigError(f"no mnemonic takes {len(line.operands)} operands")
            claim(line.mnemonic_hole, HoleDomain("mnemonic", values, line=li, operand=-1))
            mnemonic = values[0]
        spec = lookup(isa, mnemonic)
        if spec is None:
            raise UnsupportedInstruction(mnemonic, "not in the supported subset")
        typed = line.with_mnemonic(mnemonic)
        for k, op in enumerate(line.operands):
            if not isinstance(op, Hole):
                continue
            slot = spec.slots[k].rstrip("?") if k < len(spec.slots) else ""
            if slot in ("d", "s"):
                pool = register_pool(isa, _line_view(line, isa))
                claim(op.hole_id, HoleDomain("register", pool, line=li, operand=k))
            elif slot in ("i", "si", "f"):
                kind = "shift-amount" if spec.imm_range == "shift" else "immediate"
                claim(op.hole_id, HoleDomain(kind, bounds=immediate_bounds(spec, typed, isa, window),
                                             line=li, operand=k))
            elif slot == "sh":
                view = view_width(typed, isa)
                values = ([Shift("lsl", a) for a in FIELD_SHIFTS if a < view] if spec.shift == "field"
                          else [Shift(s, a) for s in SHIFT_OPS for a in range(view)])
                claim(op.hole_id, HoleDomain("shift", tuple(values), line=li, operand=k))
            elif slot in ("l", "a"):
                if not labels:
                    raise ConfigError(f"label hole ?{op.hole_id} needs candidate labels")
                claim(op.hole_id, HoleDomain("label", tuple(LabelRef(n) for n in labels), line=li, operand=k))
            else:
                raise ConfigError(f"hole ?{op.hole_id} sits in no known slot of {mnemonic}")
    return Sketch(tuple(instructions), isa, domains)


def _as_operand(domain: HoleDomain, value: HoleValue):
    if domain.kind == "register":
        return Register(str(value))
    if domain.is_immediate:
        return Immediate(int(value))
    return value


def assign_lines(sketch: Sketch, values: Mapping[int, HoleValue],
                 partial: bool = False) -> Tuple[AsmLine, ...]:
    """Sketch lines with the holes in values substituted.

    Unless partial, every hole must be assigned.
    """
    if not partial:
        missing = [h for h in sketch.holes if h not in values]
        if missing:
            raise IncompleteAssignment(missing)
    out = []
    for line in sketch.lines:
        if not line.is_instruction:
            out.append(line)
            continue
        new = line
        hole = line.mnemonic_hole
        if hole is not None and hole in values:
            new = new.with_mnemonic(str(values[hole]))
        if any(isinstance(op, Hole) and op.hole_id in values for op in line.operands):
            new = new.with_operands(tuple(
                _as_operand(sketch.domains[op.hole_id], values[op.hole_id])
                if isinstance(op, Hole) and op.hole_id in values else op
                for op in line.operands))
        out.append(new)
    return tuple(out)


def apply_assignment(sketch: Sketch, assignment: HoleAssignment) -> Tuple[str, ...]:
    """Token strings of the sketch with every hole filled."""
    filled = Sketch(assign_lines(sketch, assignment.values), sketch.isa, {}, sketch.origin)
    return filled.tokens
