"""Correctness specifications from aligned input spans, and the register hint."""

import logging
from collections import defaultdict
from typing import Dict, List, Optional, Sequence, Set

from asm.isa import ARM_FLAGS, Isa, register_info
from asm.models import AsmLine, Program, Register
from asm.table import lookup
from blockfinder.globals import lookup_global
from blockfinder.models import SubseqSpan
from blockfinder.registers import (
    canonical, free_registers_of, last_written_registers, written_registers,
)
from blockfinder.scanner import boundary_reason, token_offsets
from core.errors import TranspileError, UnalignableSpan, UndecodableRequirement, UndefinedLabel
from guess.models import Alignment, ErrorMask
from semantics.models import BlockSpec

logger = logging.getLogger(__name__)


def span_lines(program: Program, span: SubseqSpan) -> List[AsmLine]:
    lines = program.all_lines()
    return lines[span.start_line:span.end_line + 1]


def block_outputs(lines: Sequence[AsmLine], isa: Isa, mode: str = "all-written"):
    if mode == "last-written":
        return last_written_registers(lines, isa)
    return written_registers(lines, isa)


def symbol_table(program: Program, lines: Sequence[AsmLine], strict: bool = False) -> Dict[str, int]:
    """Decoded value of every global the lines reference.

    Labels without a decoding are left out, or raise UndecodableRequirement
    when strict.
    """
    symbols: Dict[str, int] = {}
    for line in lines:
        for ref in line.label_refs():
            if ref.name in symbols:
                continue
            try:
                definition = lookup_global(program, ref.name)
            except UndefinedLabel:
                if strict:
                    raise
                continue
            if definition.decoded_value is None:
                if strict:
                    raise UndecodableRequirement(ref.name)
                continue
            symbols[ref.name] = definition.decoded_value
    return symbols


def build_spec(source: Program, span: SubseqSpan, outputs: str = "all-written") -> BlockSpec:
    """BlockSpec of an aligned input span, with referenced globals inlined as their values."""
    if span.kind != "block":
        raise UnalignableSpan(f"aligned span at line {span.start_line} is not a pure block")
    lines = [l for l in span_lines(source, span) if l.is_instruction]
    if not lines:
        raise UnalignableSpan(f"aligned span at line {span.start_line} is empty")
    for line in lines:
        reason = boundary_reason(line, source.isa)
        if reason is not None:
            raise UnalignableSpan(f"line {line.index} of the aligned span is a {reason} line")
    try:
        symbols = symbol_table(source, lines, strict=True)
    except UndefinedLabel as e:
        raise UnalignableSpan(str(e)) from e
    return BlockSpec(source.isa, tuple(lines), free_registers_of(lines, source.isa),
                     block_outputs(lines, source.isa, outputs), symbols)


def _plain_registers(line: AsmLine, isa: Isa) -> List[Optional[str]]:
    """Register operand names in operand order, None for sp, zero and non-registers."""
    out: List[Optional[str]] = []
    for op in line.operands:
        info = register_info(isa, op.name) if isinstance(op, Register) else None
        out.append(op.name if info is not None and info.kind in ("gpr", "fpr") else None)
    return out


def _klass(line: AsmLine, isa: Isa) -> Optional[str]:
    spec = lookup(isa, line.mnemonic or "") if line.is_instruction and not line.opaque else None
    return spec.klass if spec is not None else None


def _vote_lines(votes, x_line: AsmLine, y_line: AsmLine, x_isa: Isa, y_isa: Isa,
                skip: Set[int] = frozenset()) -> None:
    if _klass(x_line, x_isa) is None or _klass(x_line, x_isa) != _klass(y_line, y_isa):
        return
    xs = [r for r in _plain_registers(x_line, x_isa) if r is not None]
    ys = [(k, r) for k, r in enumerate(_plain_registers(y_line, y_isa)) if r is not None]
    if len(xs) != len(ys):
        return
    for a, (k, b) in zip(xs, ys):
        if k not in skip:
            votes[canonical(x_isa, a)].add(canonical(y_isa, b))


def _vote_io(votes, xs: Sequence[str], ys: Sequence[str], x_isa: Isa, y_isa: Isa) -> None:
    xs = [r for r in xs if r != ARM_FLAGS]
    ys = [r for r in ys if r != ARM_FLAGS]
    if len(xs) == len(ys):
        for a, b in zip(xs, ys):
            votes[canonical(x_isa, a)].add(canonical(y_isa, b))


def infer_register_map(source: Program, candidate: Program, alignment: Alignment,
                       mask: ErrorMask) -> Dict[str, str]:
    """Source-to-candidate register correspondence agreed on by every unflagged aligned pair.

    Unflagged block pairs vote through their inputs and outputs, same-class
    instruction lines through their register operands, and flagged blocks of
    equal length through their unflagged operands. Registers with conflicting
    votes, or sharing a target, are left out.
    """
    votes: Dict[str, Set[str]] = defaultdict(set)
    x_all, y_all = source.all_lines(), candidate.all_lines()
    x_isa, y_isa = source.isa, candidate.isa
    for j, y_span in enumerate(alignment.output_spans):
        x_span = alignment.aligned(j)
        y_lines = y_all[y_span.start_line:y_span.end_line + 1]
        x_lines = x_all[x_span.start_line:x_span.end_line + 1]
        flagged = mask.within(y_span)
        try:
            if y_span.kind == "block" and x_span.kind == "block":
                if not flagged:
                    _vote_io(votes, free_registers_of(x_lines, x_isa), free_registers_of(y_lines, y_isa),
                             x_isa, y_isa)
                    _vote_io(votes, written_registers(x_lines, x_isa), written_registers(y_lines, y_isa),
                             x_isa, y_isa)
                elif len(x_lines) == len(y_lines):
                    offsets = token_offsets(y_lines, y_isa, y_span.start_token)
                    for i, (xl, yl) in enumerate(zip(x_lines, y_lines)):
                        if offsets[i] in flagged:
                            continue
                        skip = {t - offsets[i] - 1 for t in flagged if offsets[i] < t < offsets[i + 1]}
                        _vote_lines(votes, xl, yl, x_isa, y_isa, skip)
            elif y_span.kind == "line" and x_span.kind == "line" and not flagged:
                _vote_lines(votes, x_lines[0], y_lines[0], x_isa, y_isa)
        except TranspileError as e:
            logger.debug("no register vote from span at line %d: %s", y_span.start_line, e)
    agreed = {x: next(iter(ys)) for x, ys in votes.items() if len(ys) == 1}
    targets: Dict[str, int] = defaultdict(int)
    for y in agreed.values():
        targets[y] += 1
    hint = {x: y for x, y in agreed.items() if targets[y] == 1}
    logger.debug("register hint: %s", hint)
    return hint
