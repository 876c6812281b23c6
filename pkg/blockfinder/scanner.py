"""Pure-block scanner: a single forward pass that grows a block until a boundary."""

from typing import List, Optional, Sequence, Tuple

from asm.isa import Isa, is_stack_register
from asm.models import AsmFunction, AsmLine, Memory, Program, RawOperand, Register
from asm.printing import line_pieces
from asm.table import BOUNDARY_CLASSES, SOLVABLE_CLASSES, lookup
from asm.tokens import function_lines

from .models import PureBlock, SubseqSpan
from .registers import free_registers_of, written_registers


def touches_stack(line: AsmLine, isa: Isa) -> bool:
    for op in line.operands:
        if isinstance(op, Register) and is_stack_register(isa, op.name):
            return True
        if isinstance(op, Memory) and is_stack_register(isa, op.base):
            return True
    return False


def boundary_reason(line: AsmLine, isa: Isa) -> Optional[str]:
    """Why line cannot sit inside a pure block, or None when it can."""
    if line.is_label:
        return "label"
    if line.is_directive:
        return "directive"
    if line.mnemonic_hole is not None:
        return None
    if line.opaque:
        return "opaque"
    spec = lookup(isa, line.mnemonic)
    if spec.klass in BOUNDARY_CLASSES:
        return spec.klass
    if any(isinstance(op, Memory) for op in line.operands):
        return "memory"
    if touches_stack(line, isa):
        return "stack"
    return None


def is_boundary(line: AsmLine, isa: Isa) -> bool:
    return boundary_reason(line, isa) is not None


def is_solvable_line(line: AsmLine, isa: Isa) -> bool:
    if line.mnemonic_hole is not None:
        return True
    spec = lookup(isa, line.mnemonic or "")
    if spec is None or spec.klass not in SOLVABLE_CLASSES:
        return False
    return not any(True for _ in line.label_refs()) and not any(
        isinstance(op, RawOperand) for op in line.operands)


def token_offsets(lines: Sequence[AsmLine], isa: Isa, base: int = 0) -> List[int]:
    """Index of the first token of every line (plus one past the end)."""
    offsets = [base]
    for line in lines:
        offsets.append(offsets[-1] + len(line_pieces(line, isa)))
    return offsets


def make_block(lines: Sequence[AsmLine], isa: Isa, span: SubseqSpan) -> PureBlock:
    refs = tuple(ref for line in lines for ref in line.label_refs())
    return PureBlock(
        span=span,
        lines=tuple(lines),
        inputs=free_registers_of(lines, isa),
        outputs=written_registers(lines, isa),
        isa=isa,
        global_refs=refs,
        is_solvable=all(is_solvable_line(l, isa) for l in lines),
    )


def _regions(lines: Sequence[AsmLine], isa: Isa) -> List[Tuple[int, int]]:
    regions: List[Tuple[int, int]] = []
    start = None
    for i, line in enumerate(lines):
        if is_boundary(line, isa):
            if start is not None:
                regions.append((start, i - 1))
                start = None
        elif start is None:
            start = i
    if start is not None:
        regions.append((start, len(lines) - 1))
    return regions


def scan_lines(lines: Sequence[AsmLine], isa: Isa, function: int = 0, line_base: int = 0,
               token_base: int = 0) -> List[PureBlock]:
    offsets = token_offsets(lines, isa, token_base)
    blocks = []
    for start, end in _regions(lines, isa):
        span = SubseqSpan(function, line_base + start, line_base + end, offsets[start], offsets[end + 1] - 1)
        blocks.append(make_block(lines[start:end + 1], isa, span))
    return blocks


def extract_pure_blocks(fn: AsmFunction, function: int = 0, line_base: int = 0,
                        token_base: int = 0) -> List[PureBlock]:
    """Maximal boundary-free regions of fn, indexed over its header and body."""
    return scan_lines(function_lines(fn), fn.isa, function, line_base, token_base)


def free_registers(block: PureBlock) -> Tuple[str, ...]:
    """Registers read before they are written, in first-read order."""
    return free_registers_of(block.lines, block.isa)


def program_units(program: Program) -> List[Tuple[int, List[AsmLine]]]:
    """(function index, lines) for the preamble (-1) and every function."""
    return [(-1, list(program.preamble))] + [
        (n, function_lines(fn)) for n, fn in enumerate(program.functions)]


def program_blocks(program: Program) -> List[PureBlock]:
    """Pure blocks of the whole program in program-global line and token indices."""
    blocks: List[PureBlock] = []
    line_base = token_base = 0
    for function, lines in program_units(program):
        blocks.extend(scan_lines(lines, program.isa, function, line_base, token_base))
        line_base += len(lines)
        token_base = token_offsets(lines, program.isa, token_base)[-1]
    return blocks


def partition_spans(program: Program) -> List[SubseqSpan]:
    """Cover every token of program with spans: pure blocks plus one span per other line."""
    spans: List[SubseqSpan] = []
    block_at = {b.span.start_line: b.span for b in program_blocks(program)}
    line_base = 0
    token_base = 0
    for function, lines in program_units(program):
        offsets = token_offsets(lines, program.isa, token_base)
        i = 0
        while i < len(lines):
            if line_base + i in block_at:
                span = block_at[line_base + i]
                spans.append(span)
                i = span.end_line - line_base + 1
                continue
            spans.append(SubseqSpan(function, line_base + i, line_base + i, offsets[i],
                                    offsets[i + 1] - 1, kind="line"))
            i += 1
        line_base += len(lines)
        token_base = offsets[-1]
    return spans
