"""Resolution of label references against the program's visible scope."""

from typing import Dict, List, Set

from asm.models import LabelRef, Memory, Program
from asm.table import lookup

from .models import RefStatus, ScopedRef, SubseqSpan
from .scanner import partition_spans, program_units, token_offsets

DECLARING = (".global", ".globl", ".extern", ".weak", ".comm", ".lcomm")
EXTERNAL_MODIFIERS = ("plt", "got", "got_lo12")


def declared_symbols(program: Program) -> Set[str]:
    names = set()
    for line in program.all_lines():
        if line.is_directive and line.mnemonic in DECLARING and line.args:
            if line.mnemonic in (".comm", ".lcomm"):
                names.add(line.args.split(",")[0].strip())
            else:
                names.update(a.strip() for a in line.args.split(","))
    return names


def resolve(ref: LabelRef, program: Program, is_target: bool, declared: Set[str],
            defined: Set[str]) -> RefStatus:
    """Status of one reference: local, global-defined, external or undefined."""
    if ref.name in program.globals:
        return RefStatus.GLOBAL_DEFINED
    if ref.name in defined:
        return RefStatus.LOCAL
    if ref.modifier in EXTERNAL_MODIFIERS or ref.name in declared:
        return RefStatus.EXTERNAL
    if is_target and not ref.name.startswith(".L"):
        return RefStatus.EXTERNAL
    return RefStatus.UNDEFINED


def find_out_of_scope_refs(program: Program) -> Dict[SubseqSpan, List[ScopedRef]]:
    """Every label reference, grouped by its enclosing span of partition_spans."""
    declared = declared_symbols(program)
    defined = set(program.defined_labels())
    spans = partition_spans(program)
    by_line = {}
    for span in spans:
        for line in span.line_range:
            by_line[line] = span
    report: Dict[SubseqSpan, List[ScopedRef]] = {}
    line_base = 0
    token_base = 0
    for _, lines in program_units(program):
        offsets = token_offsets(lines, program.isa, token_base)
        for i, line in enumerate(lines):
            if not line.is_instruction or line.mnemonic_hole is not None:
                continue
            spec = lookup(program.isa, line.mnemonic)
            slots = spec.slots if spec else ()
            for k, op in enumerate(line.operands):
                if isinstance(op, LabelRef):
                    ref = op
                elif isinstance(op, Memory) and op.offset_ref is not None:
                    ref = op.offset_ref
                else:
                    continue
                is_target = k < len(slots) and slots[k] == "l"
                status = resolve(ref, program, is_target, declared, defined)
                span = by_line[line_base + i]
                report.setdefault(span, []).append(
                    ScopedRef(ref, status, line_base + i, offsets[i] + 1 + k))
        line_base += len(lines)
        token_base = offsets[-1]
    return report


def undefined_refs(program: Program) -> List[ScopedRef]:
    return [r for refs in find_out_of_scope_refs(program).values() for r in refs
            if r.status is RefStatus.UNDEFINED]
