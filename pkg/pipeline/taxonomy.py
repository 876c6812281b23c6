"""Failure categories of unverified transpilations and the report table."""

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from asm.isa import Isa
from asm.models import AsmLine, Immediate, Program
from asm.table import lookup
from asm.validation import validate_line
from blockfinder.scope import undefined_refs
from comparison.operations import LiteralDiff

from .models import OracleVerdict
from .summary import samples_used_summary

logger = logging.getLogger(__name__)

LENGTH = "Length"
FAILURE = "Failure"
ISA = "ISA"
REFERENCES = "References"
COPYING = "Copying"
LOGIC = "Logic"
MEMORY = "Memory"
MATH = "Math"
CORRECT = "Correct"

TABLE_ORDER = (LENGTH, FAILURE, ISA, REFERENCES, COPYING, LOGIC, MEMORY, MATH, CORRECT)

MATH_MNEMONICS = frozenset({
    "mul", "mulw", "madd", "msub", "sdiv", "udiv", "div", "divu", "divw", "rem", "remu", "remw",
    "movk", "lui", "fmov", "fmv.d.x",
})
LARGE_CONSTANT = 1 << 12


@dataclass(frozen=True)
class CompileReport:
    """What an assembler and linker would say about a candidate."""
    truncated: bool = False
    parse_error: str = ""
    isa_problems: Tuple[str, ...] = ()
    undefined: Tuple[str, ...] = ()


@dataclass(frozen=True)
class RunReport:
    verdict: Optional[OracleVerdict] = None
    literal_diffs: Tuple[LiteralDiff, ...] = ()
    math: bool = False

    @property
    def accepted(self) -> bool:
        return self.verdict is not None and self.verdict.accepted


def compile_report(program: Optional[Program], parse_error: str = "", truncated: bool = False,
                   n_tokens: int = 0, max_tokens: int = 0) -> CompileReport:
    if max_tokens and n_tokens >= max_tokens:
        truncated = True
    if program is None:
        return CompileReport(truncated, parse_error or "candidate does not parse")
    problems: List[str] = []
    for line in program.all_lines():
        if line.is_instruction:
            problems += [f"line {line.index}: {p}" for p in validate_line(line, program.isa)]
    undefined = tuple(dict.fromkeys(r.ref.name for r in undefined_refs(program)))
    return CompileReport(truncated, "", tuple(problems), undefined)


def is_math_block(lines: Sequence[AsmLine], isa: Isa) -> bool:
    """Multiplication, division, float or large-constant materialisation."""
    for line in lines:
        if not line.is_instruction:
            continue
        spec = lookup(isa, line.mnemonic or "")
        if line.mnemonic in MATH_MNEMONICS or (spec is not None and spec.klass == "float"):
            return True
        if any(isinstance(op, Immediate) and abs(op.value) >= LARGE_CONSTANT for op in line.operands):
            return True
    return False


def classify_failure(compile: CompileReport, run: RunReport) -> str:
    """First matching category in precedence order."""
    if run.accepted:
        return CORRECT
    if compile.truncated:
        return LENGTH
    if run.verdict is not None and run.verdict.error:
        return FAILURE
    if compile.parse_error or compile.isa_problems:
        return ISA
    if compile.undefined:
        return REFERENCES
    if run.verdict is not None and run.verdict.faulted:
        return MEMORY
    if run.literal_diffs:
        return COPYING
    if run.math:
        return MATH
    return LOGIC


@dataclass
class FailureTable:
    counts: Dict[str, int] = field(default_factory=lambda: {c: 0 for c in TABLE_ORDER})
    samples_used: float = 0.0
    examples: int = 0

    def to_dict(self) -> Dict:
        return {"counts": dict(self.counts), "samples_used": self.samples_used, "examples": self.examples}

    def format(self) -> str:
        width = max(len(c) for c in TABLE_ORDER)
        rows = [f"{c:<{width}}  {self.counts[c]:>6}" for c in TABLE_ORDER]
        rows.append(f"{'examples':<{width}}  {self.examples:>6}")
        rows.append(f"average samples used: {self.samples_used:.2f}")
        return "\n".join(rows)


def failure_table(records: Iterable[Mapping]) -> FailureTable:
    """Category counts per input_id (one count per example, not per function)."""
    by_input: Dict[str, Mapping] = {}
    for record in records:
        by_input.setdefault(record.get("input_id", ""), record)
    table = FailureTable()
    counts = Counter(r.get("category") or (CORRECT if r.get("status") == "verified" else LOGIC)
                     for r in by_input.values())
    for category, n in counts.items():
        if category in table.counts:
            table.counts[category] += n
        else:
            logger.warning("unknown category %r in report", category)
    table.examples = len(by_input)
    table.samples_used = samples_used_summary(by_input.values())
    return table
