"""Reassembly of separately handled functions into one program."""

import logging
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from asm.isa import Isa
from asm.models import AsmLine, LineKind, Program
from asm.parsing import parse_program
from asm.printing import print_lines
from core.errors import DuplicateFunction

logger = logging.getLogger(__name__)

RODATA_HEADER = (
    AsmLine(LineKind.DIRECTIVE, mnemonic=".section", args=".rodata"),
    AsmLine(LineKind.DIRECTIVE, mnemonic=".align", args="3"),
)


def globals_text(created: Mapping[str, Sequence[AsmLine]], isa: Isa, taken=()) -> str:
    """A rodata section defining every created global not already in taken."""
    lines: List[AsmLine] = []
    for label, body in created.items():
        if label in taken:
            continue
        lines.append(AsmLine(LineKind.LABEL, label=label))
        lines.extend(body)
    if not lines:
        return ""
    return print_lines(RODATA_HEADER + tuple(lines), isa)


def recombine(functions: Sequence[Tuple[str, Sequence[str]]], preamble: Sequence[str] = (),
              created: Optional[Mapping[str, Sequence[AsmLine]]] = None, isa: Isa = Isa.ARMV8) -> Program:
    """Concatenate preamble and function token strings, in order, then the created globals."""
    seen: Dict[str, int] = {}
    for n, (name, _) in enumerate(functions):
        if name in seen:
            raise DuplicateFunction(name)
        seen[name] = n
    text = "".join(preamble) + "".join("".join(tokens) for _, tokens in functions)
    if created:
        defined = parse_program(text, isa).defined_labels()
        text += globals_text(created, isa, defined)
    program = parse_program(text, isa)
    logger.debug("recombined %d functions, %d created globals", len(functions), len(created or {}))
    return program
