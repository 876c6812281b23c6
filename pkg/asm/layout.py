"""Function detection: partition a flat line list into preamble and functions."""

from typing import List, Optional, Sequence, Set, Tuple

from core.constants import HEADER_DIRECTIVES

from .isa import Isa
from .models import AsmFunction, AsmLine, Program

FUNCTION_TYPES = ("%function", "@function", "function", "#function")


def is_local_label(name: str) -> bool:
    return name.startswith(".L")


def section_of(line: AsmLine, current: str) -> str:
    """Section kind ("text" or "data") in effect after a directive line."""
    if not line.is_directive:
        return current
    name = line.mnemonic
    if name == ".text":
        return "text"
    if name in (".data", ".bss", ".rodata"):
        return "data"
    if name in (".section", ".pushsection"):
        target = (line.args or "").split(",")[0].strip()
        return "text" if target.startswith(".text") else "data"
    return current


def typed_functions(lines: Sequence[AsmLine]) -> Set[str]:
    """Names declared with .type NAME, %function (or @function)."""
    names = set()
    for line in lines:
        if line.is_directive and line.mnemonic == ".type" and line.args:
            parts = [p.strip() for p in line.args.split(",")]
            if len(parts) == 2 and parts[1] in FUNCTION_TYPES:
                names.add(parts[0])
    return names


def _next_significant(lines: Sequence[AsmLine], start: int) -> Optional[AsmLine]:
    """Next line after start, skipping local labels and .cfi directives."""
    for line in lines[start:]:
        if line.is_label and is_local_label(line.label):
            continue
        if line.is_directive and line.mnemonic.startswith(".cfi"):
            continue
        return line
    return None


def function_starts(lines: Sequence[AsmLine]) -> List[int]:
    """Indices of the label lines that open a function, in source order."""
    typed = typed_functions(lines)
    section = "text"
    seen: Set[str] = set()
    starts: List[int] = []
    for i, line in enumerate(lines):
        section = section_of(line, section)
        if not line.is_label or line.label in seen:
            continue
        name = line.label
        if name in typed:
            starts.append(i)
            seen.add(name)
        elif section == "text" and not is_local_label(name):
            nxt = _next_significant(lines, i + 1)
            if nxt is not None and nxt.is_instruction:
                starts.append(i)
                seen.add(name)
    return starts


def _header_start(lines: Sequence[AsmLine], label_index: int, floor: int) -> int:
    h = label_index
    while h - 1 >= floor and lines[h - 1].is_directive and lines[h - 1].mnemonic in HEADER_DIRECTIVES:
        h -= 1
    return h


def partition(lines: Sequence[AsmLine], isa: Isa) -> Tuple[Tuple[AsmLine, ...], Tuple[AsmFunction, ...]]:
    """Split lines into (preamble, functions).

    A function owns its header directives, its label, and every line up to the
    header of the next function; data emitted after a function stays with it.
    """
    starts = function_starts(lines)
    if not starts:
        return tuple(lines), ()
    bounds = []
    floor = 0
    for s in starts:
        bounds.append((_header_start(lines, s, floor), s))
        floor = s + 1
    preamble = tuple(lines[:bounds[0][0]])
    functions = []
    for n, (h, s) in enumerate(bounds):
        end = bounds[n + 1][0] if n + 1 < len(bounds) else len(lines)
        functions.append(AsmFunction(lines[s].label, tuple(lines[s:end]), isa, tuple(lines[h:s])))
    return preamble, tuple(functions)


def build_program(lines: Sequence[AsmLine], isa: Isa) -> Program:
    preamble, functions = partition(list(lines), isa)
    return Program(isa, preamble, functions)
