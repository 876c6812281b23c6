"""Global data definitions: discovery, decoding to bit-vectors, and re-encoding."""

import struct
from typing import Dict, List, Optional, Sequence, Tuple

from asm.isa import Isa
from asm.models import AsmLine, GlobalDefinition, LineKind, Program
from core.constants import (
    DATA_DIRECTIVE_SIZES, SECTION_DIRECTIVES, STRING_DIRECTIVES, ZERO_DIRECTIVES,
)
from core.errors import UndefinedLabel

# Directives that may sit between a data label and its data without ending it.
_PASSTHROUGH = (".align", ".p2align", ".balign", ".size", ".type")


def _is_data(line: AsmLine) -> bool:
    return line.is_directive and (
        line.mnemonic in DATA_DIRECTIVE_SIZES
        or line.mnemonic in STRING_DIRECTIVES
        or line.mnemonic in ZERO_DIRECTIVES
    )


def definition_lines(lines: Sequence[AsmLine], label_index: int) -> Tuple[AsmLine, ...]:
    """Directive lines following a label, through the next label or section boundary."""
    body: List[AsmLine] = []
    for line in lines[label_index + 1:]:
        if line.is_label or line.is_instruction:
            break
        if line.mnemonic in SECTION_DIRECTIVES or line.mnemonic == ".pushsection":
            break
        if _is_data(line) or line.mnemonic in _PASSTHROUGH:
            body.append(line)
        else:
            break
    while body and not _is_data(body[-1]):
        body.pop()
    return tuple(body)


def element_bytes(directive: str, arg: str) -> Optional[bytes]:
    from asm.parsing import parse_int
    size = DATA_DIRECTIVE_SIZES[directive]
    arg = arg.strip()
    if directive in (".float", ".double"):
        try:
            value = float(arg)
        except ValueError:
            return None
        return struct.pack("<f" if size == 4 else "<d", value)
    value = parse_int(arg)
    if value is None:
        return None
    return (value & ((1 << (8 * size)) - 1)).to_bytes(size, "little")


def directive_bytes(lines: Sequence[AsmLine]) -> Optional[bytes]:
    """Little-endian image of numeric data directives, or None for strings/symbols."""
    from asm.parsing import parse_int
    out = bytearray()
    for line in lines:
        name = line.mnemonic
        if name in DATA_DIRECTIVE_SIZES:
            for arg in (line.args or "").split(","):
                chunk = element_bytes(name, arg)
                if chunk is None:
                    return None
                out += chunk
        elif name in ZERO_DIRECTIVES:
            count = parse_int((line.args or "0").split(",")[0])
            if count is None or count < 0:
                return None
            out += bytes(count)
        elif name in STRING_DIRECTIVES:
            return None
    return bytes(out)


def decode(lines: Sequence[AsmLine]) -> Tuple[Optional[int], int]:
    """(value, byte width) of numeric data fitting in 64 bits, else (None, 0)."""
    data = directive_bytes(lines)
    if not data or len(data) > 8:
        return None, 0
    return int.from_bytes(data, "little"), len(data)


def encode_global(value: int, width: int = 8, isa: Isa = Isa.ARMV8) -> Tuple[AsmLine, ...]:
    """Directive lines whose bytes equal value at width bytes."""
    names = {
        8: ".xword" if isa is Isa.ARMV8 else ".dword",
        4: ".word",
        2: ".hword" if isa is Isa.ARMV8 else ".half",
        1: ".byte",
    }
    if width not in names:
        raise ValueError(f"no single directive holds {width} bytes")
    value &= (1 << (8 * width)) - 1
    return (AsmLine(LineKind.DIRECTIVE, mnemonic=names[width], args=f"0x{value:0{2 * width}x}"),)


def collect_globals(program: Program) -> Dict[str, GlobalDefinition]:
    lines = program.all_lines()
    found: Dict[str, GlobalDefinition] = {}
    for i, line in enumerate(lines):
        if not line.is_label or line.label in found:
            continue
        body = definition_lines(lines, i)
        if not body:
            continue
        value, width = decode(body)
        found[line.label] = GlobalDefinition(line.label, body, value, width)
    return found


def lookup_global(program: Program, label: str) -> GlobalDefinition:
    """Definition of label; code labels yield an empty definition."""
    if label in program.globals:
        return program.globals[label]
    if label in program.defined_labels():
        return GlobalDefinition(label, ())
    raise UndefinedLabel(label)
