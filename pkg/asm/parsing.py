"""Parser for GNU-assembler source in the supported ARMv8 / RISC-V subset."""

import logging
import re
import struct
from typing import List, Optional, Tuple

from core.constants import DIRECTIVE_RE, HOLE_RE, INSTRUCTION_RE, LABEL_RE
from core.errors import UnparsableLine

from .isa import Isa, is_register
from .layout import build_program
from .models import (
    AsmLine, FloatImmediate, Hole, Immediate, IndexMode, LabelRef, LineKind, Memory,
    Operand, Program, RawOperand, Register, Shift,
)
from .table import lookup

logger = logging.getLogger(__name__)

INT_RE = re.compile(r'^#?([-+]?)(0[xX][0-9a-fA-F]+|0[bB][01]+|\d+)$')
FLOAT_RE = re.compile(r'^#?[-+]?(?:\d+\.\d*(?:[eE][-+]?\d+)?|\d+[eE][-+]?\d+|\.\d+(?:[eE][-+]?\d+)?)$')
SHIFT_RE = re.compile(
    r'^(lsl|lsr|asr|ror|sxtw|uxtw|sxtx|uxtx|sxth|uxth|sxtb|uxtb)(?:\s+(#?)(\d+))?$', re.IGNORECASE
)
SYMBOL_RE = re.compile(r'^[A-Za-z_.$][\w.$]*$')
ARM_RELOC_RE = re.compile(r'^:(\w+):([A-Za-z_.$][\w.$]*)$')
RISCV_RELOC_RE = re.compile(r'^%(\w+)\(\s*([A-Za-z_.$][\w.$]*)\s*\)$')
PLT_RE = re.compile(r'^([A-Za-z_.$][\w.$]*)@(\w+)$')
ARM_MEMORY_RE = re.compile(r'^\[\s*([^\],]+?)\s*(?:,\s*(.+?))?\s*\](!?)$')
RISCV_MEMORY_RE = re.compile(
    r'^(?:%(\w+)\(\s*([A-Za-z_.$][\w.$]*)\s*\)|([-+]?(?:0[xX][0-9a-fA-F]+|\d+)))?\(\s*(\w+)\s*\)$'
)


def parse_int(text: str) -> Optional[int]:
    """Integer literal value ("#-16", "0x10", "48"), or None."""
    m = INT_RE.match(text.strip())
    if not m:
        return None
    sign, digits = m.groups()
    value = int(digits, 0)
    return -value if sign == "-" else value


def float_bits(value: float) -> int:
    """IEEE-754 double bit pattern of value."""
    return struct.unpack("<Q", struct.pack("<d", value))[0]


def bits_float(bits: int) -> float:
    return struct.unpack("<d", struct.pack("<Q", bits & (2**64 - 1)))[0]


def strip_comment(text: str, isa: Isa) -> Tuple[str, str]:
    """Split a line into (code, comment) without looking inside string literals."""
    in_string = False
    escaped = False
    for i, ch in enumerate(text):
        if in_string:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
            continue
        if ch == '"':
            in_string = True
        elif ch == "/" and text.startswith("//", i):
            return text[:i], text[i:]
        elif ch == "/" and text.startswith("/*", i):
            end = text.find("*/", i + 2)
            if end != -1:
                code, comment = strip_comment(text[:i] + " " + text[end + 2:], isa)
                return code, text[i:end + 2] + comment
            return text[:i], text[i:]
        elif ch == "#" and isa is Isa.RISCV64:
            return text[:i], text[i:]
    return text, ""


def split_operands(text: str) -> List[str]:
    """Split an operand list on top-level commas (brackets, parentheses and strings nest)."""
    parts: List[str] = []
    depth = 0
    in_string = False
    current = []
    for ch in text:
        if in_string:
            current.append(ch)
            if ch == '"':
                in_string = False
            continue
        if ch == '"':
            in_string = True
        elif ch in "[(":
            depth += 1
        elif ch in "])":
            depth -= 1
            if depth < 0:
                raise ValueError("unbalanced closing bracket")
        elif ch == "," and depth == 0:
            parts.append("".join(current).strip())
            current = []
            continue
        current.append(ch)
    if depth != 0 or in_string:
        raise ValueError("unbalanced bracket or quote")
    tail = "".join(current).strip()
    if tail or parts:
        parts.append(tail)
    if any(not p for p in parts):
        raise ValueError("empty operand")
    return parts


def _parse_label_ref(text: str, isa: Isa) -> Optional[LabelRef]:
    if isa is Isa.ARMV8:
        m = ARM_RELOC_RE.match(text)
        if m:
            return LabelRef(m.group(2), m.group(1).lower())
    else:
        m = RISCV_RELOC_RE.match(text)
        if m:
            return LabelRef(m.group(2), m.group(1).lower())
    m = PLT_RE.match(text)
    if m:
        return LabelRef(m.group(1), m.group(2).lower())
    if SYMBOL_RE.match(text):
        return LabelRef(text)
    return None


def _parse_arm_memory(m: re.Match, isa: Isa) -> Optional[Memory]:
    base, rest, bang = m.group(1).strip().lower(), m.group(2), m.group(3)
    if not is_register(isa, base):
        return None
    mode = IndexMode.PRE if bang else IndexMode.OFFSET
    if rest is None:
        return Memory(base, 0, mode)
    value = parse_int(rest)
    if value is not None:
        return Memory(base, value, mode, has_offset=True, hash=rest.strip().startswith("#"))
    ref = _parse_label_ref(rest.strip(), isa)
    if ref is not None and ref.modifier is not None:
        return Memory(base, 0, mode, offset_ref=ref)
    parts = [p.strip() for p in rest.split(",")]
    if is_register(isa, parts[0]):
        extend = None
        if len(parts) == 2:
            sm = SHIFT_RE.match(parts[1])
            if not sm:
                return None
            amount = int(sm.group(3)) if sm.group(3) is not None else None
            extend = Shift(sm.group(1).lower(), amount, hash=sm.group(2) == "#")
        elif len(parts) > 2:
            return None
        return Memory(base, 0, mode, index=parts[0].lower(), extend=extend)
    return None


def parse_operand(text: str, isa: Isa) -> Operand:
    """Parse one operand. Text that matches no operand production becomes a RawOperand."""
    text = text.strip()
    m = HOLE_RE.match(text)
    if m:
        return Hole(int(m.group(1)))
    if is_register(isa, text):
        return Register(text.lower())
    value = parse_int(text)
    if value is not None:
        return Immediate(value, text)
    if FLOAT_RE.match(text):
        return FloatImmediate(float_bits(float(text.lstrip("#"))), text)
    if isa is Isa.ARMV8:
        m = SHIFT_RE.match(text)
        if m:
            amount = int(m.group(3)) if m.group(3) is not None else None
            return Shift(m.group(1).lower(), amount, hash=m.group(2) == "#")
        m = ARM_MEMORY_RE.match(text)
        if m:
            mem = _parse_arm_memory(m, isa)
            if mem is not None:
                return mem
    else:
        m = RISCV_MEMORY_RE.match(text)
        if m and is_register(isa, m.group(4)):
            base = m.group(4).lower()
            if m.group(2):
                return Memory(base, 0, offset_ref=LabelRef(m.group(2), m.group(1).lower()))
            if m.group(3):
                return Memory(base, parse_int(m.group(3)), has_offset=True)
            return Memory(base, 0)
    ref = _parse_label_ref(text, isa)
    if ref is not None:
        return ref
    return RawOperand(text)


def _merge_post_index(operands: List[Operand]) -> List[Operand]:
    """Fold ARM post-index writeback ("[x0], 16") into a single memory operand."""
    merged: List[Operand] = []
    i = 0
    while i < len(operands):
        op = operands[i]
        nxt = operands[i + 1] if i + 1 < len(operands) else None
        if (isinstance(op, Memory) and op.mode is IndexMode.OFFSET and not op.has_offset
                and op.offset_ref is None and op.index is None and isinstance(nxt, Immediate)):
            merged.append(Memory(op.base, nxt.value, IndexMode.POST, has_offset=True,
                                 hash=nxt.text.startswith("#")))
            i += 2
            continue
        merged.append(op)
        i += 1
    return merged


def _parse_instruction(code: str, isa: Isa, index: int, raw: str, comment: str) -> AsmLine:
    m = INSTRUCTION_RE.match(code)
    if not m:
        raise UnparsableLine(index, raw, "not a label, directive or instruction")
    mnemonic = m.group(1).lower()
    try:
        texts = split_operands(m.group(2) or "")
    except ValueError as exc:
        raise UnparsableLine(index, raw, str(exc)) from exc
    operands = [parse_operand(t, isa) for t in texts]
    if isa is Isa.ARMV8:
        operands = _merge_post_index(operands)
    opaque = not mnemonic.startswith("?") and lookup(isa, mnemonic) is None
    if opaque:
        logger.debug("line %d: opaque instruction %r", index, mnemonic)
    return AsmLine(LineKind.INSTRUCTION, mnemonic, tuple(operands), opaque=opaque,
                   raw=raw, index=index, comment=comment)


def parse_line(text: str, isa: Isa, index: int = 0) -> List[AsmLine]:
    """Parse one source line into zero (blank), one, or two (label + statement) lines."""
    code, comment = strip_comment(text, isa)
    code = code.strip()
    if not code:
        return []
    lines: List[AsmLine] = []
    m = LABEL_RE.match(code)
    if m:
        lines.append(AsmLine(LineKind.LABEL, label=m.group(1), raw=text, index=index,
                             comment=comment if not m.group(2) else ""))
        code = m.group(2).strip()
        if not code:
            return lines
    elif code.split(None, 1)[0].endswith(":"):
        raise UnparsableLine(index, text, "malformed label")
    if code.startswith("."):
        d = DIRECTIVE_RE.match(code)
        if not d:
            raise UnparsableLine(index, text, "malformed directive")
        args = d.group(2).strip() if d.group(2) else None
        lines.append(AsmLine(LineKind.DIRECTIVE, mnemonic=d.group(1).lower(), args=args or None,
                             raw=text, index=index, comment=comment))
        return lines
    lines.append(_parse_instruction(code, isa, index, text, comment))
    return lines


def parse_lines(text: str, isa: Isa) -> List[AsmLine]:
    """Parse source text to a flat line list, without function detection."""
    lines: List[AsmLine] = []
    for index, raw in enumerate(text.splitlines()):
        lines.extend(parse_line(raw, isa, index))
    return lines


def parse_program(text: str, isa) -> Program:
    """Parse GNU-assembler source text into a Program."""
    isa = Isa.parse(isa)
    lines = parse_lines(text, isa)
    program = build_program(lines, isa)
    logger.debug("parsed %d lines into %d functions (%s)", len(lines), len(program.functions), isa.value)
    return program
