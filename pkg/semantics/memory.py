"""Flat little-endian memory and the data image laid out from a program's directives."""

import codecs
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from asm.layout import section_of
from asm.models import AsmLine, Program
from asm.parsing import parse_int
from blockfinder.globals import element_bytes
from core.constants import DATA_DIRECTIVE_SIZES, STRING_DIRECTIVES, ZERO_DIRECTIVES
from core.errors import ExecutionError, MemoryFault

CODE_BASE = 0x400000
DATA_BASE = 0x10000000
STACK_TOP = 0x7FFF0000
STACK_SIZE = 1 << 20
ARGV_SIZE = 1 << 12
# Return address planted in the link register before entering main.
EXIT_ADDRESS = 0xFFFF_FFF0

STRING_RE = re.compile(r'"((?:[^"\\]|\\.)*)"')
SYMBOL_EXPR_RE = re.compile(r'^([A-Za-z_.$][\w.$]*)\s*(?:([-+])\s*(\w+))?$')


def unescape(text: str) -> bytes:
    """Bytes of an assembler string literal body (C escapes, octal included)."""
    return codecs.decode(text.encode("latin-1"), "unicode_escape").encode("latin-1")


@dataclass
class Region:
    name: str
    start: int
    data: bytearray

    @property
    def end(self) -> int:
        return self.start + len(self.data)


@dataclass
class FlatMemory:
    regions: List[Region] = field(default_factory=list)

    def map(self, name: str, start: int, size: int, content: bytes = b"") -> Region:
        data = bytearray(size)
        data[:len(content)] = content
        region = Region(name, start, data)
        self.regions.append(region)
        return region

    def _find(self, address: int, size: int) -> Region:
        for region in self.regions:
            if region.start <= address and address + size <= region.end:
                return region
        raise MemoryFault(address, size)

    def read(self, address: int, size: int, signed: bool = False) -> int:
        region = self._find(address, size)
        offset = address - region.start
        return int.from_bytes(region.data[offset:offset + size], "little", signed=signed)

    def write(self, address: int, size: int, value: int) -> None:
        region = self._find(address, size)
        offset = address - region.start
        region.data[offset:offset + size] = (value & ((1 << (8 * size)) - 1)).to_bytes(size, "little")

    def read_bytes(self, address: int, size: int) -> bytes:
        region = self._find(address, size)
        offset = address - region.start
        return bytes(region.data[offset:offset + size])

    def read_cstring(self, address: int, limit: int = 1 << 16) -> bytes:
        out = bytearray()
        while len(out) < limit:
            byte = self.read(address + len(out), 1)
            if byte == 0:
                break
            out.append(byte)
        return bytes(out)


def _align(value: int, line: AsmLine) -> int:
    arg = parse_int((line.args or "0").split(",")[0].strip()) or 0
    boundary = arg if line.mnemonic == ".balign" else 1 << arg
    if boundary <= 1:
        return value
    return (value + boundary - 1) // boundary * boundary


def _directive_size(line: AsmLine) -> int:
    name = line.mnemonic
    args = line.args or ""
    if name in DATA_DIRECTIVE_SIZES:
        return DATA_DIRECTIVE_SIZES[name] * len([a for a in args.split(",") if a.strip()])
    if name in ZERO_DIRECTIVES:
        return parse_int(args.split(",")[0].strip()) or 0
    if name in STRING_DIRECTIVES:
        size = sum(len(unescape(s)) for s in STRING_RE.findall(args))
        return size + (len(STRING_RE.findall(args)) if name != ".ascii" else 0)
    return 0


@dataclass
class ProgramImage:
    """Addresses of every label plus the initial data bytes and instruction list."""
    instructions: List[AsmLine] = field(default_factory=list)
    symbols: Dict[str, int] = field(default_factory=dict)
    data: bytearray = field(default_factory=bytearray)
    got: Dict[str, int] = field(default_factory=dict)

    def code_address(self, index: int) -> int:
        return CODE_BASE + 4 * index

    def code_index(self, address: int) -> Optional[int]:
        index, rem = divmod(address - CODE_BASE, 4)
        if rem or not 0 <= index < len(self.instructions):
            return None
        return index


def _is_data(line: AsmLine) -> bool:
    return line.is_directive and (line.mnemonic in DATA_DIRECTIVE_SIZES or line.mnemonic in ZERO_DIRECTIVES
                                  or line.mnemonic in STRING_DIRECTIVES)


def _symbol_expr(arg: str, symbols: Dict[str, int]) -> Optional[int]:
    m = SYMBOL_EXPR_RE.match(arg.strip())
    if m is None or m.group(1) not in symbols:
        return None
    value = symbols[m.group(1)]
    if m.group(3):
        delta = parse_int(m.group(3))
        if delta is None:
            return None
        value = value + delta if m.group(2) == "+" else value - delta
    return value


def _emit(line: AsmLine, symbols: Dict[str, int]) -> bytes:
    name = line.mnemonic
    args = line.args or ""
    if name in STRING_DIRECTIVES:
        terminator = b"" if name == ".ascii" else b"\0"
        return b"".join(unescape(s) + terminator for s in STRING_RE.findall(args))
    if name in ZERO_DIRECTIVES:
        return bytes(_directive_size(line))
    size = DATA_DIRECTIVE_SIZES[name]
    out = bytearray()
    for arg in (a for a in args.split(",") if a.strip()):
        chunk = element_bytes(name, arg)
        if chunk is None:
            value = _symbol_expr(arg, symbols)
            if value is None:
                raise ExecutionError(f"cannot lay out {name} {arg.strip()!r}")
            chunk = (value & ((1 << (8 * size)) - 1)).to_bytes(size, "little")
        out += chunk
    return bytes(out)


def _common(line: AsmLine) -> Optional[Tuple[str, int, int]]:
    parts = [p.strip() for p in (line.args or "").split(",")]
    if len(parts) < 2:
        return None
    size = parse_int(parts[1])
    align = parse_int(parts[2]) if len(parts) > 2 else 8
    if size is None:
        return None
    return parts[0], size, align or 1


def layout_program(program: Program) -> ProgramImage:
    """Assign addresses to code and data labels and build the initial data image.

    A label binds to the next instruction when one follows before any data
    directive, otherwise to the data that follows it.
    """
    lines = program.all_lines()
    image = ProgramImage()
    pending: List[str] = []
    data_items: List[Tuple[int, AsmLine]] = []
    cursor = DATA_BASE
    section = "text"
    for line in lines:
        section = section_of(line, section)
        if line.is_label:
            pending.append(line.label)
        elif line.is_instruction:
            for label in pending:
                image.symbols.setdefault(label, image.code_address(len(image.instructions)))
            pending = []
            image.instructions.append(line)
        elif line.mnemonic in (".align", ".p2align", ".balign") and section == "data":
            cursor = _align(cursor, line)
        elif _is_data(line):
            for label in pending:
                image.symbols.setdefault(label, cursor)
            pending = []
            data_items.append((cursor, line))
            cursor += _directive_size(line)
        elif line.mnemonic in (".comm", ".lcomm"):
            common = _common(line)
            if common is not None:
                name, size, align = common
                cursor = (cursor + align - 1) // align * align
                image.symbols.setdefault(name, cursor)
                data_items.append((cursor, AsmLine(line.kind, mnemonic=".zero", args=str(size))))
                cursor += size
    for label in pending:
        image.symbols.setdefault(label, cursor)
    cursor = (cursor + 7) // 8 * 8
    for name in _got_symbols(image.instructions):
        image.got[name] = cursor
        cursor += 8
    image.data = bytearray(cursor - DATA_BASE)
    for address, line in data_items:
        chunk = _emit(line, image.symbols)
        image.data[address - DATA_BASE:address - DATA_BASE + len(chunk)] = chunk
    for name, slot in image.got.items():
        if name in image.symbols:
            offset = slot - DATA_BASE
            image.data[offset:offset + 8] = image.symbols[name].to_bytes(8, "little")
    return image


def _got_symbols(instructions: List[AsmLine]) -> List[str]:
    names: List[str] = []
    for line in instructions:
        for ref in line.label_refs():
            if ref.modifier in ("got", "got_lo12") and ref.name not in names:
                names.append(ref.name)
    return names
