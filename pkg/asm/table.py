"""Loader for the instruction table shipped in instructions.yaml."""

from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import yaml

from .isa import Isa

TABLE_PATH = Path(__file__).with_name("instructions.yaml")

ARM_CONDITIONS = (
    "eq", "ne", "cs", "hs", "cc", "lo", "mi", "pl", "vs", "vc",
    "hi", "ls", "ge", "lt", "gt", "le", "al",
)

# Classes whose instructions may sit inside a pure block.
PURE_CLASSES = frozenset({"alu", "move", "compare", "float", "address", "nop"})
# Classes with executable block semantics.
SOLVABLE_CLASSES = frozenset({"alu", "move", "compare", "float", "nop"})
BOUNDARY_CLASSES = frozenset({"branch", "call", "return", "memory"})


def is_bitmask_immediate(value: int, width: int = 64) -> bool:
    """True when value encodes as an ARM logical immediate at the given width.

    The pattern must repeat with an element size of 2 to width bits, and the
    element must be a single rotated run of ones.
    """
    mask = (1 << width) - 1
    v = value & mask
    if v in (0, mask):
        return False
    size = width
    while size > 2:
        half = size // 2
        low = v & ((1 << half) - 1)
        if low != (v >> half) & ((1 << half) - 1):
            break
        size = half
    elem = v & ((1 << size) - 1)
    rotated = ((elem >> 1) | ((elem & 1) << (size - 1)))
    # one run of ones has exactly two edges around the circle
    return bin(elem ^ rotated).count("1") == 2


@dataclass(frozen=True)
class InstructionSpec:
    mnemonic: str
    isa: Isa
    klass: str
    slots: Tuple[str, ...]
    imm_range: Union[Tuple[int, int], str, None] = None
    width: str = "op"
    group: Optional[str] = None
    rule: Optional[str] = None
    flags: Optional[str] = None
    reads_dst: bool = False
    shift: str = "operand"
    scale: int = 0

    @property
    def required_slots(self) -> Tuple[str, ...]:
        return tuple(s for s in self.slots if not s.endswith("?"))

    @property
    def has_optional_shift(self) -> bool:
        return "sh?" in self.slots

    @property
    def is_word_op(self) -> bool:
        return self.width == "word"

    @property
    def writes_dst(self) -> bool:
        return bool(self.slots) and self.slots[0] == "d"

    def legal_immediate(self, value: int, view_width: int = 64) -> bool:
        lo, hi = self.immediate_bounds(view_width)
        if not lo <= value <= hi:
            return False
        if self.imm_range == "bitmask":
            return is_bitmask_immediate(value, view_width)
        return True

    def immediate_bounds(self, view_width: int = 64) -> Tuple[int, int]:
        if self.imm_range == "shift":
            return 0, view_width - 1
        if isinstance(self.imm_range, tuple):
            return self.imm_range
        return -(1 << 63), (1 << 64) - 1


@lru_cache(maxsize=1)
def _load() -> Dict[Isa, Dict[str, InstructionSpec]]:
    raw = yaml.safe_load(TABLE_PATH.read_text(encoding="utf-8"))
    table: Dict[Isa, Dict[str, InstructionSpec]] = {}
    for isa_name, entries in raw.items():
        isa = Isa(isa_name)
        specs: Dict[str, InstructionSpec] = {}
        for mnemonic, entry in entries.items():
            imm = entry.get("imm")
            specs[mnemonic] = InstructionSpec(
                mnemonic=mnemonic,
                isa=isa,
                klass=entry["class"],
                slots=tuple(entry.get("slots", ())),
                imm_range=tuple(imm) if isinstance(imm, list) else imm,
                width=entry.get("width", "op"),
                group=entry.get("group"),
                rule=entry.get("rule"),
                flags=entry.get("flags"),
                reads_dst=bool(entry.get("reads_dst", False)),
                shift=entry.get("shift", "operand"),
                scale=int(entry.get("scale", 0)),
            )
        table[isa] = specs
    return table


def lookup(isa: Isa, mnemonic: str) -> Optional[InstructionSpec]:
    """Spec for a mnemonic, or None when it is outside the supported subset."""
    specs = _load()[isa]
    key = mnemonic.lower()
    if key in specs:
        return specs[key]
    if isa is Isa.ARMV8 and key.startswith("b.") and key[2:] in ARM_CONDITIONS:
        return specs["b.cond"]
    return None


def is_supported(isa: Isa, mnemonic: str) -> bool:
    return lookup(isa, mnemonic) is not None


def mnemonics(isa: Isa) -> Tuple[str, ...]:
    return tuple(_load()[isa])


def group_members(isa: Isa, group: Optional[str]) -> Tuple[str, ...]:
    """Mnemonics sharing a functional class, in table order."""
    if group is None:
        return ()
    return tuple(m for m, spec in _load()[isa].items() if spec.group == group)
