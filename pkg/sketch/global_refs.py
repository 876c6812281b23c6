"""Resolution of references to globals the candidate program does not define."""

import logging
import threading
from dataclasses import dataclass
from typing import Any, Dict, Hashable, Optional, Tuple, Union

from asm.isa import Isa
from asm.models import AsmLine, GlobalDefinition, Program
from asm.parsing import parse_int
from asm.printing import format_line
from blockfinder.globals import encode_global
from core.constants import DATA_DIRECTIVE_SIZES, STRING_DIRECTIVES, ZERO_DIRECTIVES
from core.errors import ConfigError, UndecodableRequirement

logger = logging.getLogger(__name__)

RESOLUTION_KINDS = ("reuse", "create", "inline")
SLOTS = ("label", "numeric")

# Spellings that differ between the two assemblers.
_DIRECTIVE_TWINS = {
    Isa.ARMV8: {".dword": ".xword", ".half": ".hword"},
    Isa.RISCV64: {".xword": ".dword", ".hword": ".half"},
}
_PORTABLE = frozenset(DATA_DIRECTIVE_SIZES) | frozenset(STRING_DIRECTIVES) | frozenset(ZERO_DIRECTIVES) | {
    ".align", ".p2align", ".balign",
}


@dataclass(frozen=True)
class GlobalResolution:
    kind: str
    label: Optional[str] = None
    lines: Tuple[AsmLine, ...] = ()
    value: Optional[int] = None
    text: Optional[str] = None

    def __post_init__(self) -> None:
        if self.kind not in RESOLUTION_KINDS:
            raise ConfigError(f"resolution kind must be one of {RESOLUTION_KINDS}, got {self.kind!r}")

    def to_dict(self, isa: Isa = Isa.ARMV8) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "label": self.label,
            "lines": [format_line(l, isa).strip() for l in self.lines],
            "value": None if self.value is None else f"0x{self.value:x}",
            "text": self.text,
        }


class LabelAllocator:
    """Thread-safe source of fresh global labels.

    Each requirement gets one label for the allocator's lifetime, so resolving
    the same requirement twice yields the same definition.
    """

    def __init__(self, prefix: str = ".LC_gs") -> None:
        self.prefix = prefix
        self._lock = threading.Lock()
        self._next = 0
        self._memo: Dict[Hashable, Tuple[str, Tuple[AsmLine, ...]]] = {}

    def allocate(self, key: Hashable, lines: Tuple[AsmLine, ...], taken=()) -> Tuple[str, Tuple[AsmLine, ...], bool]:
        """(label, lines, fresh) for key; fresh is False when key was seen before."""
        with self._lock:
            if key in self._memo:
                label, lines = self._memo[key]
                return label, lines, False
            while f"{self.prefix}{self._next}" in taken:
                self._next += 1
            label = f"{self.prefix}{self._next}"
            self._next += 1
            self._memo[key] = (label, lines)
            logger.debug("allocated %s", label)
            return label, lines, True

    def created(self) -> Dict[str, Tuple[AsmLine, ...]]:
        with self._lock:
            return {label: lines for label, lines in self._memo.values()}


def _portable_text(lines, isa: Isa) -> Tuple[Tuple[str, str], ...]:
    """Data directives as (mnemonic, args) in one spelling per target isa."""
    twins = _DIRECTIVE_TWINS[isa]
    return tuple((twins.get(l.mnemonic, l.mnemonic), (l.args or "").strip())
                 for l in lines if l.mnemonic not in (".align", ".p2align", ".balign"))


def _symbolic(line: AsmLine) -> bool:
    if line.mnemonic not in DATA_DIRECTIVE_SIZES or line.mnemonic in (".float", ".double"):
        return False
    return any(parse_int(a.strip()) is None for a in (line.args or "").split(","))


def _copy_lines(definition: GlobalDefinition, isa: Isa) -> Tuple[AsmLine, ...]:
    twins = _DIRECTIVE_TWINS[isa]
    out = []
    for line in definition.lines:
        if line.mnemonic not in _PORTABLE or _symbolic(line):
            raise UndecodableRequirement(definition.label)
        mnemonic = twins.get(line.mnemonic, line.mnemonic)
        out.append(line if mnemonic == line.mnemonic else line.with_mnemonic(mnemonic))
    return tuple(out)


def _existing(p_y: Program, value: Optional[int], width: int,
              text: Optional[Tuple[Tuple[str, str], ...]]) -> Optional[GlobalDefinition]:
    for definition in p_y.globals.values():
        if value is not None and definition.decoded_value == value and definition.width == width:
            return definition
        if text is not None and _portable_text(definition.lines, p_y.isa) == text:
            return definition
    return None


def resolve_global_reference(p_y: Program, slot: str, required: Union[GlobalDefinition, int],
                             allocator: LabelAllocator, isa: Optional[Isa] = None,
                             width: int = 8) -> GlobalResolution:
    """Reuse, create or inline the definition a candidate reference needs.

    A numeric slot inlines the required value as text. A label slot reuses any
    global of p_y with the same decoded value (or the same directives, for data
    without a decoding), else creates a fresh label holding the value.
    """
    if slot not in SLOTS:
        raise ConfigError(f"slot must be one of {SLOTS}, got {slot!r}")
    isa = isa or p_y.isa
    if isinstance(required, GlobalDefinition):
        value, size = required.decoded_value, required.width
        label = required.label
    else:
        value, size, label = required & ((1 << (8 * width)) - 1), width, None
    if slot == "numeric":
        if value is None:
            raise UndecodableRequirement(label)
        signed = value - (1 << (8 * size)) if size and value >> (8 * size - 1) else value
        return GlobalResolution("inline", value=value, text=str(signed))

    if value is None and (not isinstance(required, GlobalDefinition) or not required.lines):
        raise UndecodableRequirement(label)
    text = None if value is not None else _portable_text(required.lines, isa)
    found = _existing(p_y, value, size, text)
    if found is not None:
        logger.debug("reusing %s for %s", found.label, label or f"0x{value:x}")
        return GlobalResolution("reuse", found.label, found.lines, found.decoded_value)

    if value is not None and size in (1, 2, 4, 8):
        key: Hashable = ("value", value, size)
        lines = encode_global(value, size, isa)
    else:
        key = ("text", text or _portable_text(required.lines, isa))
        lines = _copy_lines(required, isa)
    new_label, lines, _ = allocator.allocate(key, lines, taken=p_y.defined_labels())
    logger.debug("created %s for %s", new_label, label or f"0x{value:x}")
    return GlobalResolution("create", new_label, lines, value)
