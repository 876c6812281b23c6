"""Data models for sketches, hole assignments and solver results."""

from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Mapping, Optional, Tuple, Union

from asm.isa import Isa
from asm.models import AsmLine, FloatImmediate, LabelRef, Shift
from asm.printing import format_label_ref
from asm.tokens import tokenize_lines
from blockfinder.models import SubseqSpan
from core.errors import ConfigError
from semantics.models import RegisterMap

HOLE_KINDS = ("immediate", "shift-amount", "register", "mnemonic", "shift", "float", "label")
IMMEDIATE_KINDS = ("immediate", "shift-amount")
SOLVE_STATUSES = ("solved", "unsat", "timeout")
OUTPUT_MODES = ("all-written", "last-written")

# int for immediates, str for registers and mnemonics.
HoleValue = Union[int, str, Shift, FloatImmediate, LabelRef]


@dataclass(frozen=True)
class HoleDomain:
    """What one hole ranges over.

    Immediate holes carry bounds (the legal encoding range cut to the search
    window) and no values; every other kind lists its values in search order.
    line is the index within the sketch's lines, operand the operand index or -1
    for the mnemonic.
    """
    kind: str
    values: Tuple[HoleValue, ...] = ()
    bounds: Optional[Tuple[int, int]] = None
    original: Optional[HoleValue] = None
    line: int = 0
    operand: int = 0

    def __post_init__(self) -> None:
        if self.kind not in HOLE_KINDS:
            raise ConfigError(f"hole kind must be one of {HOLE_KINDS}, got {self.kind!r}")

    @property
    def is_immediate(self) -> bool:
        return self.kind in IMMEDIATE_KINDS

    @property
    def size(self) -> int:
        if self.is_immediate:
            lo, hi = self.bounds
            return max(0, hi - lo + 1)
        return len(self.values)

    def contains(self, value: HoleValue) -> bool:
        if self.is_immediate:
            lo, hi = self.bounds
            return isinstance(value, int) and lo <= value <= hi
        return value in self.values


@dataclass(frozen=True)
class Sketch:
    """A candidate block with holes in place of its flagged tokens."""
    lines: Tuple[AsmLine, ...]
    isa: Isa
    domains: Mapping[int, HoleDomain] = field(default_factory=dict)
    origin: Optional[SubseqSpan] = None

    @property
    def holes(self) -> Tuple[int, ...]:
        return tuple(sorted(self.domains))

    @property
    def tokens(self) -> Tuple[str, ...]:
        return tuple(t.lead + t.text + t.trail for t in tokenize_lines(self.lines, self.isa))


def value_text(value: HoleValue, isa: Isa) -> Any:
    """JSON-friendly rendering of a hole value."""
    if isinstance(value, Shift):
        return value.op if value.amount is None else f"{value.op} {value.amount}"
    if isinstance(value, FloatImmediate):
        return value.text or f"0x{value.bits:016x}"
    if isinstance(value, LabelRef):
        return format_label_ref(value, isa)
    return value


@dataclass(frozen=True)
class HoleAssignment:
    values: Mapping[int, HoleValue] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.values)

    def to_dict(self, isa: Isa = Isa.ARMV8) -> Dict[str, Any]:
        return {f"?{h}": value_text(v, isa) for h, v in sorted(self.values.items())}


@dataclass(frozen=True)
class SolveResult:
    status: str
    assignment: Optional[HoleAssignment] = None
    counterexamples: int = 0
    tested: int = 0
    iterations: int = 0
    elapsed: float = 0.0
    reason: str = ""

    def __post_init__(self) -> None:
        if self.status not in SOLVE_STATUSES:
            raise ConfigError(f"solve status must be one of {SOLVE_STATUSES}, got {self.status!r}")

    @property
    def solved(self) -> bool:
        return self.status == "solved"

    def to_dict(self, isa: Isa = Isa.ARMV8) -> Dict[str, Any]:
        return {
            "status": self.status,
            "assignment": self.assignment.to_dict(isa) if self.assignment is not None else None,
            "counterexamples": self.counterexamples,
            "tested": self.tested,
            "iterations": self.iterations,
            "elapsed": round(self.elapsed, 4),
            "reason": self.reason,
        }


@dataclass(frozen=True)
class SolverConfig:
    """Budgets and search settings for cegis_solve."""
    max_enum: int = 1_000_000
    max_iters: int = 32
    time_budget: float = 10.0
    imm_window: Tuple[int, int] = (-4096, 4095)
    initial_random: int = 8
    outputs: str = "all-written"
    reg_map: Optional[RegisterMap] = None

    def __post_init__(self) -> None:
        if self.outputs not in OUTPUT_MODES:
            raise ConfigError(f"outputs must be one of {OUTPUT_MODES}, got {self.outputs!r}")
        if self.max_enum < 1 or self.max_iters < 1 or self.time_budget <= 0:
            raise ConfigError("max_enum and max_iters must be >= 1 and time_budget > 0")
        lo, hi = self.imm_window
        if lo > hi:
            raise ConfigError(f"empty immediate window {self.imm_window}")
        if self.initial_random < 0:
            raise ConfigError("initial_random must be >= 0")

    @classmethod
    def from_dict(cls, data: Mapping) -> "SolverConfig":
        known = {k: v for k, v in data.items() if k in cls.__dataclass_fields__}
        if "imm_window" in known:
            known["imm_window"] = tuple(known["imm_window"])
        if isinstance(known.get("reg_map"), Mapping):
            known["reg_map"] = RegisterMap.from_dict(known["reg_map"])
        return cls(**known)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["imm_window"] = list(self.imm_window)
        data["reg_map"] = self.reg_map.to_dict() if self.reg_map is not None else None
        return data
