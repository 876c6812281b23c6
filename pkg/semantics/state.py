"""Register-file state: scalar MachineState and the vectorised LaneState."""

from dataclasses import dataclass, field
from typing import Dict, Iterable, Mapping, Optional

import numpy as np

from asm.isa import ARM_FLAGS, Isa, is_zero_register, register_info

FULL_WIDTH = 64
FLAGS_WIDTH = 4


def mask(n: int) -> np.uint64:
    return np.uint64((1 << n) - 1)


def int_mask(n: int) -> int:
    return (1 << n) - 1


def canonical(isa: Isa, name: str) -> str:
    if name == ARM_FLAGS:
        return name
    info = register_info(isa, name)
    return info.canonical if info else name


def view_width(isa: Isa, name: str, width: int = FULL_WIDTH) -> int:
    """Bits visible through a register name at register width `width`.

    32-bit views (ARMv8 w/s registers) scale to half the register width so that
    reduced-width runs keep the zero/sign-extension structure.
    """
    if name == ARM_FLAGS:
        return FLAGS_WIDTH
    info = register_info(isa, name)
    if info is not None and info.width == 32:
        return width // 2
    return width


@dataclass
class LaneState:
    """Register values across many independent lanes (uint64 arrays, masked to width)."""
    isa: Isa
    width: int
    lanes: int
    regs: Dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def from_inputs(cls, isa: Isa, inputs: Mapping[str, Iterable[int]], width: int = FULL_WIDTH,
                    lanes: Optional[int] = None) -> "LaneState":
        arrays = {name: np.atleast_1d(np.asarray(values, dtype=np.uint64)) for name, values in inputs.items()}
        if lanes is None:
            lanes = max((len(a) for a in arrays.values()), default=1)
        state = cls(isa, width, lanes)
        for name, values in arrays.items():
            state.regs[canonical(isa, name)] = np.broadcast_to(values, (lanes,)) & mask(width)
        return state

    def zeros(self) -> np.ndarray:
        return np.zeros(self.lanes, dtype=np.uint64)

    def full(self, value: int) -> np.ndarray:
        return np.full(self.lanes, value & int_mask(64), dtype=np.uint64)

    def read(self, name: str) -> np.ndarray:
        if is_zero_register(self.isa, name):
            return self.zeros()
        value = self.regs.get(canonical(self.isa, name))
        if value is None:
            return self.zeros()
        return value & mask(view_width(self.isa, name, self.width))

    def write(self, name: str, value: np.ndarray) -> None:
        """Store through a view: narrow views zero the upper bits."""
        if is_zero_register(self.isa, name):
            return
        value = np.broadcast_to(np.asarray(value, dtype=np.uint64), (self.lanes,))
        self.regs[canonical(self.isa, name)] = value & mask(view_width(self.isa, name, self.width))

    def copy(self) -> "LaneState":
        return LaneState(self.isa, self.width, self.lanes, {k: v.copy() for k, v in self.regs.items()})


@dataclass(frozen=True)
class MachineState:
    """A single register file: canonical register name to unsigned value.

    Flags live under the pseudo-register "nzcv" (N=8, Z=4, C=2, V=1).
    """
    isa: Isa
    registers: Mapping[str, int] = field(default_factory=dict)
    width: int = FULL_WIDTH

    def read(self, name: str) -> int:
        if is_zero_register(self.isa, name):
            return 0
        return self.registers.get(canonical(self.isa, name), 0) & int_mask(view_width(self.isa, name, self.width))

    def with_register(self, name: str, value: int) -> "MachineState":
        if is_zero_register(self.isa, name):
            return self
        regs = dict(self.registers)
        regs[canonical(self.isa, name)] = value & int_mask(view_width(self.isa, name, self.width))
        return MachineState(self.isa, regs, self.width)

    @property
    def flags(self) -> Dict[str, bool]:
        bits = self.registers.get(ARM_FLAGS, 0)
        return {"N": bool(bits & 8), "Z": bool(bits & 4), "C": bool(bits & 2), "V": bool(bits & 1)}

    def to_lanes(self) -> LaneState:
        state = LaneState(self.isa, self.width, 1)
        for name, value in self.registers.items():
            state.regs[name] = np.array([value & int_mask(self.width if name != ARM_FLAGS else 4)],
                                        dtype=np.uint64)
        return state

    @classmethod
    def from_lanes(cls, lanes: LaneState, lane: int = 0) -> "MachineState":
        return cls(lanes.isa, {k: int(v[lane]) for k, v in lanes.regs.items()}, lanes.width)
