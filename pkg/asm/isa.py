"""Register files of the supported instruction-set architectures."""

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from pathlib import Path
from typing import Dict, Optional, Tuple, Union


class Isa(str, Enum):
    ARMV8 = "armv8"
    RISCV64 = "riscv64"

    @classmethod
    def parse(cls, value: Union[str, "Isa"]) -> "Isa":
        if isinstance(value, Isa):
            return value
        key = value.strip().lower()
        aliases = {"arm": cls.ARMV8, "aarch64": cls.ARMV8, "arm64": cls.ARMV8,
                   "riscv": cls.RISCV64, "rv64": cls.RISCV64, "risc-v": cls.RISCV64}
        if key in aliases:
            return aliases[key]
        return cls(key)

    @classmethod
    def from_path(cls, path: Union[str, Path]) -> Optional["Isa"]:
        """ISA from the file-name convention: name.arm.s / name.rv.s."""
        name = Path(path).name.lower()
        if name.endswith((".arm.s", ".armv8.s", ".aarch64.s")):
            return cls.ARMV8
        if name.endswith((".rv.s", ".riscv.s", ".riscv64.s")):
            return cls.RISCV64
        return None


@dataclass(frozen=True)
class RegisterInfo:
    """One architectural name for a register.

    canonical is the storage slot the name reads and writes; width is the view width
    (32 for ARMv8 w/s registers, otherwise 64).
    """
    name: str
    canonical: str
    width: int
    kind: str  # "gpr", "fpr", "sp", "zero"


RISCV_ABI = (
    "zero", "ra", "sp", "gp", "tp", "t0", "t1", "t2",
    "s0", "s1", "a0", "a1", "a2", "a3", "a4", "a5",
    "a6", "a7", "s2", "s3", "s4", "s5", "s6", "s7",
    "s8", "s9", "s10", "s11", "t3", "t4", "t5", "t6",
)
RISCV_FP_ABI = (
    "ft0", "ft1", "ft2", "ft3", "ft4", "ft5", "ft6", "ft7",
    "fs0", "fs1", "fa0", "fa1", "fa2", "fa3", "fa4", "fa5",
    "fa6", "fa7", "fs2", "fs3", "fs4", "fs5", "fs6", "fs7",
    "fs8", "fs9", "fs10", "fs11", "ft8", "ft9", "ft10", "ft11",
)

ARM_FLAGS = "nzcv"


def _arm_registers() -> Dict[str, RegisterInfo]:
    regs: Dict[str, RegisterInfo] = {}
    for n in range(31):
        regs[f"x{n}"] = RegisterInfo(f"x{n}", f"x{n}", 64, "gpr")
        regs[f"w{n}"] = RegisterInfo(f"w{n}", f"x{n}", 32, "gpr")
    for n in range(32):
        regs[f"d{n}"] = RegisterInfo(f"d{n}", f"d{n}", 64, "fpr")
        regs[f"s{n}"] = RegisterInfo(f"s{n}", f"d{n}", 32, "fpr")
    regs["fp"] = RegisterInfo("fp", "x29", 64, "gpr")
    regs["lr"] = RegisterInfo("lr", "x30", 64, "gpr")
    regs["sp"] = RegisterInfo("sp", "sp", 64, "sp")
    regs["wsp"] = RegisterInfo("wsp", "sp", 32, "sp")
    regs["xzr"] = RegisterInfo("xzr", "xzr", 64, "zero")
    regs["wzr"] = RegisterInfo("wzr", "xzr", 32, "zero")
    return regs


def _riscv_registers() -> Dict[str, RegisterInfo]:
    regs: Dict[str, RegisterInfo] = {}
    for n, abi in enumerate(RISCV_ABI):
        kind = "zero" if abi == "zero" else "sp" if abi == "sp" else "gpr"
        regs[abi] = RegisterInfo(abi, abi, 64, kind)
        regs[f"x{n}"] = RegisterInfo(f"x{n}", abi, 64, kind)
    regs["fp"] = RegisterInfo("fp", "s0", 64, "gpr")
    for n, abi in enumerate(RISCV_FP_ABI):
        regs[abi] = RegisterInfo(abi, abi, 64, "fpr")
        regs[f"f{n}"] = RegisterInfo(f"f{n}", abi, 64, "fpr")
    return regs


_REGISTERS = {Isa.ARMV8: _arm_registers(), Isa.RISCV64: _riscv_registers()}


def register_info(isa: Isa, name: str) -> Optional[RegisterInfo]:
    return _REGISTERS[isa].get(name.lower())


def is_register(isa: Isa, name: str) -> bool:
    return name.lower() in _REGISTERS[isa]


def other_isa(isa: Isa) -> Isa:
    return Isa.RISCV64 if isa is Isa.ARMV8 else Isa.ARMV8


def is_stack_register(isa: Isa, name: str) -> bool:
    info = register_info(isa, name)
    return info is not None and info.kind == "sp"


def is_zero_register(isa: Isa, name: str) -> bool:
    info = register_info(isa, name)
    return info is not None and info.kind == "zero"


@lru_cache(maxsize=None)
def general_registers(isa: Isa, width: int = 64) -> Tuple[str, ...]:
    """General-purpose registers a register hole may range over."""
    if isa is Isa.ARMV8:
        prefix = "w" if width == 32 else "x"
        return tuple(f"{prefix}{n}" for n in range(31))
    return tuple(abi for abi in RISCV_ABI if abi not in ("zero", "sp", "gp", "tp"))


@lru_cache(maxsize=None)
def float_registers(isa: Isa) -> Tuple[str, ...]:
    if isa is Isa.ARMV8:
        return tuple(f"d{n}" for n in range(32))
    return RISCV_FP_ABI


def argument_registers(isa: Isa) -> Tuple[str, ...]:
    if isa is Isa.ARMV8:
        return tuple(f"x{n}" for n in range(8))
    return tuple(f"a{n}" for n in range(8))


def return_address_register(isa: Isa) -> str:
    return "x30" if isa is Isa.ARMV8 else "ra"


def all_canonical_registers(isa: Isa) -> Tuple[str, ...]:
    seen = []
    for info in _REGISTERS[isa].values():
        if info.canonical not in seen and info.kind != "zero":
            seen.append(info.canonical)
    return tuple(seen)
