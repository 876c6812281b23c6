"""Vectorised bit-vector interpreter for pure-block instructions.

Every value is a uint64 array with one entry per lane, kept masked to its width.
Operations run at the operation width n (the destination view, or half the
register width for 32-bit word ops) and are written back through the
destination's view: ARMv8 w writes zero-extend, RISC-V word ops sign-extend.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Union

import numpy as np

from asm.isa import ARM_FLAGS, Isa
from asm.models import (
    AsmLine, FloatImmediate, Hole, Immediate, LabelRef, Memory, Register, Shift,
)
from asm.table import BOUNDARY_CLASSES, InstructionSpec, lookup
from core.errors import HoleNotConcrete, UnsupportedInstruction

from .state import LaneState, MachineState, int_mask, mask, view_width

logger = logging.getLogger(__name__)

HoleValue = Union[int, str, np.ndarray, Register, Immediate, FloatImmediate, LabelRef, Shift]


@dataclass(frozen=True)
class Env:
    """Values for holes and addresses for symbols referenced by a block."""
    holes: Mapping[int, HoleValue] = field(default_factory=dict)
    symbols: Mapping[str, int] = field(default_factory=dict)


@dataclass(frozen=True)
class _Lane:
    """An immediate supplied per lane (or as one scalar) through a hole."""
    value: Union[int, np.ndarray]


def to_u64(values) -> np.ndarray:
    """Two's-complement uint64 array from ints (negatives wrap)."""
    if isinstance(values, np.ndarray):
        if values.dtype == np.uint64:
            return values
        return values.astype(np.int64).astype(np.uint64)
    if isinstance(values, int):
        return np.array([values & int_mask(64)], dtype=np.uint64)
    return np.array([int(v) & int_mask(64) for v in values], dtype=np.uint64)


def sext(x: np.ndarray, n: int, w: int = 64) -> np.ndarray:
    """Sign-extend the low n bits of x to w bits."""
    if n >= w:
        return x & mask(w)
    sign = np.uint64(1 << (n - 1))
    return (((x & mask(n)) ^ sign) - sign) & mask(w)


def signed(x: np.ndarray, n: int) -> np.ndarray:
    return sext(x, n, 64).view(np.int64)


def _shamt(b: np.ndarray, n: int) -> np.ndarray:
    return b & np.uint64(n - 1)


def _abs(x: np.ndarray, n: int):
    negative = signed(x, n) < 0
    return np.where(negative, (np.uint64(0) - x) & mask(n), x), negative


def _sdiv(a, b, n, on_zero):
    ua, na = _abs(a, n)
    ub, nb = _abs(b, n)
    zero = b == 0
    q = ua // np.where(zero, np.uint64(1), ub)
    q = np.where(na != nb, (np.uint64(0) - q) & mask(n), q)
    return np.where(zero, on_zero, q) & mask(n)


def _srem(a, b, n):
    ua, na = _abs(a, n)
    ub, _ = _abs(b, n)
    zero = b == 0
    r = ua % np.where(zero, np.uint64(1), ub)
    r = np.where(na, (np.uint64(0) - r) & mask(n), r)
    return np.where(zero, a, r) & mask(n)


def _udiv(a, b, n, on_zero):
    zero = b == 0
    return np.where(zero, on_zero, a // np.where(zero, np.uint64(1), b)) & mask(n)


def _urem(a, b, n):
    zero = b == 0
    return np.where(zero, a, a % np.where(zero, np.uint64(1), b)) & mask(n)


def _bool(x: np.ndarray) -> np.ndarray:
    return x.astype(np.uint64)


def nzcv(a: np.ndarray, b: np.ndarray, r: np.ndarray, n: int, sub: bool) -> np.ndarray:
    """Pack N, Z, C, V of an n-bit addition or subtraction a op b = r."""
    top = np.uint64(n - 1)
    sa, sb, sr = (a >> top) & np.uint64(1), (b >> top) & np.uint64(1), (r >> top) & np.uint64(1)
    z = _bool(r == 0)
    if sub:
        c = _bool(a >= b)
        v = _bool((sa != sb) & (sr != sa))
    else:
        c = _bool(r < a)
        v = _bool((sa == sb) & (sr != sa))
    return (sr << np.uint64(3)) | (z << np.uint64(2)) | (c << np.uint64(1)) | v


@dataclass
class _Ctx:
    n: int
    width: int
    shift: int = 0

    @property
    def m(self) -> np.uint64:
        return mask(self.n)

    @property
    def half(self) -> int:
        return self.width // 2


Handler = Callable[[List[np.ndarray], _Ctx], np.ndarray]


def _binop(fn: Callable) -> Handler:
    return lambda v, c: fn(v[1], v[2], c) & c.m


_COMMON: Dict[str, Handler] = {
    "add": _binop(lambda a, b, c: a + b),
    "sub": _binop(lambda a, b, c: a - b),
    "and": _binop(lambda a, b, c: a & b),
    "mul": _binop(lambda a, b, c: a * b),
    "neg": lambda v, c: (np.uint64(0) - v[1]) & c.m,
    "nop": lambda v, c: None,
}

ARM_HANDLERS: Dict[str, Handler] = {
    **_COMMON,
    "mov": lambda v, c: v[1] & c.m,
    "fmov": lambda v, c: v[1] & c.m,
    "movk": lambda v, c: ((v[0] & np.uint64(~(0xFFFF << c.shift) & int_mask(64)))
                          | (v[1] << np.uint64(c.shift))) & c.m,
    "mvn": lambda v, c: ~v[1] & c.m,
    "adds": _binop(lambda a, b, c: a + b),
    "subs": _binop(lambda a, b, c: a - b),
    "orr": _binop(lambda a, b, c: a | b),
    "eor": _binop(lambda a, b, c: a ^ b),
    "lsl": _binop(lambda a, b, c: a << _shamt(b, c.n)),
    "lsr": _binop(lambda a, b, c: a >> _shamt(b, c.n)),
    "asr": _binop(lambda a, b, c: (signed(a, c.n) >> _shamt(b, c.n).astype(np.int64)).astype(np.uint64)),
    "sdiv": lambda v, c: _sdiv(v[1], v[2], c.n, np.uint64(0)),
    "udiv": lambda v, c: _udiv(v[1], v[2], c.n, np.uint64(0)),
    "madd": lambda v, c: (v[3] + v[1] * v[2]) & c.m,
    "msub": lambda v, c: (v[3] - v[1] * v[2]) & c.m,
    "smull": lambda v, c: (sext(v[1], c.half, c.n) * sext(v[2], c.half, c.n)) & c.m,
    "sxtw": lambda v, c: sext(v[1], c.half, c.n),
    "adrp": lambda v, c: v[1] & np.uint64(~0xFFF & int_mask(64)) & c.m,
}

RISCV_HANDLERS: Dict[str, Handler] = {
    **_COMMON,
    "li": lambda v, c: v[1] & c.m,
    "lui": lambda v, c: sext((v[1] << np.uint64(12)) & mask(c.half), c.half, c.n),
    "mv": lambda v, c: v[1] & c.m,
    "not": lambda v, c: ~v[1] & c.m,
    "seqz": lambda v, c: _bool(v[1] == 0),
    "snez": lambda v, c: _bool(v[1] != 0),
    "negw": lambda v, c: (np.uint64(0) - v[1]) & c.m,
    "sext.w": lambda v, c: v[1] & c.m,
    "or": _binop(lambda a, b, c: a | b),
    "xor": _binop(lambda a, b, c: a ^ b),
    "sll": _binop(lambda a, b, c: a << _shamt(b, c.n)),
    "srl": _binop(lambda a, b, c: a >> _shamt(b, c.n)),
    "sra": _binop(lambda a, b, c: (signed(a, c.n) >> _shamt(b, c.n).astype(np.int64)).astype(np.uint64)),
    "slt": lambda v, c: _bool(signed(v[1], c.n) < signed(v[2], c.n)),
    "sltu": lambda v, c: _bool(v[1] < v[2]),
    "div": lambda v, c: _sdiv(v[1], v[2], c.n, c.m),
    "divu": lambda v, c: _udiv(v[1], v[2], c.n, c.m),
    "rem": lambda v, c: _srem(v[1], v[2], c.n),
    "remu": lambda v, c: _urem(v[1], v[2], c.n),
    "fmv.x.d": lambda v, c: v[1] & c.m,
    "fmv.d.x": lambda v, c: v[1] & c.m,
    "fmv.d": lambda v, c: v[1] & c.m,
    "la": lambda v, c: v[1] & c.m,
    "lla": lambda v, c: v[1] & c.m,
}
for _word, _base in (("addw", "add"), ("subw", "sub"), ("sllw", "sll"), ("srlw", "srl"),
                     ("sraw", "sra"), ("mulw", "mul"), ("divw", "div"), ("remw", "rem"),
                     ("addi", "add"), ("andi", "and"), ("ori", "or"), ("xori", "xor"),
                     ("slti", "slt"), ("sltiu", "sltu"), ("slli", "sll"), ("srli", "srl"),
                     ("srai", "sra"), ("addiw", "add"), ("slliw", "sll"), ("srliw", "srl"),
                     ("sraiw", "sra")):
    RISCV_HANDLERS[_word] = RISCV_HANDLERS[_base]

HANDLERS = {Isa.ARMV8: ARM_HANDLERS, Isa.RISCV64: RISCV_HANDLERS}


def symbol_value(ref: LabelRef, symbols: Mapping[str, int], mnemonic: str) -> int:
    """Value a relocated symbol reference contributes, from the symbol's address."""
    if ref.name not in symbols:
        raise UnsupportedInstruction(mnemonic, f"unbound symbol {ref.name!r}")
    addr = symbols[ref.name] & int_mask(64)
    if ref.modifier in ("lo12", "got_lo12", "lo12_nc"):
        return addr & 0xFFF
    if ref.modifier == "hi":
        return ((addr + 0x800) >> 12) & 0xFFFFF
    if ref.modifier == "lo":
        return ((addr & 0xFFF) ^ 0x800) - 0x800
    return addr


def _resolve(op, env: Env):
    if not isinstance(op, Hole):
        return op
    if op.hole_id not in env.holes:
        raise HoleNotConcrete(op.hole_id)
    value = env.holes[op.hole_id]
    if isinstance(value, str):
        return Register(value.lower())
    if isinstance(value, (Register, Immediate, FloatImmediate, LabelRef, Shift)):
        return value
    return _Lane(value)


def resolve_spec(line: AsmLine, isa: Isa, env: Env) -> InstructionSpec:
    mnemonic = line.mnemonic
    hole = line.mnemonic_hole
    if hole is not None:
        if hole not in env.holes:
            raise HoleNotConcrete(hole)
        mnemonic = str(env.holes[hole])
    spec = lookup(isa, mnemonic)
    if spec is None or (line.opaque and hole is None):
        raise UnsupportedInstruction(mnemonic, "not in the supported subset")
    if spec.klass in BOUNDARY_CLASSES:
        raise UnsupportedInstruction(mnemonic, f"{spec.klass} instructions end pure blocks")
    if mnemonic not in HANDLERS[isa] and spec.klass not in ("compare",):
        raise UnsupportedInstruction(mnemonic, "no executable semantics")
    return spec


def operation_width(spec: InstructionSpec, operands: Sequence, isa: Isa, width: int) -> int:
    if spec.is_word_op:
        return width // 2
    for op in operands:
        if isinstance(op, Register):
            return view_width(isa, op.name, width)
    return width


def _apply_shift(value: np.ndarray, shift: Shift, n: int) -> np.ndarray:
    amount = np.uint64((shift.amount or 0) % 64)
    if shift.op == "lsl":
        return (value << amount) & mask(n)
    if shift.op == "lsr":
        return value >> amount
    if shift.op == "asr":
        return (signed(value, n) >> np.int64(int(amount))).astype(np.uint64) & mask(n)
    if shift.op == "ror":
        k = int(amount) % n
        if k == 0:
            return value
        return ((value >> np.uint64(k)) | (value << np.uint64(n - k))) & mask(n)
    raise UnsupportedInstruction(shift.op, "extend operands are not modelled")


def _value(op, n: int, state: LaneState, env: Env, mnemonic: str) -> np.ndarray:
    if isinstance(op, Register):
        return state.read(op.name) & mask(n)
    if isinstance(op, Immediate):
        return state.full(op.value) & mask(n)
    if isinstance(op, FloatImmediate):
        return state.full(op.bits) & mask(n)
    if isinstance(op, _Lane):
        values = to_u64(op.value) if not isinstance(op.value, int) else state.full(op.value)
        return np.broadcast_to(values, (state.lanes,)) & mask(n)
    if isinstance(op, LabelRef):
        return state.full(symbol_value(op, env.symbols, mnemonic)) & mask(n)
    if isinstance(op, Memory):
        raise UnsupportedInstruction(mnemonic, "memory operand")
    raise UnsupportedInstruction(mnemonic, f"operand {op!r} has no value")


def execute_line(state: LaneState, line: AsmLine, env: Env = Env()) -> None:
    """Apply one instruction to state in place."""
    if not line.is_instruction:
        raise UnsupportedInstruction(line.mnemonic or line.label or "?", "not an instruction")
    isa = state.isa
    spec = resolve_spec(line, isa, env)
    operands = [_resolve(op, env) for op in line.operands]
    shift: Optional[Shift] = None
    if operands and isinstance(operands[-1], Shift):
        shift = operands.pop()
    n = operation_width(spec, operands, isa, state.width)
    ctx = _Ctx(n, state.width)
    mnemonic = spec.mnemonic
    values = [_value(op, n, state, env, mnemonic) for op in operands]
    if shift is not None:
        if spec.shift == "field":
            ctx.shift = shift.amount or 0
        elif values:
            values[-1] = _apply_shift(values[-1], shift, n)
    if spec.klass == "compare":
        result = (values[0] - values[1]) & ctx.m
        state.write(ARM_FLAGS, nzcv(values[0], values[1], result, n, sub=True))
        return
    result = HANDLERS[isa][mnemonic](values, ctx)
    if result is None:
        return
    if spec.flags:
        state.write(ARM_FLAGS, nzcv(values[1], values[2], result, n, sub=spec.flags == "sub"))
    dest = operands[0]
    if spec.is_word_op:
        result = sext(result, n, state.width)
    state.write(dest.name, result)


def run_lines(lines: Sequence[AsmLine], state: LaneState, env: Env = Env()) -> LaneState:
    """Fold execute_line over lines on a copy of state."""
    out = state.copy()
    for line in lines:
        execute_line(out, line, env)
    return out


def step(state: MachineState, line: AsmLine, env: Env = Env()) -> MachineState:
    """Successor of a single-register-file state after line."""
    lanes = state.to_lanes()
    execute_line(lanes, line, env)
    return MachineState.from_lanes(lanes)
