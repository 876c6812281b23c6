"""Whole-program interpreter: the internal execution oracle.

Runs a parsed program from main over a flat memory (data image, GOT slots, a
stack and the argv block). Calls to functions the program does not define are
served by a small set of C library stubs; anything else stops the run.
"""

import logging
import re
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from asm.isa import ARM_FLAGS, Isa, argument_registers, register_info, return_address_register
from asm.models import AsmLine, LabelRef, Memory, IndexMode, Program, Register
from asm.table import PURE_CLASSES, lookup
from core.errors import ExecutionError, MemoryFault, TranspileError

from .interpreter import Env, execute_line, symbol_value
from .memory import (
    ARGV_SIZE, DATA_BASE, EXIT_ADDRESS, STACK_SIZE, STACK_TOP, FlatMemory, ProgramImage, layout_program,
)
from .models import SIGSEGV, ExecutionResult, Fixture
from .state import LaneState, int_mask

logger = logging.getLogger(__name__)

DEFAULT_STEP_LIMIT = 1_000_000
ARGV_BASE = STACK_TOP + 0x1000
M64 = int_mask(64)

FORMAT_RE = re.compile(r"%([-+ 0#]*)(\d*)(?:\.(\d+))?(hh|h|ll|l|z|j|t)?([diuxXcsp%])")

ARM_CONDITIONS: Dict[str, Callable[[int, int, int, int], bool]] = {
    "eq": lambda n, z, c, v: z == 1,
    "ne": lambda n, z, c, v: z == 0,
    "cs": lambda n, z, c, v: c == 1,
    "hs": lambda n, z, c, v: c == 1,
    "cc": lambda n, z, c, v: c == 0,
    "lo": lambda n, z, c, v: c == 0,
    "mi": lambda n, z, c, v: n == 1,
    "pl": lambda n, z, c, v: n == 0,
    "vs": lambda n, z, c, v: v == 1,
    "vc": lambda n, z, c, v: v == 0,
    "hi": lambda n, z, c, v: c == 1 and z == 0,
    "ls": lambda n, z, c, v: not (c == 1 and z == 0),
    "ge": lambda n, z, c, v: n == v,
    "lt": lambda n, z, c, v: n != v,
    "gt": lambda n, z, c, v: z == 0 and n == v,
    "le": lambda n, z, c, v: not (z == 0 and n == v),
    "al": lambda n, z, c, v: True,
}

# (size in bytes, sign-extending) per load/store mnemonic; None sizes follow the register view.
ACCESS: Dict[Isa, Dict[str, Tuple[Optional[int], bool]]] = {
    Isa.ARMV8: {
        "ldr": (None, False), "str": (None, False), "ldp": (None, False), "stp": (None, False),
        "ldrsw": (4, True), "ldrb": (1, False), "strb": (1, False),
    },
    Isa.RISCV64: {
        "ld": (8, False), "sd": (8, False), "lw": (4, True), "lwu": (4, False), "sw": (4, False),
        "lh": (2, True), "lhu": (2, False), "sh": (2, False), "lb": (1, True), "lbu": (1, False),
        "sb": (1, False), "fld": (8, False), "fsd": (8, False),
    },
}
STORES = {"str", "stp", "strb", "sd", "sw", "sh", "sb", "fsd"}


class _Exit(Exception):
    def __init__(self, code: int) -> None:
        self.code = code


def _signed(value: int, bits: int) -> int:
    value &= int_mask(bits)
    return value - (1 << bits) if value >> (bits - 1) else value


def _got_ref(ref: LabelRef) -> LabelRef:
    if ref.modifier == "got":
        return LabelRef(f"{ref.name}@got", None)
    if ref.modifier == "got_lo12":
        return LabelRef(f"{ref.name}@got", "lo12")
    return ref


def _rewrite_got(line: AsmLine) -> AsmLine:
    """Point :got: relocations at the symbol's GOT slot."""
    if not any(r.modifier in ("got", "got_lo12") for r in line.label_refs()):
        return line
    operands = []
    for op in line.operands:
        if isinstance(op, LabelRef):
            op = _got_ref(op)
        elif isinstance(op, Memory) and op.offset_ref is not None:
            op = Memory(op.base, op.offset, op.mode, _got_ref(op.offset_ref), op.index, op.extend,
                        op.has_offset, op.hash)
        operands.append(op)
    return line.with_operands(tuple(operands))


class Machine:
    """One run of a program: register file, memory and captured stdout."""

    def __init__(self, program: Program, fixture: Fixture = Fixture(), step_limit: int = DEFAULT_STEP_LIMIT):
        self.isa = program.isa
        self.image: ProgramImage = layout_program(program)
        self.instructions = [_rewrite_got(line) for line in self.image.instructions]
        symbols = dict(self.image.symbols)
        symbols.update({f"{name}@got": slot for name, slot in self.image.got.items()})
        self.env = Env(symbols=symbols)
        self.step_limit = step_limit
        self.memory = FlatMemory()
        self.memory.map("data", DATA_BASE, max(len(self.image.data), 8), bytes(self.image.data))
        self.memory.map("stack", STACK_TOP - STACK_SIZE, STACK_SIZE)
        self.state = LaneState(self.isa, 64, 1)
        self.stdout: List[str] = []
        self.steps = 0
        self.fixture = fixture
        self.stubs: Dict[str, Callable[[], None]] = {
            "printf": self._printf, "puts": self._puts, "putchar": self._putchar,
            "exit": self._exit, "atoi": self._atoi,
        }

    # registers

    def reg(self, name: str) -> int:
        return int(self.state.read(name)[0])

    def set_reg(self, name: str, value: int) -> None:
        self.state.write(name, np.array([value & M64], dtype=np.uint64))

    def arg(self, i: int) -> int:
        return self.reg(argument_registers(self.isa)[i])

    def _flag_bits(self) -> Tuple[int, int, int, int]:
        bits = self.reg(ARM_FLAGS)
        return bits >> 3 & 1, bits >> 2 & 1, bits >> 1 & 1, bits & 1

    # setup

    def _map_argv(self) -> int:
        args = ("prog",) + tuple(self.fixture.argv)
        table = 8 * (len(args) + 1)
        blob = bytearray(table)
        for i, arg in enumerate(args):
            blob[8 * i:8 * i + 8] = (ARGV_BASE + len(blob)).to_bytes(8, "little")
            blob += arg.encode("latin-1") + b"\0"
        self.memory.map("argv", ARGV_BASE, max(len(blob), ARGV_SIZE), bytes(blob))
        return len(args)

    def _target(self, label: str) -> Optional[int]:
        address = self.env.symbols.get(label)
        return None if address is None else self.image.code_index(address)

    # stubs

    def _write(self, text: str) -> None:
        self.stdout.append(text)

    def _format(self, fmt: str) -> str:
        out = []
        pos = 0
        next_arg = 1
        for m in FORMAT_RE.finditer(fmt):
            out.append(fmt[pos:m.start()])
            pos = m.end()
            flags, width, precision, length, conv = m.groups()
            if conv == "%":
                out.append("%")
                continue
            value = self.arg(next_arg) if next_arg < 8 else 0
            next_arg += 1
            bits = {"hh": 8, "h": 16, None: 32}.get(length, 64)
            spec = "%" + flags + width + (f".{precision}" if precision is not None else "")
            if conv in "di":
                out.append((spec + "d") % _signed(value, bits))
            elif conv == "u":
                out.append((spec + "d") % (value & int_mask(bits)))
            elif conv in "xX":
                out.append((spec + conv) % (value & int_mask(bits)))
            elif conv == "c":
                out.append((spec + "c") % chr(value & 0xFF))
            elif conv == "s":
                out.append((spec + "s") % self.memory.read_cstring(value).decode("latin-1"))
            else:
                out.append("0x%x" % value)
        out.append(fmt[pos:])
        return "".join(out)

    def _printf(self) -> None:
        text = self._format(self.memory.read_cstring(self.arg(0)).decode("latin-1"))
        self._write(text)
        self.set_reg(argument_registers(self.isa)[0], len(text.encode("latin-1")))

    def _puts(self) -> None:
        self._write(self.memory.read_cstring(self.arg(0)).decode("latin-1") + "\n")
        self.set_reg(argument_registers(self.isa)[0], 1)

    def _putchar(self) -> None:
        c = self.arg(0) & 0xFF
        self._write(chr(c))
        self.set_reg(argument_registers(self.isa)[0], c)

    def _exit(self) -> None:
        raise _Exit(self.arg(0) & 0xFF)

    def _atoi(self) -> None:
        text = self.memory.read_cstring(self.arg(0)).decode("latin-1")
        m = re.match(r"\s*([-+]?\d+)", text)
        self.set_reg(argument_registers(self.isa)[0], int(m.group(1)) if m else 0)

    # memory instructions

    def _address(self, mem: Memory, mnemonic: str) -> Tuple[int, Optional[int]]:
        """(access address, base write-back value or None)."""
        base = self.reg(mem.base)
        offset = mem.offset
        if mem.offset_ref is not None:
            offset += symbol_value(mem.offset_ref, self.env.symbols, mnemonic)
        if mem.index is not None:
            index = self.reg(mem.index)
            if mem.extend is not None:
                if mem.extend.op == "sxtw":
                    index = _signed(index, 32)
                elif mem.extend.op == "uxtw":
                    index &= int_mask(32)
                index <<= mem.extend.amount or 0
            offset += index
        effective = (base + offset) & M64
        if mem.mode is IndexMode.PRE:
            return effective, effective
        if mem.mode is IndexMode.POST:
            return base, effective
        return effective, None

    def _access_size(self, name: str, size: Optional[int]) -> int:
        if size is not None:
            return size
        info = register_info(self.isa, name)
        return 4 if info is not None and info.width == 32 else 8

    def _memory(self, line: AsmLine) -> None:
        mnemonic = line.mnemonic
        size, signed = ACCESS[self.isa][mnemonic]
        mem = next(op for op in line.operands if isinstance(op, Memory))
        regs = [op.name for op in line.operands if isinstance(op, Register)]
        address, writeback = self._address(mem, mnemonic)
        for name in regs:
            width = self._access_size(name, size)
            if mnemonic in STORES:
                self.memory.write(address, width, self.reg(name))
            else:
                value = self.memory.read(address, width, signed=signed)
                self.set_reg(name, value)
            address += width
        if writeback is not None:
            self.set_reg(mem.base, writeback)

    # control flow

    def _label_operand(self, line: AsmLine) -> LabelRef:
        for op in reversed(line.operands):
            if isinstance(op, LabelRef):
                return op
        raise ExecutionError(f"{line.mnemonic} has no target label")

    def _branch_taken(self, line: AsmLine) -> bool:
        m = line.mnemonic
        regs = [self.reg(op.name) for op in line.operands if isinstance(op, Register)]
        if m in ("b", "j"):
            return True
        if m.startswith("b.") and self.isa is Isa.ARMV8:
            return ARM_CONDITIONS[m[2:]](*self._flag_bits())
        if m in ("cbz", "beqz"):
            return regs[0] == 0
        if m in ("cbnz", "bnez"):
            return regs[0] != 0
        a, b = regs[0], regs[1]
        sa, sb = _signed(a, 64), _signed(b, 64)
        return {
            "beq": a == b, "bne": a != b, "blt": sa < sb, "bge": sa >= sb,
            "bgt": sa > sb, "ble": sa <= sb, "bltu": a < b, "bgeu": a >= b,
        }[m]

    def _jump(self, label: str) -> int:
        target = self._target(label)
        if target is None:
            raise ExecutionError(f"branch target {label!r} is not code")
        return target

    def _call(self, line: AsmLine, pc: int) -> int:
        name = self._label_operand(line).name
        target = self._target(name)
        if target is not None:
            self.set_reg(return_address_register(self.isa), self.image.code_address(pc + 1))
            return target
        stub = self.stubs.get(name)
        if stub is None:
            raise ExecutionError(f"call to undefined function {name!r}")
        stub()
        return pc + 1

    def _return(self, line: AsmLine) -> Optional[int]:
        regs = [op.name for op in line.operands if isinstance(op, Register)]
        target = self.reg(regs[0] if regs else return_address_register(self.isa))
        if target == EXIT_ADDRESS:
            raise _Exit(self.arg(0) & 0xFF)
        index = self.image.code_index(target)
        if index is None:
            raise MemoryFault(target, 4)
        return index

    # driver

    def run(self) -> int:
        entry = self._target("main")
        if entry is None:
            raise ExecutionError("program has no main function")
        argc = self._map_argv()
        self.set_reg("sp", STACK_TOP - 256)
        self.set_reg(return_address_register(self.isa), EXIT_ADDRESS)
        self.set_reg(argument_registers(self.isa)[0], argc)
        self.set_reg(argument_registers(self.isa)[1], ARGV_BASE)
        pc = entry
        try:
            while True:
                if self.steps >= self.step_limit:
                    raise ExecutionError(f"step limit of {self.step_limit} exceeded")
                if not 0 <= pc < len(self.instructions):
                    raise MemoryFault(self.image.code_address(pc), 4)
                self.steps += 1
                pc = self.execute(pc)
        except _Exit as done:
            return done.code

    def execute(self, pc: int) -> int:
        line = self.instructions[pc]
        spec = lookup(self.isa, line.mnemonic or "")
        if spec is None or line.opaque:
            raise ExecutionError(f"unknown instruction {line.mnemonic!r}")
        if spec.klass in PURE_CLASSES:
            execute_line(self.state, line, self.env)
            return pc + 1
        if spec.klass == "memory":
            self._memory(line)
            return pc + 1
        if spec.klass == "branch":
            if self._branch_taken(line):
                return self._jump(self._label_operand(line).name)
            return pc + 1
        if spec.klass == "call":
            return self._call(line, pc)
        return self._return(line)


def run_program(program: Program, fixture: Fixture = Fixture(),
                step_limit: int = DEFAULT_STEP_LIMIT) -> ExecutionResult:
    """Execute program from main on fixture and report its observable behaviour."""
    try:
        machine = Machine(program, fixture, step_limit)
    except TranspileError as e:
        return ExecutionResult(exit_code=None, error=str(e))
    try:
        code = machine.run()
    except MemoryFault as e:
        logger.debug("run faulted after %d steps: %s", machine.steps, e)
        return ExecutionResult("".join(machine.stdout), None, SIGSEGV, machine.steps, str(e))
    except TranspileError as e:
        logger.debug("run stopped after %d steps: %s", machine.steps, e)
        return ExecutionResult("".join(machine.stdout), None, None, machine.steps, str(e))
    return ExecutionResult("".join(machine.stdout), code, None, machine.steps)


def run_fixtures(program: Program, fixtures: Sequence[Fixture],
                 step_limit: int = DEFAULT_STEP_LIMIT) -> List[ExecutionResult]:
    return [run_program(program, f, step_limit) for f in fixtures or (Fixture(),)]
