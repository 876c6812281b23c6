"""Corpus access and seeded generators shared by the test modules."""

import os
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import numpy as np

from asm.isa import Isa
from asm.models import Program
from asm.parsing import parse_lines, parse_program

CORPUS = Path(__file__).resolve().parent / "corpus"
ISA_DIRS = {Isa.ARMV8: ("armv8", ".arm.s"), Isa.RISCV64: ("riscv64", ".rv.s")}

FULL = os.environ.get("TRANSKETCH_FULL") == "1"

# Template pairs: a leaf `compute` plus a main that prints compute(ARG).
TEMPLATE_OUTPUTS: Dict[str, int] = {
    "add_const": 37 + 5,
    "shift_left": 11 << 3,
    "negate": -17,
    "halve": -77 >> 1,
    "flip_low_byte": 300 ^ 255,
    "low_nibble": 1234 & 15,
    "square": 13 * 13,
    "mod_six": 47 % 6,
    "absolute": 250,
    "add_large": 12 + 70000,
    "byte_shift": (4660 & 255) << 8,
    "lowest_bit": 40 & -40,
    "odd_square": (6 | 1) * (6 | 1),
    "quarter": 4000 >> 2,
    "gray_code": 37 ^ (37 >> 1),
}


def trials(quick: int, full: int) -> int:
    return full if FULL else quick


def corpus_path(name: str, isa: Isa) -> Path:
    folder, suffix = ISA_DIRS[isa]
    return CORPUS / folder / f"{name}{suffix}"


def corpus_files(isa: Isa) -> List[Path]:
    folder, suffix = ISA_DIRS[isa]
    return sorted((CORPUS / folder).glob(f"*{suffix}"))


def corpus_names() -> List[str]:
    _, suffix = ISA_DIRS[Isa.ARMV8]
    return [p.name[:-len(suffix)] for p in corpus_files(Isa.ARMV8)]


def template_names() -> List[str]:
    """Pairs built from the compute/main template (every pair defining compute)."""
    return [n for n in corpus_names() if "\ncompute:" in corpus_path(n, Isa.ARMV8).read_text()]


def load(name: str, isa: Isa) -> Program:
    return parse_program(corpus_path(name, isa).read_text(encoding="utf-8"), isa)


def load_pair(name: str) -> Tuple[Program, Program]:
    return load(name, Isa.ARMV8), load(name, Isa.RISCV64)


def block(text: str, isa: Isa):
    """Instruction lines of a small block written one instruction per ';'."""
    return [l for l in parse_lines(text.replace(";", "\n"), isa) if l.is_instruction]


# Equivalent single-operation bodies, ARMv8 / RISC-V, on w0 / a0 (32-bit semantics).
_OPS: Sequence[Tuple[str, str]] = (
    ("add w0, w0, {k}", "addiw a0,a0,{k}"),
    ("sub w0, w0, {k}", "addiw a0,a0,-{k}"),
    ("eor w0, w0, {k}", "xori a0,a0,{k}"),
    ("orr w0, w0, {k}", "ori a0,a0,{k}"),
    ("and w0, w0, {k}", "andi a0,a0,{k}"),
    ("lsl w0, w0, {s}", "slliw a0,a0,{s}"),
    ("lsr w0, w0, {s}", "srliw a0,a0,{s}"),
    ("asr w0, w0, {s}", "sraiw a0,a0,{s}"),
    ("neg w0, w0", "negw a0,a0"),
    ("mul w0, w0, w0", "mulw a0,a0,a0"),
)

PAIR_TEMPLATE = {
    Isa.ARMV8: """\t.text
\t.align\t2
\t.global\tcompute
\t.type\tcompute, %function
compute:
{body}\tret
\t.size\tcompute, .-compute
\t.align\t2
\t.global\tmain
\t.type\tmain, %function
main:
\tsub\tsp, sp, #16
\tstp\tx29, x30, [sp]
\tmov\tw0, {arg}
\tbl\tcompute
\tmov\tw1, w0
\tadrp\tx0, .LC0
\tadd\tx0, x0, :lo12:.LC0
\tbl\tprintf
\tmov\tw0, 0
\tldp\tx29, x30, [sp]
\tadd\tsp, sp, 16
\tret
\t.size\tmain, .-main
\t.section\t.rodata
\t.align\t3
.LC0:
\t.string\t"%d\\n"
""",
    Isa.RISCV64: """\t.text
\t.align\t1
\t.globl\tcompute
\t.type\tcompute, @function
compute:
{body}\tret
\t.size\tcompute, .-compute
\t.align\t1
\t.globl\tmain
\t.type\tmain, @function
main:
\taddi\tsp,sp,-16
\tsd\tra,8(sp)
\tli\ta0,{arg}
\tcall\tcompute
\tmv\ta1,a0
\tlui\ta0,%hi(.LC0)
\taddi\ta0,a0,%lo(.LC0)
\tcall\tprintf
\tli\ta0,0
\tld\tra,8(sp)
\taddi\tsp,sp,16
\tret
\t.size\tmain, .-main
\t.section\t.rodata
\t.align\t3
.LC0:
\t.string\t"%d\\n"
""",
}


def random_pair(rng: np.random.Generator, length: int = 3) -> Tuple[Program, Program, int]:
    """A generated equivalent (ARMv8, RISC-V, argument) program pair of length compute ops."""
    arm, rv = [], []
    for _ in range(length):
        a, r = _OPS[int(rng.integers(len(_OPS)))]
        values = {"k": int(rng.integers(1, 2048)), "s": int(rng.integers(0, 32))}
        arm.append("\t" + a.format(**values) + "\n")
        rv.append("\t" + r.format(**values) + "\n")
    arg = int(rng.integers(-1000, 1000))
    return (parse_program(PAIR_TEMPLATE[Isa.ARMV8].format(body="".join(arm), arg=arg), Isa.ARMV8),
            parse_program(PAIR_TEMPLATE[Isa.RISCV64].format(body="".join(rv), arg=arg), Isa.RISCV64),
            arg)


def random_program(rng: np.random.Generator, isa: Isa, length: int = 24) -> Program:
    """A fuzzed function mixing pure lines with every kind of boundary line."""
    if isa is Isa.ARMV8:
        pool = ("add x{a}, x{b}, {k}", "sub w{a}, w{b}, w{c}", "eor x{a}, x{b}, x{c}", "mov w{a}, {k}",
                "lsl x{a}, x{b}, {s}", "mul x{a}, x{b}, x{c}", "cmp w{a}, {k}", "ldr x{a}, [x{b}, 8]",
                "str w{a}, [sp, 12]", "b.ne .L{l}", "bl printf", "adrp x{a}, .LC0",
                "add x{a}, x{a}, :lo12:.LC0", "sub sp, sp, 16", "cbz w{a}, .L{l}", "nop")
    else:
        pool = ("addi a{a},a{b},{k}", "subw a{a},a{b},a{c}", "xor a{a},a{b},a{c}", "li a{a},{k}",
                "slli a{a},a{b},{s}", "mul a{a},a{b},a{c}", "ld a{a},8(a{b})", "sw a{a},12(sp)",
                "bne a{a},a{b},.L{l}", "call printf", "lui a{a},%hi(.LC0)", "addi a{a},a{a},%lo(.LC0)",
                "addi sp,sp,-16", "beqz a{a},.L{l}", "nop")
    text = ["\t.text", "\t.globl\tf", "f:"]
    for i in range(length):
        if rng.random() < 0.1:
            text.append(f".L{i}:")
        values = {"a": int(rng.integers(0, 8)), "b": int(rng.integers(0, 8)), "c": int(rng.integers(0, 8)),
                  "k": int(rng.integers(0, 2000)), "s": int(rng.integers(0, 63)), "l": int(rng.integers(length))}
        text.append("\t" + pool[int(rng.integers(len(pool)))].format(**values))
    text.append("\tret")
    return parse_program("\n".join(text) + "\n", isa)
