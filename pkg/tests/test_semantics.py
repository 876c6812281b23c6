import numpy as np
import pytest

from asm import Immediate, Isa, Register, parse_program
from asm.isa import register_info
from asm.models import AsmLine, LineKind
from asm.table import lookup, mnemonics
from core.errors import UnsupportedInstruction
from semantics import (
    BlockSpec, Fixture, MachineState, VerifierConfig, blocks_equivalent, default_pairing, eval_block,
    export_smtlib, reference_step, run_program, step,
)
from semantics.equivalence import corner_values
from helpers import block, corpus_names, load, load_pair, trials

EXECUTABLE = ("alu", "move", "compare")
OPERAND_SLOTS = {"d", "s", "si", "i"}


def _executable(isa):
    for name in mnemonics(isa):
        spec = lookup(isa, name)
        if spec.klass not in EXECUTABLE or not spec.required_slots:
            continue
        if set(spec.required_slots) <= OPERAND_SLOTS:
            yield spec


def _random_line(spec, isa, rng, wide):
    prefix = ("x" if wide else "w") if isa is Isa.ARMV8 else "a"
    lo, hi = spec.immediate_bounds(64 if wide or isa is Isa.RISCV64 else 32)
    lo, hi = max(lo, -100), min(hi, 100)
    operands = []
    for slot in spec.required_slots:
        if slot == "i" or (slot == "si" and rng.random() < 0.5):
            operands.append(Immediate(int(rng.integers(lo, hi + 1))))
        else:
            operands.append(Register(f"{prefix}{int(rng.integers(0, 4))}"))
    return AsmLine(LineKind.INSTRUCTION, spec.mnemonic, tuple(operands))


def _random_registers(isa, rng, width):
    pool = corner_values(width) + [int(v) for v in rng.integers(0, 1 << 62, 4)]
    regs = {}
    for n in range(4):
        name = register_info(isa, f"x{n}" if isa is Isa.ARMV8 else f"a{n}").canonical
        regs[name] = pool[int(rng.integers(len(pool)))] & ((1 << width) - 1)
    return regs


@pytest.mark.parametrize("isa", [Isa.ARMV8, Isa.RISCV64], ids=["armv8", "riscv64"])
@pytest.mark.parametrize("width", [64, 8])
def test_interpreter_agrees_with_reference_rules(isa, width):
    rng = np.random.default_rng(3)
    specs = list(_executable(isa))
    assert len(specs) > 10
    for spec in specs:
        for _ in range(trials(20, 10_000)):
            line = _random_line(spec, isa, rng, wide=bool(rng.integers(2)))
            regs = _random_registers(isa, rng, width)
            expected = reference_step(isa, line, regs, width)
            actual = dict(step(MachineState(isa, regs, width), line).registers)
            for name in set(expected) | set(actual):
                assert actual.get(name, 0) == expected.get(name, 0), (spec.mnemonic, line, regs, name)


def test_step_writes_through_views():
    state = MachineState(Isa.ARMV8, {"x0": 0xFFFF_FFFF_0000_0001})
    after = step(state, block("add w0, w0, 1", Isa.ARMV8)[0])
    assert after.registers["x0"] == 2
    flags = step(MachineState(Isa.ARMV8, {"x1": 3}), block("cmp w1, 3", Isa.ARMV8)[0]).flags
    assert flags == {"N": False, "Z": True, "C": True, "V": False}


def test_eval_block_wraps_at_register_width():
    arm = BlockSpec.from_lines(block("add w0, w0, 1", Isa.ARMV8), Isa.ARMV8)
    assert eval_block(arm, {"w0": 0xFFFF_FFFF}) == {"w0": 0}
    rv = BlockSpec.from_lines(block("addiw a0,a0,1", Isa.RISCV64), Isa.RISCV64)
    assert eval_block(rv, {"a0": 0x7FFF_FFFF}) == {"a0": 0xFFFF_FFFF_8000_0000}
    wide = BlockSpec.from_lines(block("add a0,a0,a1", Isa.RISCV64), Isa.RISCV64)
    assert eval_block(wide, {"a0": (1 << 64) - 1, "a1": 2}) == {"a0": 1}


def test_eval_block_needs_every_input():
    spec = BlockSpec.from_lines(block("add x0, x1, x2", Isa.ARMV8), Isa.ARMV8)
    assert spec.inputs == ("x1", "x2")
    with pytest.raises(KeyError):
        eval_block(spec, {"x1": 1})


def test_boundary_lines_are_not_specifications():
    with pytest.raises(UnsupportedInstruction):
        BlockSpec.from_lines(block("ldr x0, [x1]", Isa.ARMV8), Isa.ARMV8)
    with pytest.raises(UnsupportedInstruction):
        BlockSpec.from_lines(block("call printf", Isa.RISCV64), Isa.RISCV64)


IDENTITIES = [
    ("add w0, w0, 5", "addiw a0,a0,5"),
    ("lsl w0, w0, 3", "slliw a0,a0,3"),
    ("neg w0, w0", "subw a0,zero,a0"),
    ("mvn x0, x0", "xori a0,a0,-1"),
    ("add w0, w0, w0", "slliw a0,a0,1"),
    ("mul w0, w0, w0", "mulw a0,a0,a0"),
    ("eor x0, x0, x1", "xor a0,a0,a1"),
    ("asr w0, w0, 1", "sraiw a0,a0,1"),
    ("and w0, w0, 15", "andi a0,a0,15"),
    ("mov w1, 3;sdiv w0, w0, w1", "li a1,3;divw a0,a0,a1"),
]


@pytest.mark.parametrize("arm,rv", IDENTITIES)
def test_equivalent_blocks(arm, rv):
    spec_x = BlockSpec.from_lines(block(arm, Isa.ARMV8), Isa.ARMV8)
    spec_y = BlockSpec.from_lines(block(rv, Isa.RISCV64), Isa.RISCV64)
    result = blocks_equivalent(spec_x, spec_y, verifier=VerifierConfig(random_samples=trials(500, 10_000)))
    assert result, result.counterexample
    assert result.tested > 0


@pytest.mark.parametrize("arm,rv", [
    ("add w0, w0, 5", "addiw a0,a0,6"),
    ("add x0, x0, 1", "addiw a0,a0,1"),
    ("lsr w0, w0, 1", "sraiw a0,a0,1"),
    ("orr x0, x0, x1", "and a0,a0,a1"),
])
def test_inequivalent_blocks_give_a_counterexample(arm, rv):
    spec_x = BlockSpec.from_lines(block(arm, Isa.ARMV8), Isa.ARMV8)
    spec_y = BlockSpec.from_lines(block(rv, Isa.RISCV64), Isa.RISCV64)
    result = blocks_equivalent(spec_x, spec_y)
    assert not result
    assert set(result.counterexample) == set(spec_x.inputs)


def test_reduced_width_pass_catches_difference_exhaustively():
    spec_x = BlockSpec.from_lines(block("add w0, w0, 5", Isa.ARMV8), Isa.ARMV8)
    spec_y = BlockSpec.from_lines(block("addiw a0,a0,6", Isa.RISCV64), Isa.RISCV64)
    result = blocks_equivalent(spec_x, spec_y)
    assert result.width == 8


def test_pairing_follows_read_and_write_order():
    spec_x = BlockSpec.from_lines(block("add x2, x1, x0", Isa.ARMV8), Isa.ARMV8)
    spec_y = BlockSpec.from_lines(block("add a2,a1,a0", Isa.RISCV64), Isa.RISCV64)
    pairing = default_pairing(spec_x, spec_y)
    assert pairing.inputs == (("x1", "a1"), ("x0", "a0"))
    assert pairing.outputs == (("x2", "a2"),)
    hinted = default_pairing(spec_x, spec_y, hint={"x1": "a0", "x0": "a1"})
    assert hinted.inputs == (("x1", "a0"), ("x0", "a1"))


def test_flags_dropped_when_one_side_lacks_them():
    spec_x = BlockSpec.from_lines(block("subs w0, w0, 1", Isa.ARMV8), Isa.ARMV8)
    spec_y = BlockSpec.from_lines(block("addiw a0,a0,-1", Isa.RISCV64), Isa.RISCV64)
    pairing = default_pairing(spec_x, spec_y)
    assert pairing.outputs == (("w0", "a0"),)
    assert blocks_equivalent(spec_x, spec_y)


def test_mismatched_register_counts():
    spec_x = BlockSpec.from_lines(block("add x0, x1, x2", Isa.ARMV8), Isa.ARMV8)
    spec_y = BlockSpec.from_lines(block("addi a0,a1,1", Isa.RISCV64), Isa.RISCV64)
    assert default_pairing(spec_x, spec_y) is None
    assert not blocks_equivalent(spec_x, spec_y)


def test_export_smtlib_is_a_complete_query():
    spec_x = BlockSpec.from_lines(block("add w0, w0, 5", Isa.ARMV8), Isa.ARMV8)
    spec_y = BlockSpec.from_lines(block("addiw a0,a0,5", Isa.RISCV64), Isa.RISCV64)
    script = export_smtlib(spec_x, spec_y, default_pairing(spec_x, spec_y))
    assert script.startswith("(set-logic QF_BV)")
    assert "(declare-const" in script
    assert script.rstrip().endswith("(check-sat)")


def test_smt_verifier():
    pytest.importorskip("z3")
    spec_x = BlockSpec.from_lines(block("lsl w0, w0, 2", Isa.ARMV8), Isa.ARMV8)
    good = BlockSpec.from_lines(block("slliw a0,a0,2", Isa.RISCV64), Isa.RISCV64)
    bad = BlockSpec.from_lines(block("slliw a0,a0,3", Isa.RISCV64), Isa.RISCV64)
    smt = VerifierConfig(kind="smt")
    assert blocks_equivalent(spec_x, good, verifier=smt)
    assert not blocks_equivalent(spec_x, bad, verifier=smt)


@pytest.mark.parametrize("name,stdout,exit_code", [
    ("add_const", "42\n", 0),
    ("sum_loop", "sum=55\n", 0),
    ("locals_o0", "product: 42\n", 0),
    ("count_down", "***\n", 7),
    ("global_word", "1234567890124\n", 0),
])
def test_program_output(name, stdout, exit_code):
    for program in load_pair(name):
        result = run_program(program)
        assert result.error == ""
        assert (result.stdout, result.exit_code, result.signal) == (stdout, exit_code, None)
        assert result.steps > 0


def test_argv_reaches_main():
    for program in load_pair("argc_echo"):
        assert run_program(program, Fixture(("a", "b"))).stdout == "argc=3\n"
        assert run_program(program).stdout == "argc=1\n"


def test_corpus_pairs_agree():
    for name in corpus_names():
        arm, rv = load_pair(name)
        a, r = run_program(arm), run_program(rv)
        assert a.completed and r.completed, name
        assert a.observable() == r.observable(), name


def test_step_limit_stops_runaway_loops():
    program = load("sum_loop", Isa.ARMV8)
    result = run_program(program, step_limit=5)
    assert not result.completed
    assert result.error


def test_bad_pointer_faults():
    text = "\t.text\n\t.global\tmain\n\t.type\tmain, %function\nmain:\n\tmov\tx1, 0\n\tldr\tx0, [x1]\n\tret\n"
    result = run_program(parse_program(text, Isa.ARMV8))
    assert result.faulted
    assert result.signal == 11
