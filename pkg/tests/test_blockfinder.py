import struct

import numpy as np
import pytest

from asm import Isa, parse_program, tokenize_program
from asm.parsing import parse_lines
from blockfinder import (
    RefStatus, boundary_reason, decode, encode_global, extract_pure_blocks, find_out_of_scope_refs,
    free_registers, free_registers_of, is_boundary, lookup_global, partition_spans, program_blocks,
    reads_writes, split_functions, undefined_refs, written_registers,
)
from blockfinder.registers import last_written_registers
from blockfinder.scanner import is_solvable_line
from core.errors import UndefinedLabel
from helpers import block, corpus_files, corpus_path, load, random_program, trials

BOTH = pytest.mark.parametrize("isa", [Isa.ARMV8, Isa.RISCV64], ids=["armv8", "riscv64"])


def _assert_partition(program):
    tokens = tokenize_program(program)
    spans = partition_spans(program)
    assert spans[0].start_token == 0
    for left, right in zip(spans, spans[1:]):
        assert right.start_token == left.end_token + 1
        assert right.start_line == left.end_line + 1
    assert spans[-1].end_token == len(tokens) - 1
    assert spans[-1].end_line == len(program.all_lines()) - 1


def _assert_pure(program):
    lines = program.all_lines()
    for b in program_blocks(program):
        assert all(boundary_reason(l, program.isa) is None for l in b.lines)
        assert tuple(lines[i] for i in b.span.line_range) == b.lines
        before, after = b.span.start_line - 1, b.span.end_line + 1
        if before >= 0:
            assert is_boundary(lines[before], program.isa)
        if after < len(lines):
            assert is_boundary(lines[after], program.isa)


@BOTH
def test_partition_covers_corpus(isa):
    for path in corpus_files(isa):
        _assert_partition(parse_program(path.read_text(encoding="utf-8"), isa))


@BOTH
def test_blocks_are_maximal_and_pure_on_fuzzed_programs(isa):
    rng = np.random.default_rng(7)
    for _ in range(trials(60, 10_000)):
        program = random_program(rng, isa)
        _assert_partition(program)
        _assert_pure(program)


def test_span_kinds(add_const):
    arm, _ = add_const
    spans = partition_spans(arm)
    blocks = [s for s in spans if s.kind == "block"]
    assert [s for s in spans if s.kind == "line"]
    assert {(s.start_line, s.end_line) for s in blocks} == {
        (b.span.start_line, b.span.end_line) for b in program_blocks(arm)}


@BOTH
def test_compute_body_is_one_block(add_const, isa):
    program = add_const[0] if isa is Isa.ARMV8 else add_const[1]
    found = [b for b in program_blocks(program) if b.span.function == 0]
    assert len(found) == 1
    reg = "w0" if isa is Isa.ARMV8 else "a0"
    assert free_registers(found[0]) == (reg,)
    assert found[0].outputs == (reg,)
    assert found[0].is_solvable


def test_address_materialisation_is_pure_but_not_solvable():
    program = load("global_word", Isa.ARMV8)
    first = program_blocks(program)[0]
    assert [l.mnemonic for l in first.lines] == ["adrp", "add"]
    assert not first.is_solvable
    assert [r.name for r in first.global_refs] == [".LC1", ".LC1"]


def test_boundary_reasons():
    lines = parse_lines("loop:\n.align 2\nbl printf\nldr x0, [x1]\nsub sp, sp, 16\nb.ne loop\n"
                        "ret\nfoo x0\nadd x0, x0, 1\n", Isa.ARMV8)
    reasons = [boundary_reason(l, Isa.ARMV8) for l in lines]
    assert reasons == ["label", "directive", "call", "memory", "stack", "branch", "return", "opaque", None]


def test_solvable_lines():
    arm = parse_lines("add x0, x0, 1\nadd x0, x0, :lo12:.LC0\ncmp w0, 3\n", Isa.ARMV8)
    assert [is_solvable_line(l, Isa.ARMV8) for l in arm] == [True, False, True]


def test_reads_and_writes():
    line = block("add x0, x1, x2", Isa.ARMV8)[0]
    assert reads_writes(line, Isa.ARMV8) == (["x1", "x2"], ["x0"])
    assert reads_writes(block("cmp w0, 5", Isa.ARMV8)[0], Isa.ARMV8) == (["w0"], ["nzcv"])
    assert reads_writes(block("mov w0, wzr", Isa.ARMV8)[0], Isa.ARMV8) == ([], ["w0"])
    assert reads_writes(block("addi a0,zero,3", Isa.RISCV64)[0], Isa.RISCV64) == ([], ["a0"])


def test_free_registers_prefer_the_wider_view():
    lines = block("add w0, w1, 1;add x3, x1, x2", Isa.ARMV8)
    assert free_registers_of(lines, Isa.ARMV8) == ("x1", "x2")


def test_written_registers_order():
    lines = block("mov w2, 1;add x0, x2, 3;mov w0, 4", Isa.ARMV8)
    assert written_registers(lines, Isa.ARMV8) == ("w2", "w0")
    assert last_written_registers(lines, Isa.ARMV8) == ("w0",)


@BOTH
def test_scope_statuses(add_const, isa):
    program = add_const[0] if isa is Isa.ARMV8 else add_const[1]
    tokens = tokenize_program(program)
    refs = [r for rs in find_out_of_scope_refs(program).values() for r in rs]
    by_name = {}
    for r in refs:
        by_name.setdefault(r.ref.name, set()).add(r.status)
        assert r.ref.name in tokens[r.token].text
    assert by_name["printf"] == {RefStatus.EXTERNAL}
    assert by_name["compute"] == {RefStatus.LOCAL}
    assert by_name[".LC0"] == {RefStatus.GLOBAL_DEFINED}
    assert undefined_refs(program) == []


def test_dropped_definition_is_undefined():
    text = corpus_path("add_const", Isa.ARMV8).read_text().replace(".LC0:", ".LC9:")
    program = parse_program(text, Isa.ARMV8)
    missing = undefined_refs(program)
    assert {r.ref.name for r in missing} == {".LC0"}
    assert len(missing) == 2


def test_refs_are_keyed_by_enclosing_span(add_const):
    arm, _ = add_const
    for span, refs in find_out_of_scope_refs(arm).items():
        for r in refs:
            assert span.start_line <= r.line <= span.end_line
            assert span.contains_token(r.token)


def test_global_word_decodes():
    program = load("global_word", Isa.ARMV8)
    word = program.globals[".LC1"]
    assert word.decoded_value == 1234567890123
    assert word.width == 8
    fmt = program.globals[".LC0"]
    assert fmt.decoded_value is None
    assert fmt.strings == ('"%ld\\n"',)


def test_double_encoding():
    bits = struct.unpack("<Q", struct.pack("<d", 5.0))[0]
    (line,) = encode_global(bits, 8, Isa.ARMV8)
    assert (line.mnemonic, line.args) == (".xword", "0x4014000000000000")
    assert encode_global(bits, 8, Isa.RISCV64)[0].mnemonic == ".dword"


def test_random_doubles_decode_bit_exactly():
    rng = np.random.default_rng(11)
    special = np.array([
        0x0000000000000001,  # smallest subnormal
        0x000FFFFFFFFFFFFF,
        0x7FEFFFFFFFFFFFFF,
        0x7FF0000000000000,
        0xFFF0000000000000,
        0x7FF0000000000001,  # signalling NaN
        0x7FF8DEADBEEF0000,
        0x8000000000000000,
    ], dtype=np.uint64)
    patterns = np.concatenate([rng.integers(0, 2**64 - 1, size=1000, dtype=np.uint64, endpoint=True), special])
    for value in patterns.view(np.float64):
        bits = int.from_bytes(value.tobytes(), "little")
        assert decode(encode_global(bits, 8)) == (bits, 8)


def test_narrow_encodings():
    assert encode_global(-1, 4)[0].args == "0xffffffff"
    assert encode_global(0x1234, 2, Isa.RISCV64)[0].mnemonic == ".half"
    assert decode(encode_global(0xAB, 1)) == (0xAB, 1)
    with pytest.raises(ValueError):
        encode_global(1, 3)


def test_split_functions_reconstructs_the_lines(add_const):
    for program in add_const:
        functions = split_functions(program)
        assert [fn.name for fn in functions] == ["compute", "main"]
        lines = list(program.preamble)
        for fn in functions:
            lines += list(fn.header) + list(fn.lines)
        assert lines == program.all_lines()


def _blocks(body):
    program = parse_program("main:\n" + body, Isa.ARMV8)
    return extract_pure_blocks(program.functions[0])


def test_extract_pure_blocks():
    (only,) = _blocks("\tadd w1, w0, w2\n\tlsl w1, w1, 2\n\tret\n")
    assert [l.mnemonic for l in only.lines] == ["add", "lsl"]
    assert free_registers(only) == ("w0", "w2")
    split = _blocks("\tmov w0, 1\n\tbl printf\n\tmov w0, 0\n")
    assert [[l.mnemonic for l in b.lines] for b in split] == [["mov"], ["mov"]]
    assert _blocks("\tldr x1, [x0]\n") == []


def test_lookup_global():
    program = load("global_word", Isa.ARMV8)
    assert lookup_global(program, ".LC1").decoded_value == 1234567890123
    assert lookup_global(program, "main").lines == ()
    with pytest.raises(UndefinedLabel):
        lookup_global(program, ".LC9")
