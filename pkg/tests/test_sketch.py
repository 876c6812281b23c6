import struct
from concurrent.futures import ThreadPoolExecutor

import pytest

from asm import Isa, LabelRef, format_line, parse_lines
from blockfinder import partition_spans
from core.errors import (
    ConfigError, DomainExplosion, HoleOnMnemonic, IncompleteAssignment, UnalignableSpan,
    UndecodableRequirement,
)
from semantics import BlockSpec, blocks_equivalent
from sketch import (
    HoleAssignment, HoleDomain, LabelAllocator, SolveResult, SolverConfig, apply_assignment, assign_lines,
    build_spec, cegis_solve, make_sketch, operand_domain, resolve_global_reference, sketch_from_lines,
    symbol_table,
)
from helpers import block, load, load_pair

ARM, RV = Isa.ARMV8, Isa.RISCV64


def _spec(text, isa=ARM):
    return BlockSpec.from_lines(block(text, isa), isa)


def _solve(spec_text, candidate_text, flagged, config=SolverConfig(), **kwargs):
    sketch = make_sketch(block(candidate_text, RV), flagged, RV, **kwargs)
    return sketch, cegis_solve(_spec(spec_text), sketch, config=config)


def test_immediate_repair():
    sketch, result = _solve("add w0, w0, 5", "addiw a0,a0,6", {3})
    assert result.solved
    assert result.assignment.values == {0: 5}
    assert sketch.domains[0].original == 6


def test_repair_found_by_propagation():
    _, result = _solve("add w0, w0, 5", "addiw a0,a0,6", {3}, SolverConfig(max_enum=100))
    assert result.solved
    assert result.assignment.values == {0: 5}


def test_constant_outside_the_window_is_proposed():
    _, result = _solve("mov w1, 50000;add w0, w0, w1", "li a1,49999;addw a0,a0,a1", {2})
    assert result.solved
    assert result.assignment.values == {0: 50000}


def test_register_repair_tries_preferred_first():
    sketch, result = _solve("add w0, w0, w1", "addw a0,a0,a0", {3}, preferred=("a1",))
    assert sketch.domains[0].values[:2] == ("a1", "a0")
    assert result.solved
    assert result.assignment.values == {0: "a1"}


def test_mnemonic_repair_ranges_over_the_group():
    sketch, result = _solve("add w0, w0, w1", "subw a0,a0,a1", {0})
    domain = sketch.domains[0]
    assert domain.kind == "mnemonic"
    assert domain.values[0] == "subw"
    assert "addw" in domain.values and "addiw" not in domain.values
    assert result.solved
    assert result.assignment.values == {0: "addw"}


def test_repaired_block_is_equivalent():
    sketch, result = _solve("mov w1, 3;sdiv w0, w0, w1", "li a1,4;divw a0,a0,a1", {2})
    assert result.solved
    lines = assign_lines(sketch, result.assignment.values)
    assert blocks_equivalent(_spec("mov w1, 3;sdiv w0, w0, w1"), BlockSpec.from_lines(lines, RV))


def test_no_immediate_fits():
    _, result = _solve("mul w0, w0, w0", "addiw a0,a0,1", {3})
    assert result.status == "unsat"
    assert result.assignment is None


def test_failed_propagation_is_a_timeout():
    _, result = _solve("mul w0, w0, w0", "addiw a0,a0,1", {3}, SolverConfig(max_enum=100))
    assert result.status == "timeout"
    assert result.reason


def test_structural_domain_too_large():
    sketch = make_sketch(block("addw a0,a1,a2", RV), {1, 2, 3}, RV)
    with pytest.raises(DomainExplosion):
        cegis_solve(_spec("add w0, w1, w2"), sketch, config=SolverConfig(max_enum=1000))


def test_register_domain_order():
    line = block("add a0,a1,a2", RV)[0]
    domain = operand_domain(line, 1, RV, preferred=("a5", "a1"))
    assert domain.values[:3] == ("a5", "a1", "ra")
    assert len(set(domain.values)) == len(domain.values)
    assert "zero" not in domain.values and "sp" not in domain.values
    narrow = operand_domain(block("add w0, w1, w2", ARM)[0], 0, ARM)
    assert all(r.startswith("w") for r in narrow.values)


def test_immediate_domains_are_cut_to_the_window():
    line = block("addiw a0,a0,6", RV)[0]
    assert operand_domain(line, 2, RV).bounds == (-2048, 2047)
    assert operand_domain(line, 2, RV, window=(-10, 10)).bounds == (-10, 10)
    shift = operand_domain(block("lsl w0, w0, 3", ARM)[0], 2, ARM)
    assert (shift.kind, shift.bounds) == ("shift-amount", (0, 31))
    assert shift.contains(31) and not shift.contains(32)


def test_mnemonic_without_a_group():
    with pytest.raises(HoleOnMnemonic) as info:
        make_sketch(block("lui a0,1", RV), {0}, RV)
    assert info.value.domain == ()


def test_flags_outside_the_block_are_ignored():
    sketch = make_sketch(block("addiw a0,a0,6", RV), {3, 40}, RV)
    assert sketch.holes == (0,)


def test_assignment_must_be_complete():
    sketch = make_sketch(block("addiw a0,a1,6", RV), {2, 3}, RV)
    with pytest.raises(IncompleteAssignment):
        assign_lines(sketch, {0: "a0"})
    partial = assign_lines(sketch, {0: "a0"}, partial=True)
    assert partial[0].operands[1].name == "a0"


def test_apply_assignment_prints_the_filled_block():
    sketch = make_sketch(block("addiw a0,a0,6", RV), {3}, RV)
    tokens = apply_assignment(sketch, HoleAssignment({0: 5}))
    assert "".join(tokens) == format_line(block("addiw a0,a0,5", RV)[0], RV)


def test_sketch_file_holes():
    sketch = sketch_from_lines(parse_lines("addiw a0,a0,?0\n?1 a0,a0,a1\n", RV), RV)
    assert sketch.domains[0].bounds == (-2048, 2047)
    assert sketch.domains[1].kind == "mnemonic"
    assert "addw" in sketch.domains[1].values
    result = cegis_solve(_spec("add w0, w0, 3;add w0, w0, w1"), sketch)
    assert result.solved
    assert result.assignment.values[0] == 3


def test_sketch_file_errors():
    with pytest.raises(ConfigError):
        sketch_from_lines(parse_lines("addiw a0,a0,?0\naddiw a0,a0,?0\n", RV), RV)
    with pytest.raises(ConfigError):
        sketch_from_lines(parse_lines("j ?0\n", RV), RV)
    labelled = sketch_from_lines(parse_lines("j ?0\n", RV), RV, labels=[".L2", ".L3"])
    assert labelled.domains[0].values == (LabelRef(".L2"), LabelRef(".L3"))


def test_solver_config_validation():
    with pytest.raises(ConfigError):
        SolverConfig(outputs="some")
    with pytest.raises(ConfigError):
        SolverConfig(max_iters=0)
    with pytest.raises(ConfigError):
        SolverConfig(imm_window=(5, 1))
    with pytest.raises(ConfigError):
        HoleDomain("colour")
    with pytest.raises(ConfigError):
        SolveResult("maybe")
    config = SolverConfig.from_dict({"max_enum": 50, "imm_window": [-8, 8], "unknown": 1})
    assert config.imm_window == (-8, 8)
    assert SolverConfig.from_dict(config.to_dict()) == config


def test_build_spec_of_an_aligned_block(add_const):
    arm, _ = add_const
    spans = partition_spans(arm)
    body = next(s for s in spans if s.kind == "block" and s.function == 0)
    spec = build_spec(arm, body)
    assert (spec.inputs, spec.outputs) == (("w0",), ("w0",))
    with pytest.raises(UnalignableSpan):
        build_spec(arm, next(s for s in spans if s.kind == "line"))


def test_symbol_table_inlines_decoded_globals():
    program = load("global_word", ARM)
    lines = program.all_lines()
    assert symbol_table(program, lines) == {".LC1": 1234567890123}
    with pytest.raises(UndecodableRequirement):
        symbol_table(program, lines, strict=True)


def _double(value):
    return struct.unpack("<Q", struct.pack("<d", value))[0]


def test_reuse_existing_globals():
    arm, rv = load_pair("global_word")
    allocator = LabelAllocator()
    word = resolve_global_reference(rv, "label", arm.globals[".LC1"], allocator)
    assert (word.kind, word.label) == ("reuse", ".LC1")
    text = resolve_global_reference(rv, "label", arm.globals[".LC0"], allocator)
    assert (text.kind, text.label) == ("reuse", ".LC0")
    assert allocator.created() == {}


def test_create_missing_global():
    rv = load("global_word", RV)
    allocator = LabelAllocator()
    first = resolve_global_reference(rv, "label", _double(5.0), allocator)
    assert first.kind == "create"
    assert first.label == ".LC_gs0"
    assert [(l.mnemonic, l.args) for l in first.lines] == [(".dword", "0x4014000000000000")]
    again = resolve_global_reference(rv, "label", _double(5.0), allocator)
    assert again.label == first.label
    assert list(allocator.created()) == [".LC_gs0"]
    arm_side = resolve_global_reference(load("global_word", ARM), "label", _double(5.0), LabelAllocator())
    assert arm_side.lines[0].mnemonic == ".xword"


def test_inline_numeric_slot():
    arm, rv = load_pair("global_word")
    resolution = resolve_global_reference(rv, "numeric", 0xFFFF_FFFF, LabelAllocator(), width=4)
    assert (resolution.kind, resolution.text) == ("inline", "-1")
    assert resolve_global_reference(rv, "numeric", arm.globals[".LC1"], LabelAllocator()).text == "1234567890123"
    with pytest.raises(UndecodableRequirement):
        resolve_global_reference(rv, "numeric", arm.globals[".LC0"], LabelAllocator())
    with pytest.raises(ConfigError):
        resolve_global_reference(rv, "register", 1, LabelAllocator())


def test_allocator_skips_taken_labels():
    allocator = LabelAllocator()
    label, _, fresh = allocator.allocate("a", (), taken={".LC_gs0"})
    assert (label, fresh) == (".LC_gs1", True)
    assert allocator.allocate("a", ())[2] is False


def test_allocator_is_shared_across_threads():
    allocator = LabelAllocator()
    with ThreadPoolExecutor(max_workers=8) as pool:
        labels = set(pool.map(lambda _: allocator.allocate("same", ())[0], range(64)))
    assert labels == {".LC_gs0"}
