import pytest

from asm import Isa, parse_program
from comparison.operations import (
    compare_literals, compare_outputs, decode_output, extract_changed_lines, looks_binary, numeric_literals,
    run_comparison, string_literals,
)
from semantics import Fixture
from semantics.models import ExecutionResult
from helpers import corpus_path, load, load_pair


def test_identical_runs_have_no_diffs():
    run = ExecutionResult("42\n", 0, steps=10)
    assert compare_outputs(run, ExecutionResult("42\n", 0, steps=12)) == []


def test_stdout_diff_has_changed_lines():
    (diff,) = compare_outputs(ExecutionResult("a\nb\nc\n"), ExecutionResult("a\nB\nc\n"), "f0")
    assert diff.kind == "stdout"
    assert diff.fixture == "f0"
    assert diff.changed_lines == [("b", "B", 2, 2)]
    assert "-b" in diff.diff and "+B" in diff.diff


def test_oversized_stdout_is_not_diffed():
    (diff,) = compare_outputs(ExecutionResult("x" * 50), ExecutionResult("y" * 50), max_chars=10)
    assert diff.diff_truncated
    assert diff.diff is None


def test_fault_and_exit_code_diffs():
    crashed = ExecutionResult("", None, 11, error="memory fault at 0x0")
    kinds = [d.kind for d in compare_outputs(ExecutionResult("ok\n", 0), crashed)]
    assert kinds == ["signal", "exit-code", "stdout"]
    stuck = ExecutionResult("", 0, error="step limit reached")
    assert [d.kind for d in compare_outputs(ExecutionResult(""), stuck)] == ["error"]


def test_run_comparison_summarises_by_kind():
    expected = [ExecutionResult("1\n"), ExecutionResult("2\n", 3)]
    actual = [ExecutionResult("1\n"), ExecutionResult("9\n", 4)]
    diffs, summary = run_comparison(expected, actual, [Fixture(name="one"), Fixture(("x",))])
    assert summary == {"stdout": 1, "exit_code": 1, "signal": 0, "error": 0}
    assert {d.fixture for d in diffs} == {"fixture-1"}


def test_run_comparison_needs_paired_runs():
    with pytest.raises(ValueError):
        run_comparison([ExecutionResult()], [], [Fixture()])


def test_extract_changed_lines():
    diff = "\n".join([
        "--- a", "+++ b", "@@ -1,4 +1,4 @@", " same", "-old", "+new", " same", "-gone", "@@ -10 +10,2 @@",
        "+added",
    ])
    assert extract_changed_lines(diff) == [
        ("old", "new", 2, 2), ("gone", None, 4, None), (None, "added", None, 10),
    ]


def test_literals_of_a_program():
    program = load("global_word", Isa.RISCV64)
    assert string_literals(program) == {".LC0": b"%ld\n"}
    assert numeric_literals(program) == {".LC1": 1234567890123}


def test_matching_literals():
    arm, rv = load_pair("global_word")
    assert compare_literals(arm, rv) == []


def test_close_string_is_reported():
    arm = load("add_const", Isa.ARMV8)
    text = corpus_path("add_const", Isa.RISCV64).read_text().replace('"%d\\n"', '"%d \\n"')
    (diff,) = compare_literals(arm, parse_program(text, Isa.RISCV64))
    assert (diff.kind, diff.label) == ("string", ".LC0")
    assert (diff.expected, diff.actual) == ("%d\\n", "%d \\n")


def test_wrong_constant_is_reported():
    arm = load("global_word", Isa.ARMV8)
    text = corpus_path("global_word", Isa.RISCV64).read_text().replace("1234567890123", "1234567890124")
    (diff,) = compare_literals(arm, parse_program(text, Isa.RISCV64))
    assert diff.to_dict() == {"kind": "constant", "label": ".LC1",
                              "expected": f"0x{1234567890123:x}", "actual": f"0x{1234567890124:x}"}


def test_output_decoding():
    assert not looks_binary(b"sum=55\n")
    assert looks_binary(b"a\x00b")
    assert looks_binary(b"\xff\xfe")
    assert decode_output(b"ok\xff") == "ok�"
