"""Comparison of run outputs and of program literals."""

import difflib
from typing import List, Optional

from asm.models import Program
from semantics.models import ExecutionResult

from .models import LiteralDiff, OutputDiff
from .parsing import extract_changed_lines, numeric_literals, string_literals
from .utils import quote_literal

MAX_DIFF_CHARS = 1_000_000
CLOSE_MATCH_CUTOFF = 0.6


def compare_outputs(expected: ExecutionResult, actual: ExecutionResult, fixture: str = "",
                    context: int = 3, max_chars: int = MAX_DIFF_CHARS) -> List[OutputDiff]:
    """Every observable difference between a reference run and a candidate run."""
    diffs: List[OutputDiff] = []
    if actual.error and not actual.faulted:
        diffs.append(OutputDiff(fixture, "error", expected.error or None, actual.error))
    if expected.signal != actual.signal:
        diffs.append(OutputDiff(fixture, "signal", str(expected.signal), str(actual.signal)))
    if expected.exit_code != actual.exit_code:
        diffs.append(OutputDiff(fixture, "exit-code", str(expected.exit_code), str(actual.exit_code)))
    if expected.stdout != actual.stdout:
        diff = OutputDiff(fixture, "stdout", expected.stdout, actual.stdout)
        if len(expected.stdout) <= max_chars and len(actual.stdout) <= max_chars:
            lines = difflib.unified_diff(expected.stdout.splitlines(), actual.stdout.splitlines(),
                                         fromfile=f"expected/{fixture or 'run'}",
                                         tofile=f"actual/{fixture or 'run'}", n=context, lineterm="")
            diff.diff = "\n".join(lines)
            diff.changed_lines = extract_changed_lines(diff.diff)
        else:
            diff.diff_truncated = True
        diffs.append(diff)
    return diffs


def compare_literals(source: Program, candidate: Program) -> List[LiteralDiff]:
    """Source literals the candidate only approximates.

    A source string with no exact twin in the candidate but a close one is a
    string diff. A source numeric global with no equal candidate value, where
    the candidate has a global under the same label, is a constant diff.
    """
    diffs: List[LiteralDiff] = []
    theirs = {quote_literal(v): label for label, v in string_literals(candidate).items()}
    for label, data in string_literals(source).items():
        text = quote_literal(data)
        if text in theirs:
            continue
        close = difflib.get_close_matches(text, list(theirs), n=1, cutoff=CLOSE_MATCH_CUTOFF)
        if close:
            diffs.append(LiteralDiff("string", label, text, close[0]))
    values = numeric_literals(candidate)
    present = set(values.values())
    for label, value in numeric_literals(source).items():
        if value in present:
            continue
        actual: Optional[int] = values.get(label)
        if actual is not None:
            diffs.append(LiteralDiff("constant", label, f"0x{value:x}", f"0x{actual:x}"))
    return diffs
