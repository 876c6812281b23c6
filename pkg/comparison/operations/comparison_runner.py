"""Fixture-by-fixture comparison of a candidate's runs with the reference runs."""

from typing import Dict, List, Sequence, Tuple

from semantics.models import ExecutionResult, Fixture

from .models import OutputDiff
from .text_comparison import compare_outputs


def run_comparison(expected: Sequence[ExecutionResult], actual: Sequence[ExecutionResult],
                   fixtures: Sequence[Fixture], context: int = 3) -> Tuple[List[OutputDiff], Dict[str, int]]:
    """(diffs, summary) over paired runs; the summary counts diffs per kind."""
    if len(expected) != len(actual):
        raise ValueError(f"{len(expected)} reference runs but {len(actual)} candidate runs")
    names = [f.name or f"fixture-{i}" for i, f in enumerate(fixtures)] or ["fixture-0"]
    diffs: List[OutputDiff] = []
    for name, want, got in zip(names, expected, actual):
        diffs.extend(compare_outputs(want, got, name, context))
    summary = {
        "stdout": len([d for d in diffs if d.kind == "stdout"]),
        "exit_code": len([d for d in diffs if d.kind == "exit-code"]),
        "signal": len([d for d in diffs if d.kind == "signal"]),
        "error": len([d for d in diffs if d.kind == "error"]),
    }
    return diffs, summary
