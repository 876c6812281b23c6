"""Data models for output and literal comparison."""

from dataclasses import asdict, dataclass
from typing import Dict, List, Optional, Tuple

OUTPUT_DIFF_KINDS = ("stdout", "exit-code", "signal", "error")
LITERAL_DIFF_KINDS = ("string", "constant")

# (expected line, actual line, expected line number, actual line number)
ChangedLine = Tuple[Optional[str], Optional[str], Optional[int], Optional[int]]


@dataclass
class OutputDiff:
    """One way a run's observable behaviour differs from the reference run."""
    fixture: str
    kind: str
    expected: Optional[str] = None
    actual: Optional[str] = None
    diff: Optional[str] = None
    diff_truncated: bool = False
    changed_lines: Optional[List[ChangedLine]] = None

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass
class LiteralDiff:
    """A string or numeric literal of the source that the candidate reproduces wrongly.

    label names the source global, actual the closest candidate literal.
    """
    kind: str
    label: str
    expected: str
    actual: Optional[str] = None

    def to_dict(self) -> Dict:
        return asdict(self)
