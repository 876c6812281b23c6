"""Parsing of unified diffs and of the literals a program defines."""

import re
from typing import Dict, List, Optional

from asm.models import Program
from core.constants import STRING_DIRECTIVES
from semantics.memory import STRING_RE, unescape

from .models import ChangedLine

HUNK_RE = re.compile(r'@@ -(\d+)(?:,\d+)? \+(\d+)(?:,\d+)? @@')


def extract_changed_lines(diff_str: str) -> List[ChangedLine]:
    """Paired changed lines of a unified diff, with 1-based line numbers.

    A removal directly followed by an addition is one change; any other
    removal or addition stands alone.
    """
    changes: List[ChangedLine] = []
    old_no: Optional[int] = None
    new_no: Optional[int] = None
    pending: Optional[ChangedLine] = None

    def flush() -> None:
        nonlocal pending
        if pending is not None:
            changes.append(pending)
            pending = None

    for line in diff_str.splitlines():
        if line.startswith("@@"):
            flush()
            m = HUNK_RE.search(line)
            old_no, new_no = (int(m.group(1)), int(m.group(2))) if m else (None, None)
            continue
        if line.startswith("---") or line.startswith("+++") or not line:
            continue
        if line.startswith("-"):
            flush()
            pending = (line[1:], None, old_no, None)
            if old_no is not None:
                old_no += 1
        elif line.startswith("+"):
            if pending is not None:
                changes.append((pending[0], line[1:], pending[2], new_no))
                pending = None
            else:
                changes.append((None, line[1:], None, new_no))
            if new_no is not None:
                new_no += 1
        else:
            flush()
            if old_no is not None:
                old_no += 1
            if new_no is not None:
                new_no += 1
    flush()
    return changes


def string_literals(program: Program) -> Dict[str, bytes]:
    """Bytes of every string global, keyed by label."""
    out: Dict[str, bytes] = {}
    for label, definition in program.globals.items():
        chunks = [unescape(m.group(1))
                  for line in definition.lines if line.mnemonic in STRING_DIRECTIVES
                  for m in STRING_RE.finditer(line.args or "")]
        if chunks:
            out[label] = b"".join(chunks)
    return out


def numeric_literals(program: Program) -> Dict[str, int]:
    """Decoded value of every numeric global, keyed by label."""
    return {label: d.decoded_value for label, d in program.globals.items() if d.decoded_value is not None}
