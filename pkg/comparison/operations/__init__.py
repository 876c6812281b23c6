"""Output and literal comparison used by the oracles and the failure taxonomy."""

from .comparison_runner import run_comparison
from .models import LiteralDiff, OutputDiff
from .parsing import extract_changed_lines, numeric_literals, string_literals
from .text_comparison import compare_literals, compare_outputs
from .utils import decode_output, looks_binary

__all__ = [
    'run_comparison',
    'LiteralDiff', 'OutputDiff',
    'extract_changed_lines', 'numeric_literals', 'string_literals',
    'compare_literals', 'compare_outputs',
    'decode_output', 'looks_binary',
]
