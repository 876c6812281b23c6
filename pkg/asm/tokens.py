"""Operand-level tokenization of printed assembly."""

from dataclasses import dataclass
from typing import List, Sequence

from .isa import Isa
from .models import AsmFunction, AsmLine, Program
from .printing import line_pieces


@dataclass(frozen=True)
class Token:
    """One token of printed assembly.

    line indexes the tokenized line list; start/end are the token's column span in
    that printed line. lead + text + trail over all tokens reproduces the text.
    function is the owning function's index, or -1 for preamble lines.
    """
    text: str
    line: int
    start: int
    end: int
    lead: str = ""
    trail: str = ""
    function: int = -1
    local_line: int = -1
    kind: str = "operand"  # label, directive, args, mnemonic, operand

    @property
    def is_mnemonic(self) -> bool:
        return self.kind == "mnemonic"


def function_lines(fn: AsmFunction) -> List[AsmLine]:
    """Header directives followed by the function body."""
    return list(fn.header) + list(fn.lines)


def tokenize_lines(lines: Sequence[AsmLine], isa: Isa, first_line: int = 0,
                   function: int = -1) -> List[Token]:
    tokens: List[Token] = []
    for offset, line in enumerate(lines):
        col = 0
        for kind, lead, text, trail in line_pieces(line, isa):
            col += len(lead)
            tokens.append(Token(text, first_line + offset, col, col + len(text), lead, trail,
                                function, offset if function >= 0 else -1, kind))
            col += len(text) + len(trail)
    return tokens


def tokenize_function(fn: AsmFunction, function: int = 0) -> List[Token]:
    """Tokens of a function's header and body; line indexes function_lines(fn)."""
    return tokenize_lines(function_lines(fn), fn.isa, 0, function)


def tokenize_program(program: Program) -> List[Token]:
    """Tokens of the whole program; line indexes program.all_lines()."""
    tokens = tokenize_lines(program.preamble, program.isa)
    line = len(program.preamble)
    for n, fn in enumerate(program.functions):
        tokens.extend(tokenize_lines(function_lines(fn), program.isa, line, n))
        line += len(fn.header) + len(fn.lines)
    return tokens


def join_tokens(tokens: Sequence[Token]) -> str:
    return "".join(t.lead + t.text + t.trail for t in tokens)
