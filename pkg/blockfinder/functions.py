"""Function boundaries of a parsed program."""

from typing import List

from asm.models import AsmFunction, Program


def split_functions(program: Program) -> List[AsmFunction]:
    """The program's functions in source order.

    Preamble lines followed by each function's header and body reconstruct the
    program's line sequence.
    """
    return list(program.functions)
