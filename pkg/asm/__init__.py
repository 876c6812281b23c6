"""Assembly IR, parser, printer and tokenizer for the ARMv8 / RISC-V subset."""

from .isa import Isa, is_register, register_info
from .models import (
    AsmFunction, AsmLine, FloatImmediate, GlobalDefinition, Hole, Immediate, IndexMode,
    LabelRef, LineKind, Memory, Operand, Program, RawOperand, Register, Shift,
)
from .parsing import parse_line, parse_lines, parse_operand, parse_program
from .printing import format_line, format_operand, print_lines, print_program
from .table import InstructionSpec, lookup
from .tokens import Token, function_lines, join_tokens, tokenize_function, tokenize_program
from .validation import validate_line

__all__ = [
    'Isa', 'is_register', 'register_info',
    'AsmFunction', 'AsmLine', 'FloatImmediate', 'GlobalDefinition', 'Hole', 'Immediate',
    'IndexMode', 'LabelRef', 'LineKind', 'Memory', 'Operand', 'Program', 'RawOperand',
    'Register', 'Shift',
    'parse_line', 'parse_lines', 'parse_operand', 'parse_program',
    'format_line', 'format_operand', 'print_lines', 'print_program',
    'InstructionSpec', 'lookup',
    'Token', 'function_lines', 'join_tokens', 'tokenize_function', 'tokenize_program',
    'validate_line',
]
