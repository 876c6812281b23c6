"""Sketches over flagged candidate blocks and the solvers that fill them."""

from .cegis import cegis_solve
from .global_refs import GlobalResolution, LabelAllocator, resolve_global_reference
from .holes import apply_assignment, assign_lines, make_sketch, operand_domain, sketch_from_lines
from .models import HoleAssignment, HoleDomain, SolveResult, SolverConfig, Sketch
from .spec_builder import build_spec, infer_register_map, span_lines, symbol_table

__all__ = [
    'cegis_solve',
    'GlobalResolution', 'LabelAllocator', 'resolve_global_reference',
    'apply_assignment', 'assign_lines', 'make_sketch', 'operand_domain', 'sketch_from_lines',
    'HoleAssignment', 'HoleDomain', 'SolveResult', 'SolverConfig', 'Sketch',
    'build_spec', 'infer_register_map', 'span_lines', 'symbol_table',
]
