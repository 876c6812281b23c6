"""Bit-vector semantics of the instruction subset, block equivalence and program execution."""

from .equivalence import (
    blocks_equivalent, default_pairing, eval_block, eval_lanes, input_battery, mismatch_matrix,
    paired_outputs,
)
from .interpreter import Env, execute_line, run_lines, step
from .models import (
    BlockSpec, EquivalenceResult, ExecutionResult, Fixture, RegisterMap, VerifierConfig,
)
from .program import run_fixtures, run_program
from .reference import reference_step
from .smtlib import Z3Verifier, export_smtlib
from .state import LaneState, MachineState

__all__ = [
    'blocks_equivalent', 'default_pairing', 'eval_block', 'eval_lanes', 'input_battery',
    'mismatch_matrix', 'paired_outputs',
    'Env', 'execute_line', 'run_lines', 'step',
    'BlockSpec', 'EquivalenceResult', 'ExecutionResult', 'Fixture', 'RegisterMap', 'VerifierConfig',
    'run_fixtures', 'run_program',
    'reference_step',
    'Z3Verifier', 'export_smtlib',
    'LaneState', 'MachineState',
]
