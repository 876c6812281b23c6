"""The guess-and-sketch pipeline: oracle checks, span repairs and the failure report."""

from .models import OracleVerdict, PipelineConfig, RepairRecord, TranspileResult
from .oracle import CommandOracle, InterpreterOracle, make_oracle
from .recombine import recombine
from .summary import samples_used_summary
from .taxonomy import (
    TABLE_ORDER, CompileReport, FailureTable, RunReport, classify_failure, compile_report,
    failure_table,
)
from .transpile import guess_and_sketch, guess_only, other_isa, repair_candidate

__all__ = [
    'OracleVerdict', 'PipelineConfig', 'RepairRecord', 'TranspileResult',
    'CommandOracle', 'InterpreterOracle', 'make_oracle',
    'recombine',
    'samples_used_summary',
    'TABLE_ORDER', 'CompileReport', 'FailureTable', 'RunReport', 'classify_failure',
    'compile_report', 'failure_table',
    'guess_and_sketch', 'guess_only', 'other_isa', 'repair_candidate',
]
