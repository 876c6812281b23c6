"""Function splitting, pure-block extraction and scope analysis."""

from .functions import split_functions
from .globals import collect_globals, decode, encode_global, lookup_global
from .models import PureBlock, RefStatus, ScopedRef, SubseqSpan
from .registers import free_registers_of, reads_writes, written_registers
from .scanner import (
    boundary_reason, extract_pure_blocks, free_registers, is_boundary, partition_spans,
    program_blocks,
)
from .scope import find_out_of_scope_refs, undefined_refs

__all__ = [
    'split_functions',
    'collect_globals', 'decode', 'encode_global', 'lookup_global',
    'PureBlock', 'RefStatus', 'ScopedRef', 'SubseqSpan',
    'free_registers_of', 'reads_writes', 'written_registers',
    'boundary_reason', 'extract_pure_blocks', 'free_registers', 'is_boundary',
    'partition_spans', 'program_blocks',
    'find_out_of_scope_refs', 'undefined_refs',
]
