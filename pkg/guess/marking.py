"""Error marking: weak tokens and references that are out of scope."""

import logging
from typing import List, Mapping, Optional, Sequence

import numpy as np

from asm.models import Program
from blockfinder.models import RefStatus, ScopedRef, SubseqSpan

from .models import Alignment, ErrorFlag, ErrorMask

logger = logging.getLogger(__name__)


def _differs(ref: ScopedRef, counterpart: Optional[ScopedRef], candidate: Optional[Program],
             source: Optional[Program]) -> bool:
    """Whether a candidate reference fails to reproduce the input's global data."""
    if ref.status is RefStatus.UNDEFINED:
        return True
    if counterpart is None or counterpart.status is not RefStatus.GLOBAL_DEFINED:
        return False
    if ref.status is not RefStatus.GLOBAL_DEFINED or candidate is None or source is None:
        return False
    want = source.globals[counterpart.ref.name]
    have = candidate.globals[ref.ref.name]
    if want.decoded_value is not None:
        return have.decoded_value != want.decoded_value
    return tuple(l.args for l in have.lines) != tuple(l.args for l in want.lines)


def mark_errors(n_tokens: int, probs: Sequence[float], gamma: float, alignment: Optional[Alignment],
                scope_report: Mapping[SubseqSpan, List[ScopedRef]],
                source_scope: Optional[Mapping[SubseqSpan, List[ScopedRef]]] = None,
                candidate: Optional[Program] = None, source: Optional[Program] = None) -> ErrorMask:
    """Flag tokens predicted below gamma and references that leave the program's scope.

    A reference token is out of scope when it names nothing the candidate defines,
    or when its aligned input span references global data that the candidate's
    reference does not decode to (references are paired by position in the span).
    """
    probs = np.asarray(probs, dtype=np.float64)
    flags = [ErrorFlag.LOW_CONFIDENCE if p < gamma else ErrorFlag.NONE for p in probs[:n_tokens]]
    flags += [ErrorFlag.NONE] * (n_tokens - len(flags))
    source_scope = source_scope or {}
    for span, refs in scope_report.items():
        counterparts: List[ScopedRef] = []
        if alignment is not None and span in alignment.output_spans:
            aligned = alignment.aligned_to(span)
            counterparts = [r for r in source_scope.get(aligned, [])]
        for k, ref in enumerate(refs):
            counterpart = counterparts[k] if k < len(counterparts) else None
            if _differs(ref, counterpart, candidate, source) and ref.token < n_tokens:
                flags[ref.token] = ErrorFlag.OUT_OF_SCOPE
    mask = ErrorMask(tuple(flags))
    logger.debug("marked %d of %d tokens", len(mask.flagged()), n_tokens)
    return mask
