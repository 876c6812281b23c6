"""Span alignment from attention: each output span takes the input span of largest submatrix norm."""

import logging
from typing import Sequence

import numpy as np

from blockfinder.models import SubseqSpan
from core.errors import EmptyPartition, ShapeError

from .models import Alignment, check_norm

logger = logging.getLogger(__name__)


def submatrix_norm(block: np.ndarray, norm: str = "frobenius") -> float:
    if block.size == 0:
        return 0.0
    if norm == "frobenius":
        return float(np.linalg.norm(block))
    if norm == "sum":
        return float(block.sum())
    return float(block.max())


def extract_alignment(attention: np.ndarray, input_spans: Sequence[SubseqSpan],
                      output_spans: Sequence[SubseqSpan], norm: str = "frobenius") -> Alignment:
    """Align every output span to the input span whose attention submatrix has the largest norm.

    Ties go to the earliest input span.
    """
    check_norm(norm)
    if not input_spans or not output_spans:
        raise EmptyPartition("alignment needs non-empty input and output partitions")
    attention = np.asarray(attention, dtype=np.float64)
    rows_needed = max(s.end_token for s in output_spans) + 1
    cols_needed = max(s.end_token for s in input_spans) + 1
    if attention.ndim != 2 or attention.shape[0] < rows_needed or attention.shape[1] < cols_needed:
        raise ShapeError(-1, f"attention of shape {attention.shape} does not cover "
                             f"{rows_needed}x{cols_needed} tokens")
    mapping, scores = [], []
    for out in output_spans:
        rows = attention[out.start_token:out.end_token + 1]
        norms = np.array([submatrix_norm(rows[:, s.start_token:s.end_token + 1], norm) for s in input_spans])
        best = int(np.argmax(norms))
        mapping.append(best)
        scores.append(float(norms[best]))
    logger.debug("aligned %d output spans over %d input spans", len(output_spans), len(input_spans))
    return Alignment(tuple(output_spans), tuple(input_spans), tuple(mapping), tuple(scores))
