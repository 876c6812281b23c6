"""Guess interchange format: reading, writing and projection onto operand-level tokens.

One JSON record per line:

    {"schema_version": 1, "input_id": "fib", "rank": 1,
     "tokens": ["\\tmov", "\\tw0, ", ...], "probs": [1.0, 0.97, ...],
     "attention": {"rows": R, "cols": C, "data": [... R*C floats, row-major]},
     "source_tokens": [...],            # optional producer table for the input
     "metadata": {"layer": 5, "head_aggregation": "mean", "truncated": false}}
"""

import difflib
import json
import logging
from collections import defaultdict
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from asm.isa import Isa
from asm.models import Program
from asm.parsing import parse_program
from asm.tokens import Token, join_tokens, tokenize_program
from core.constants import DEFAULT_TOP_K, GUESS_SCHEMA_VERSION
from core.errors import SchemaError, ShapeError, TranspileError
from core.settings import ensure_dir

from .models import Candidate, GuessTuple, stochastic_rows

logger = logging.getLogger(__name__)

ROW_TOLERANCE = 1e-6


def _require(record: Mapping, key: str, kind, index: int):
    if key not in record:
        raise SchemaError(index, f"missing field {key!r}")
    value = record[key]
    if not isinstance(value, kind):
        raise SchemaError(index, f"field {key!r} has type {type(value).__name__}")
    return value


def parse_record(record: Mapping, index: int) -> GuessTuple:
    """Validate one interchange record."""
    if not isinstance(record, Mapping):
        raise SchemaError(index, "record is not an object")
    version = record.get("schema_version", GUESS_SCHEMA_VERSION)
    if version != GUESS_SCHEMA_VERSION:
        raise SchemaError(index, f"unsupported schema_version {version!r}")
    input_id = str(_require(record, "input_id", (str, int), index))
    rank = _require(record, "rank", int, index)
    if rank < 1:
        raise SchemaError(index, f"rank must be >= 1, got {rank}")
    tokens = _require(record, "tokens", list, index)
    if not all(isinstance(t, str) for t in tokens):
        raise SchemaError(index, "tokens must be strings")
    probs = np.asarray(_require(record, "probs", list, index), dtype=np.float64)
    if len(probs) != len(tokens):
        raise SchemaError(index, f"{len(tokens)} tokens but {len(probs)} probabilities")
    if probs.size and (np.any(probs < 0) or np.any(probs > 1) or np.any(np.isnan(probs))):
        raise SchemaError(index, "probabilities must lie in [0, 1]")
    att = _require(record, "attention", Mapping, index)
    try:
        rows, cols = int(att["rows"]), int(att["cols"])
        data = np.asarray(att["data"], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError(index, f"malformed attention: {e}") from e
    if rows != len(tokens) or data.size != rows * cols:
        raise ShapeError(index, f"attention is {rows}x{cols} with {data.size} values for {len(tokens)} tokens")
    attention = data.reshape(rows, cols)
    if rows and np.any(np.abs(attention.sum(axis=1) - 1.0) > ROW_TOLERANCE):
        raise SchemaError(index, "attention rows must sum to 1")
    source = record.get("source_tokens")
    if source is not None:
        if not isinstance(source, list) or not all(isinstance(t, str) for t in source):
            raise SchemaError(index, "source_tokens must be a list of strings")
        if len(source) != cols:
            raise ShapeError(index, f"attention has {cols} columns for {len(source)} source tokens")
        source = tuple(source)
    metadata = record.get("metadata", {})
    if not isinstance(metadata, Mapping):
        raise SchemaError(index, "metadata must be an object")
    return GuessTuple(input_id, rank, tuple(tokens), probs, attention, source, dict(metadata))


def read_records(path: Path) -> Iterable[Tuple[int, dict]]:
    with open(path, encoding="utf-8") as fh:
        for index, line in enumerate(fh):
            if not line.strip():
                continue
            try:
                yield index, json.loads(line)
            except ValueError as e:
                raise SchemaError(index, f"invalid JSON: {e}") from e


def load_guesses(path, top_k: int = DEFAULT_TOP_K) -> Dict[str, List[GuessTuple]]:
    """Guesses per input id, ordered by rank, at most top_k each."""
    by_input: Dict[str, List[GuessTuple]] = defaultdict(list)
    ranks: Dict[str, Dict[int, int]] = defaultdict(dict)
    for index, record in read_records(Path(path)):
        guess = parse_record(record, index)
        if guess.rank in ranks[guess.input_id]:
            raise SchemaError(index, f"rank {guess.rank} repeated for input {guess.input_id!r} "
                                     f"(first at record {ranks[guess.input_id][guess.rank]})")
        ranks[guess.input_id][guess.rank] = index
        by_input[guess.input_id].append(guess)
    out = {}
    for input_id, guesses in by_input.items():
        guesses.sort(key=lambda g: g.rank)
        if len(guesses) > top_k:
            logger.debug("input %s: keeping %d of %d guesses", input_id, top_k, len(guesses))
        out[input_id] = guesses[:top_k]
    logger.info("loaded guesses for %d inputs from %s", len(out), path)
    return out


def guess_record(guess: GuessTuple) -> dict:
    record = {
        "schema_version": GUESS_SCHEMA_VERSION,
        "input_id": guess.input_id,
        "rank": guess.rank,
        "tokens": list(guess.tokens),
        "probs": [float(p) for p in guess.probs],
        "attention": {
            "rows": int(guess.attention.shape[0]),
            "cols": int(guess.attention.shape[1]) if guess.attention.ndim == 2 else 0,
            "data": [float(v) for v in guess.attention.ravel()],
        },
        "metadata": dict(guess.metadata),
    }
    if guess.source_tokens is not None:
        record["source_tokens"] = list(guess.source_tokens)
    return record


def write_guesses(path, guesses: Sequence[GuessTuple]) -> None:
    """Write guesses as interchange records, one per line, replacing path atomically."""
    path = Path(path)
    ensure_dir(path.parent)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        for guess in guesses:
            fh.write(json.dumps(guess_record(guess), ensure_ascii=False) + "\n")
    tmp.replace(path)


# projection

def _char_map(original: str, canonical: str) -> np.ndarray:
    """Position in canonical of every character of original (-1 when unmatched)."""
    if original == canonical:
        return np.arange(len(original))
    out = np.full(len(original), -1, dtype=np.int64)
    matcher = difflib.SequenceMatcher(None, original, canonical, autojunk=False)
    for a, b, size in matcher.get_matching_blocks():
        out[a:a + size] = np.arange(b, b + size)
    return out


def _producer_spans(pieces: Sequence[str], original: str, canonical: str) -> List[Optional[Tuple[int, int]]]:
    """Canonical character span of every producer token, None when it maps nowhere."""
    cmap = _char_map(original, canonical)
    spans: List[Optional[Tuple[int, int]]] = []
    pos = 0
    for piece in pieces:
        mapped = cmap[pos:pos + len(piece)]
        mapped = mapped[mapped >= 0]
        spans.append((int(mapped.min()), int(mapped.max()) + 1) if mapped.size else None)
        pos += len(piece)
    return spans


def _token_bounds(tokens: Sequence[Token]) -> Tuple[np.ndarray, np.ndarray]:
    starts, ends = [], []
    pos = 0
    for t in tokens:
        pos += len(t.lead)
        starts.append(pos)
        pos += len(t.text)
        ends.append(pos)
        pos += len(t.trail)
    return np.asarray(starts, dtype=np.int64), np.asarray(ends, dtype=np.int64)


def _overlaps(span: Optional[Tuple[int, int]], starts: np.ndarray, ends: np.ndarray) -> slice:
    if span is None:
        return slice(0, 0)
    lo = int(np.searchsorted(ends, span[0], side="right"))
    hi = int(np.searchsorted(starts, span[1], side="left"))
    return slice(lo, max(lo, hi))


def project_guess(guess: GuessTuple, source: Optional[Program], isa: Isa) -> Candidate:
    """Parse the candidate and carry probabilities and attention onto its operand tokens.

    A token's probability is the minimum over the producer tokens it overlaps; its
    attention row is the mean of those rows. Source columns are summed the same
    way when the producer supplied its own source token table.
    """
    try:
        program = parse_program(guess.text, isa)
    except TranspileError as e:
        logger.debug("rank %d of %s does not parse: %s", guess.rank, guess.input_id, e)
        return Candidate(guess, None, parse_error=str(e))
    tokens = tokenize_program(program)
    starts, ends = _token_bounds(tokens)
    spans = _producer_spans(guess.tokens, guess.text, join_tokens(tokens))
    probs = np.ones(len(tokens))
    rows = np.zeros((len(tokens), guess.attention.shape[1]))
    hits = np.zeros(len(tokens))
    for j, span in enumerate(spans):
        cover = _overlaps(span, starts, ends)
        probs[cover] = np.minimum(probs[cover], guess.probs[j])
        rows[cover] += guess.attention[j]
        hits[cover] += 1
    rows = rows / np.maximum(hits, 1)[:, None]
    attention = rows
    if source is not None:
        x_tokens = tokenize_program(source)
        if guess.source_tokens is not None:
            x_starts, x_ends = _token_bounds(x_tokens)
            x_spans = _producer_spans(guess.source_tokens, "".join(guess.source_tokens), join_tokens(x_tokens))
            attention = np.zeros((len(tokens), len(x_tokens)))
            for k, span in enumerate(x_spans):
                attention[:, _overlaps(span, x_starts, x_ends)] += rows[:, [k]]
        elif rows.shape[1] != len(x_tokens):
            raise ShapeError(guess.rank, f"attention has {rows.shape[1]} columns but the input has "
                                         f"{len(x_tokens)} tokens")
    return Candidate(guess, program, tuple(tokens), probs, stochastic_rows(attention))
