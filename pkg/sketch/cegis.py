"""Counterexample-guided search for hole assignments.

Structural holes (registers, mnemonics, shifts, floats, labels) are enumerated in
domain order. For each structural choice the immediate holes are searched as a
grid evaluated lane-parallel against the counterexample set, either exhaustively
(while the joint domain fits max_enum) or by per-hole coordinate search seeded
with constants proposed from single counterexamples.
"""

import itertools
import logging
import math
import time
from dataclasses import dataclass, replace
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from asm.isa import ARM_FLAGS
from asm.models import AsmLine, Shift
from asm.table import lookup
from asm.validation import validate_line
from core.errors import DomainExplosion, TranspileError
from semantics.equivalence import RegisterHint, blocks_equivalent, default_pairing, eval_lanes
from semantics.interpreter import Env
from semantics.models import BlockSpec, RegisterMap, VerifierConfig
from semantics.state import int_mask, mask, view_width

from .holes import assign_lines, immediate_bounds
from .models import HoleAssignment, HoleValue, SolveResult, SolverConfig, Sketch
from .spec_builder import block_outputs

logger = logging.getLogger(__name__)

LANE_LIMIT = 1 << 17
PROPOSAL_SOURCES = 4
MAX_SWEEPS = 4
FULL_RANGE = (-(1 << 63), (1 << 64) - 1)


class _Timeout(Exception):
    def __init__(self, reason: str) -> None:
        self.reason = reason
        super().__init__(reason)


@dataclass
class _Structure:
    """One assignment of the structural holes, immediates still open."""
    values: Dict[int, HoleValue]
    lines: Tuple[AsmLine, ...]
    spec_y: BlockSpec
    pairing: RegisterMap
    immediates: Tuple[int, ...]
    bounds: Dict[int, Tuple[int, int]]

    def label(self) -> str:
        return ", ".join(f"?{h}={v}" for h, v in sorted(self.values.items())) or "-"


def _signed_forms(value: int, n: int) -> Tuple[int, ...]:
    if n and value >> (n - 1) & 1:
        return value - (1 << n), value
    return (value,)


def window_values(bounds: Tuple[int, int], window: Tuple[int, int], original: Optional[int]) -> List[int]:
    """Legal values inside the search window, nearest to the original first."""
    lo, hi = max(bounds[0], window[0]), min(bounds[1], window[1])
    if lo > hi:
        return []
    centre = original if original is not None and lo <= original <= hi else min(max(0, lo), hi)
    values = np.arange(lo, hi + 1, dtype=np.int64)
    order = np.argsort(np.abs(values - centre), kind="stable")
    return values[order].tolist()


def _as_lanes(values: Sequence[int]) -> np.ndarray:
    return np.array([v & int_mask(64) for v in values], dtype=np.uint64)


class CegisSearch:
    """State of one cegis_solve call: the counterexample set and the budgets."""

    def __init__(self, spec: BlockSpec, sketch: Sketch, config: SolverConfig,
                 verifier: VerifierConfig, hint: Optional[RegisterHint],
                 symbols: Optional[Mapping[str, int]]) -> None:
        self.spec = spec
        self.sketch = sketch
        self.config = config
        self.verifier = verifier
        self.hint = hint
        self.symbols = dict(spec.symbols if symbols is None else symbols)
        self.rng = np.random.default_rng(verifier.seed)
        self.index = {name: i for i, name in enumerate(spec.inputs)}
        self.cex = self._seed_counterexamples()
        self.found = 0
        self.tested = 0
        self.iterations = 0
        self.started = time.monotonic()
        self._x_cache: Dict[Tuple, np.ndarray] = {}

    # -- counterexample set -------------------------------------------------

    def _seed_counterexamples(self) -> Dict[int, np.ndarray]:
        k = len(self.spec.inputs)
        if k == 0:
            empty = np.zeros((0, 1), dtype=np.uint64)
            return {self.verifier.reduced_width: empty, 64: empty.copy()}
        corners = [0, 1, int_mask(64), 1 << 63, (1 << 63) - 1]
        wide = np.array([[c] * k for c in corners], dtype=np.uint64).T
        n = self.config.initial_random
        if n:
            wide = np.concatenate([wide, self.rng.integers(0, int_mask(64), size=(k, n), dtype=np.uint64,
                                                           endpoint=True)], axis=1)
        w = self.verifier.reduced_width
        narrow = self.rng.integers(0, 1 << w, size=(k, max(n, 1)), dtype=np.uint64)
        return {w: narrow, 64: wide}

    def add_counterexample(self, values: Mapping[str, int], width: int) -> None:
        column = np.array([[values[name] & int_mask(64)] for name in self.spec.inputs],
                          dtype=np.uint64).reshape(len(self.spec.inputs), 1)
        if width in self.cex:
            self.cex[width] = np.concatenate([self.cex[width], column], axis=1)
        else:
            self.cex[width] = column
        self.found += 1
        logger.debug("counterexample %d at %d bits: %s", self.found, width, dict(values))

    # -- budgets ------------------------------------------------------------

    @property
    def elapsed(self) -> float:
        return time.monotonic() - self.started

    def check_budget(self) -> None:
        if self.elapsed > self.config.time_budget:
            raise _Timeout(f"time budget of {self.config.time_budget}s exhausted")
        if self.iterations >= self.config.max_iters:
            raise _Timeout(f"max_iters={self.config.max_iters} verification rounds exhausted")

    # -- structural holes ---------------------------------------------------

    def structural_holes(self) -> Tuple[int, ...]:
        return tuple(h for h in self.sketch.holes if not self.sketch.domains[h].is_immediate)

    def immediate_holes(self) -> Tuple[int, ...]:
        return tuple(h for h in self.sketch.holes if self.sketch.domains[h].is_immediate)

    def structure_count(self) -> int:
        return math.prod(self.sketch.domains[h].size for h in self.structural_holes())

    def structures(self) -> Iterator[_Structure]:
        holes = self.structural_holes()
        immediates = self.immediate_holes()
        pools = [self.sketch.domains[h].values for h in holes]
        for combo in itertools.product(*pools):
            values = dict(zip(holes, combo))
            lines = assign_lines(self.sketch, values, partial=True)
            if any(validate_line(line, self.sketch.isa) for line in lines):
                continue
            try:
                spec_y = BlockSpec.from_lines(lines, self.sketch.isa,
                                              block_outputs(lines, self.sketch.isa, self.config.outputs),
                                              self.symbols)
                bounds = {h: self._legal_bounds(lines, h) for h in immediates}
            except TranspileError as e:
                logger.debug("skipping structure %s: %s", values, e)
                continue
            pairing = self.config.reg_map or default_pairing(self.spec, spec_y, hint=self.hint)
            if pairing is None:
                continue
            yield _Structure(values, lines, spec_y, pairing, immediates, bounds)

    def _legal_bounds(self, lines: Sequence[AsmLine], hole: int) -> Tuple[int, int]:
        line = lines[self.sketch.domains[hole].line]
        spec = lookup(self.sketch.isa, line.mnemonic)
        if spec is None:
            raise TranspileError(f"no instruction {line.mnemonic!r}")
        return immediate_bounds(spec, line, self.sketch.isa, FULL_RANGE)

    # -- lane evaluation ----------------------------------------------------

    def _x_outputs(self, pairing: RegisterMap, width: int, matrix: np.ndarray) -> np.ndarray:
        names = tuple(a for a, _ in pairing.outputs)
        key = (width, names, matrix.shape[1], matrix.tobytes())
        cached = self._x_cache.get(key)
        if cached is not None:
            return cached
        view = BlockSpec(self.spec.isa, self.spec.lines, self.spec.inputs, names, self.spec.symbols)
        inputs = {name: matrix[i] for i, name in enumerate(self.spec.inputs)}
        out = eval_lanes(view, inputs, width, lanes=matrix.shape[1])
        xs = np.stack([out[a] for a in names]) if names else np.zeros((0, matrix.shape[1]), dtype=np.uint64)
        self._x_cache[key] = xs
        return xs

    def _row_masks(self, st: _Structure, width: int) -> List[np.uint64]:
        return [mask(min(view_width(self.spec.isa, a, width), view_width(st.spec_y.isa, b, width)))
                for a, b in st.pairing.outputs]

    def compare(self, st: _Structure, columns: Mapping[int, np.ndarray], g: int,
                width: int, matrix: np.ndarray) -> np.ndarray:
        """Boolean (outputs, counterexamples, grid points) matrix of agreeing outputs."""
        c = matrix.shape[1]
        outputs = st.pairing.outputs
        result = np.ones((len(outputs), c, g), dtype=bool)
        if not outputs or c == 0 or g == 0:
            return result
        xs = self._x_outputs(st.pairing, width, matrix)
        masks = self._row_masks(st, width)
        view = BlockSpec(st.spec_y.isa, st.spec_y.lines, st.spec_y.inputs,
                         tuple(b for _, b in outputs), self.symbols)
        step = max(1, LANE_LIMIT // c)
        for a in range(0, g, step):
            b = min(g, a + step)
            n = b - a
            lanes = c * n
            inputs = {y: np.repeat(matrix[self.index[x]], n) for x, y in st.pairing.inputs}
            holes = {h: np.tile(col[a:b], c) for h, col in columns.items()}
            out = eval_lanes(view, inputs, width, Env(holes, self.symbols), lanes)
            for row, (_, y) in enumerate(outputs):
                ys = (out[y] & masks[row]).reshape(c, n)
                result[row, :, a:b] = ys == (xs[row] & masks[row])[:, None]
        self.tested += c * g
        return result

    def matches(self, st: _Structure, columns: Mapping[int, np.ndarray], g: int,
                since: Optional[Mapping[int, int]] = None) -> np.ndarray:
        """Grid points agreeing on every counterexample (past `since` columns per width)."""
        ok = np.ones(g, dtype=bool)
        for width, matrix in self.cex.items():
            start = since.get(width, 0) if since else 0
            if start >= matrix.shape[1]:
                continue
            ok &= self.compare(st, columns, g, width, matrix[:, start:]).all(axis=(0, 1))
        return ok

    def scores(self, st: _Structure, columns: Mapping[int, np.ndarray], g: int) -> Tuple[np.ndarray, int]:
        score = np.zeros(g, dtype=np.int64)
        total = 0
        for width, matrix in self.cex.items():
            agree = self.compare(st, columns, g, width, matrix)
            score += agree.sum(axis=(0, 1))
            total += agree.shape[0] * agree.shape[1]
        return score, total

    # -- immediate values ---------------------------------------------------

    def proposals(self, st: _Structure, hole: int) -> List[int]:
        """Constants that make one output match on one counterexample, with the others at zero."""
        matrix = self.cex[64][:, :PROPOSAL_SOURCES]
        c = matrix.shape[1]
        if not st.pairing.outputs or c == 0:
            return []
        zeros = {h: np.zeros(1, dtype=np.uint64) for h in st.immediates}
        xs = self._x_outputs(st.pairing, 64, matrix)
        view = BlockSpec(st.spec_y.isa, st.spec_y.lines, st.spec_y.inputs,
                         tuple(b for _, b in st.pairing.outputs), self.symbols)
        inputs = {y: matrix[self.index[x]] for x, y in st.pairing.inputs}
        out = eval_lanes(view, inputs, 64, Env({h: np.repeat(v, c) for h, v in zeros.items()}, self.symbols), c)
        line = st.lines[self.sketch.domains[hole].line]
        spec = lookup(self.sketch.isa, line.mnemonic)
        lo, hi = st.bounds[hole]
        shift = next((op.amount or 0 for op in line.operands if isinstance(op, Shift)), 0)
        found: List[int] = []
        for row, (a, b) in enumerate(st.pairing.outputs):
            if a == ARM_FLAGS:
                continue
            n = min(view_width(self.spec.isa, a, 64), view_width(st.spec_y.isa, b, 64))
            m = int_mask(n)
            for t, o in zip(xs[row].tolist(), out[b].tolist()):
                t, o = t & m, o & m
                raw = [(t - o) & m, (o - t) & m, t]
                if spec is not None and spec.shift == "field":
                    raw.append((t >> shift) & hi)
                if spec is not None and spec.scale:
                    raw += [(t >> spec.scale) & hi, ((t + 0x800) >> spec.scale) & hi]
                for v in raw:
                    found += [f for f in _signed_forms(v, n) if lo <= f <= hi]
        return list(dict.fromkeys(found))

    def value_list(self, st: _Structure, hole: int) -> List[int]:
        domain = self.sketch.domains[hole]
        lo, hi = st.bounds[hole]
        original = domain.original if isinstance(domain.original, int) else None
        first = [original] if original is not None and lo <= original <= hi else []
        window = window_values(st.bounds[hole], self.config.imm_window, original)
        return list(dict.fromkeys(first + self.proposals(st, hole) + window))

    # -- verification -------------------------------------------------------

    def verify(self, st: _Structure, immediates: Mapping[int, int]) -> Optional[HoleAssignment]:
        """Verify one full assignment; a failure adds its counterexample to the set."""
        self.check_budget()
        self.iterations += 1
        values = {**st.values, **immediates}
        lines = assign_lines(self.sketch, values)
        candidate = BlockSpec(self.sketch.isa, tuple(l for l in lines if l.is_instruction),
                              st.spec_y.inputs, st.spec_y.outputs, self.symbols)
        result = blocks_equivalent(self.spec, candidate, st.pairing, self.verifier)
        self.tested += result.tested
        logger.debug("round %d: %s -> %s", self.iterations,
                     HoleAssignment(values).to_dict(self.sketch.isa), result.equivalent)
        if result.equivalent:
            return HoleAssignment(values)
        if result.counterexample is not None:
            self.add_counterexample(result.counterexample, result.width)
        return None

    # -- search modes -------------------------------------------------------

    def enumerate(self, st: _Structure) -> Optional[HoleAssignment]:
        lists = {h: self.value_list(st, h) for h in st.immediates}
        arrays = {h: _as_lanes(v) for h, v in lists.items()}
        shape = tuple(len(lists[h]) for h in st.immediates)
        survivors = np.arange(math.prod(shape), dtype=np.int64)
        seen: Dict[int, int] = {}
        rejected = set()
        while survivors.size:
            self.check_budget()
            picks = np.unravel_index(survivors, shape) if shape else ()
            columns = {h: arrays[h][picks[i]] for i, h in enumerate(st.immediates)}
            survivors = survivors[self.matches(st, columns, survivors.size, seen)]
            seen = {w: m.shape[1] for w, m in self.cex.items()}
            survivors = survivors[~np.isin(survivors, list(rejected))] if rejected else survivors
            if not survivors.size:
                break
            first = np.unravel_index(int(survivors[0]), shape) if shape else ()
            immediates = {h: lists[h][int(first[i])] for i, h in enumerate(st.immediates)}
            found = self.verify(st, immediates)
            if found is not None:
                return found
            if seen == {w: m.shape[1] for w, m in self.cex.items()}:
                rejected.add(int(survivors[0]))
        return None

    def propagate(self, st: _Structure) -> Optional[HoleAssignment]:
        while True:
            self.check_budget()
            lists = {h: self.value_list(st, h) for h in st.immediates}
            if any(not v for v in lists.values()):
                return None
            arrays = {h: _as_lanes(v) for h, v in lists.items()}
            current = {h: 0 for h in st.immediates}
            consistent = None
            for _ in range(MAX_SWEEPS):
                changed = False
                for h in st.immediates:
                    self.check_budget()
                    g = len(lists[h])
                    columns = {o: (arrays[h] if o == h else np.repeat(arrays[o][current[o]:current[o] + 1], g))
                               for o in st.immediates}
                    score, total = self.scores(st, columns, g)
                    best = int(np.argmax(score))
                    if score[best] > score[current[h]]:
                        current[h] = best
                        changed = True
                    if score[current[h]] == total:
                        consistent = {o: lists[o][current[o]] for o in st.immediates}
                        break
                if consistent is not None or not changed:
                    break
            if consistent is None:
                return None
            before = self.found
            found = self.verify(st, consistent)
            if found is not None or self.found == before:
                return found


def cegis_solve(spec: BlockSpec, sketch: Sketch, reg_map: Optional[RegisterMap] = None,
                config: SolverConfig = SolverConfig(), verifier: VerifierConfig = VerifierConfig(),
                hint: Optional[RegisterHint] = None,
                symbols: Optional[Mapping[str, int]] = None) -> SolveResult:
    """Find hole values making sketch equivalent to spec.

    reg_map overrides config.reg_map; hint steers the default register pairing.
    symbols gives the candidate side's global values (spec.symbols when omitted).
    Raises DomainExplosion when the structural holes alone exceed max_enum.
    """
    if reg_map is not None:
        config = replace(config, reg_map=reg_map)
    search = CegisSearch(spec, sketch, config, verifier, hint, symbols)
    count = search.structure_count()
    if count > config.max_enum:
        raise DomainExplosion(count, config.max_enum)
    joint = count * math.prod(sketch.domains[h].size for h in search.immediate_holes())
    exhaustive = joint <= config.max_enum
    logger.debug("solving %d holes: %d structures, joint domain %d (%s)", len(sketch.holes), count,
                 joint, "enumeration" if exhaustive else "propagation")

    def finish(status: str, assignment: Optional[HoleAssignment] = None, reason: str = "") -> SolveResult:
        result = SolveResult(status, assignment, search.found, search.tested, search.iterations,
                             search.elapsed, reason)
        logger.info("sketch with %d holes: %s after %d rounds (%.2fs)", len(sketch.holes), status,
                    search.iterations, search.elapsed)
        return result

    try:
        for st in search.structures():
            search.check_budget()
            try:
                found = search.enumerate(st) if exhaustive else search.propagate(st)
            except _Timeout:
                raise
            except TranspileError as e:
                logger.debug("structure %s not executable: %s", st.label(), e)
                continue
            if found is not None:
                return finish("solved", found)
    except _Timeout as e:
        return finish("timeout", reason=e.reason)
    if exhaustive:
        return finish("unsat", reason="no assignment agrees with every counterexample")
    return finish("timeout", reason="propagation found no consistent assignment")
