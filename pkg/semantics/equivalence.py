"""Block evaluation and equivalence checking over input batteries."""

import itertools
import logging
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from asm.isa import ARM_FLAGS, Isa

from .interpreter import Env, run_lines
from .models import BlockSpec, EquivalenceResult, RegisterMap, VerifierConfig
from .state import LaneState, canonical, int_mask, mask, view_width

logger = logging.getLogger(__name__)

# Canonical source register -> canonical candidate register.
RegisterHint = Mapping[str, str]

CORNER_VECTOR_LIMIT = 4096


def corner_values(width: int) -> List[int]:
    """0, 1, -1, MIN and MAX at width bits, plus the 32-bit view's MIN, MAX and -1."""
    values = [0, 1, int_mask(width), 1 << (width - 1), (1 << (width - 1)) - 1]
    half = width // 2
    values += [1 << (half - 1), (1 << (half - 1)) - 1, int_mask(half)]
    return list(dict.fromkeys(values))


def eval_lanes(spec: BlockSpec, inputs: Mapping[str, np.ndarray], width: int = 64,
               env: Optional[Env] = None, lanes: Optional[int] = None) -> Dict[str, np.ndarray]:
    """Output-register values of spec for every lane of inputs."""
    env = env or Env(symbols=spec.symbols)
    state = LaneState.from_inputs(spec.isa, inputs, width, lanes)
    final = run_lines(spec.lines, state, env)
    return {name: final.read(name) for name in spec.outputs}


def eval_block(spec: BlockSpec, inputs: Mapping[str, int], width: int = 64,
               env: Optional[Env] = None) -> Dict[str, int]:
    """Outputs of spec from a state where non-input registers are zero."""
    missing = [r for r in spec.inputs if r not in inputs]
    if missing:
        raise KeyError(f"no value for input registers {missing}")
    arrays = {name: np.array([value & int_mask(64)], dtype=np.uint64) for name, value in inputs.items()}
    out = eval_lanes(spec, arrays, width, env, lanes=1)
    return {name: int(values[0]) for name, values in out.items()}


def _pair(isa_x: Isa, xs: Sequence[str], isa_y: Isa, ys: Sequence[str],
          hint: RegisterHint) -> Optional[Tuple[Tuple[str, str], ...]]:
    """Pair xs with ys: hinted registers first, the rest by position.

    A y register that the hint reserves for a different x register is never
    paired positionally.
    """
    if len(xs) != len(ys):
        return None
    y_by_canon = {canonical(isa_y, y): y for y in ys}
    reserved = {v: k for k, v in hint.items()}
    paired: Dict[str, str] = {}
    used = set()
    for x in xs:
        cx = canonical(isa_x, x)
        if cx in hint:
            target = y_by_canon.get(hint[cx])
            if target is None:
                return None
            paired[x] = target
            used.add(canonical(isa_y, target))
    free = [y for y in ys if canonical(isa_y, y) not in used]
    for x in xs:
        if x in paired:
            continue
        cx = canonical(isa_x, x)
        pick = next((y for y in free if reserved.get(canonical(isa_y, y), cx) == cx), None)
        if pick is None:
            return None
        free.remove(pick)
        paired[x] = pick
    return tuple((x, paired[x]) for x in xs)


def default_pairing(spec_x: BlockSpec, spec_y: BlockSpec,
                    outputs: Optional[Sequence[Tuple[str, str]]] = None,
                    hint: Optional[RegisterHint] = None) -> Optional[RegisterMap]:
    """Inputs by first-read order, outputs by first-write order, hinted registers first.

    Flags are dropped from the outputs when only one side produces them. Returns
    None when the two sides disagree on the number of registers or contradict
    the hint.
    """
    hint = hint or {}
    inputs = _pair(spec_x.isa, spec_x.inputs, spec_y.isa, spec_y.inputs, hint)
    if inputs is None:
        return None
    if outputs is None:
        out_x = list(spec_x.outputs)
        out_y = list(spec_y.outputs)
        if (ARM_FLAGS in out_x) != (ARM_FLAGS in out_y):
            out_x = [r for r in out_x if r != ARM_FLAGS]
            out_y = [r for r in out_y if r != ARM_FLAGS]
        outputs = _pair(spec_x.isa, out_x, spec_y.isa, out_y, hint)
        if outputs is None:
            return None
    return RegisterMap(inputs, tuple(outputs))


def paired_outputs(spec_x: BlockSpec, spec_y: BlockSpec, pairing: RegisterMap,
                   inputs: Mapping[str, np.ndarray], width: int, env_y: Optional[Env] = None,
                   lanes: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """(x, y) output values, one row per paired output, masked to the narrower view."""
    x_spec = BlockSpec(spec_x.isa, spec_x.lines, spec_x.inputs,
                       tuple(a for a, _ in pairing.outputs), spec_x.symbols)
    y_spec = BlockSpec(spec_y.isa, spec_y.lines, spec_y.inputs,
                       tuple(b for _, b in pairing.outputs), spec_y.symbols)
    y_inputs = {b: inputs[a] for a, b in pairing.inputs}
    out_x = eval_lanes(x_spec, inputs, width, lanes=lanes)
    out_y = eval_lanes(y_spec, y_inputs, width, env_y, lanes=lanes)
    n = lanes or max((len(v) for v in inputs.values()), default=1)
    xs = np.zeros((len(pairing.outputs), n), dtype=np.uint64)
    ys = np.zeros_like(xs)
    for row, (a, b) in enumerate(pairing.outputs):
        view = mask(min(view_width(spec_x.isa, a, width), view_width(spec_y.isa, b, width)))
        xs[row] = out_x[a] & view
        ys[row] = out_y[b] & view
    return xs, ys


def mismatch_matrix(spec_x: BlockSpec, spec_y: BlockSpec, pairing: RegisterMap,
                    inputs: Mapping[str, np.ndarray], width: int, env_y: Optional[Env] = None,
                    lanes: Optional[int] = None) -> np.ndarray:
    """Boolean (paired outputs x lanes) matrix of differing output values."""
    xs, ys = paired_outputs(spec_x, spec_y, pairing, inputs, width, env_y, lanes)
    return xs != ys


def mismatches(spec_x: BlockSpec, spec_y: BlockSpec, pairing: RegisterMap,
               inputs: Mapping[str, np.ndarray], width: int, env_y: Optional[Env] = None,
               lanes: Optional[int] = None) -> np.ndarray:
    """Boolean lane mask where paired outputs differ; inputs are keyed by spec_x names."""
    return mismatch_matrix(spec_x, spec_y, pairing, inputs, width, env_y, lanes).any(axis=0)


def corner_battery(k: int, rng: np.random.Generator) -> np.ndarray:
    """k x L matrix of 64-bit corner combinations, sampled past CORNER_VECTOR_LIMIT."""
    corners = corner_values(64)
    if len(corners) ** k <= CORNER_VECTOR_LIMIT:
        return np.array(list(itertools.product(corners, repeat=k)), dtype=np.uint64).T
    picks = rng.integers(0, len(corners), size=(k, CORNER_VECTOR_LIMIT))
    return np.array(corners, dtype=np.uint64)[picks]


def input_battery(k: int, config: VerifierConfig) -> Iterator[Tuple[int, np.ndarray]]:
    """(width, k x L input matrix) batches: reduced width, corners, random 64-bit."""
    rng = np.random.default_rng(config.seed)
    if k == 0:
        yield config.reduced_width, np.zeros((0, 1), dtype=np.uint64)
        yield 64, np.zeros((0, 1), dtype=np.uint64)
        return
    w = config.reduced_width
    if (1 << w) ** k <= config.exhaustive_limit:
        grid = np.indices((1 << w,) * k).reshape(k, -1).astype(np.uint64)
    else:
        grid = rng.integers(0, 1 << w, size=(k, config.exhaustive_limit), dtype=np.uint64)
    yield w, grid
    yield 64, corner_battery(k, rng)
    if config.random_samples:
        yield 64, rng.integers(0, int_mask(64), size=(k, config.random_samples),
                               dtype=np.uint64, endpoint=True)


def first_counterexample(spec_x: BlockSpec, pairing: RegisterMap, inputs: Mapping[str, np.ndarray],
                         bad: np.ndarray) -> Dict[str, int]:
    lane = int(np.argmax(bad))
    return {name: int(inputs[name][lane]) for name in spec_x.inputs}


def blocks_equivalent(spec_x: BlockSpec, spec_y: BlockSpec, reg_map: Optional[RegisterMap] = None,
                      verifier: Optional[VerifierConfig] = None, env_y: Optional[Env] = None,
                      hint: Optional[RegisterHint] = None) -> EquivalenceResult:
    """Decide whether spec_y computes spec_x's outputs from the paired inputs."""
    verifier = verifier or VerifierConfig()
    pairing = reg_map or default_pairing(spec_x, spec_y, hint=hint)
    if pairing is None:
        return EquivalenceResult(False, reason="input/output register counts differ")
    if verifier.kind == "smt":
        from .smtlib import Z3Verifier
        return Z3Verifier().check(spec_x, spec_y, pairing, env_y)
    tested = 0
    for width, matrix in input_battery(len(spec_x.inputs), verifier):
        inputs = {name: matrix[i] for i, name in enumerate(spec_x.inputs)}
        lanes = matrix.shape[1]
        bad = mismatches(spec_x, spec_y, pairing, inputs, width, env_y, lanes=lanes)
        tested += lanes
        if bad.any():
            cex = first_counterexample(spec_x, pairing, inputs, bad)
            logger.debug("counterexample at %d bits: %s", width, cex)
            return EquivalenceResult(False, cex, width, tested)
    return EquivalenceResult(True, None, 64, tested)
