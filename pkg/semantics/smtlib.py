"""SMT-LIB2 export of block equivalence queries and the optional z3 verifier.

The query declares one 64-bit constant per paired input, defines every register
update as a bit-vector term built from the instruction table rules, and asserts
that some paired output differs. unsat therefore means the blocks are equivalent;
a model is a counterexample.
"""

import logging
from typing import Dict, List, Optional

from asm.isa import ARM_FLAGS, is_zero_register
from asm.models import AsmLine, FloatImmediate, Immediate, LabelRef, Register, Shift
from core.errors import ConfigError, UnsupportedInstruction

from .interpreter import Env, _Lane, _resolve, operation_width, resolve_spec, symbol_value
from .models import BlockSpec, EquivalenceResult, RegisterMap
from .reference import SExpr, compile_rule
from .state import FULL_WIDTH, canonical, int_mask, view_width

logger = logging.getLogger(__name__)


def _bv(value: int, n: int) -> str:
    return f"(_ bv{value & int_mask(n)} {n})"


def _low(term: str, n: int, width: int) -> str:
    return term if n == width else f"((_ extract {n - 1} 0) {term})"


def _render(expr: SExpr, env: Dict[str, str]) -> str:
    if isinstance(expr, str):
        return env.get(expr, expr)
    return "(" + " ".join(_render(e, env) for e in expr) + ")"


def _shifted(term: str, shift: Shift, n: int, mnemonic: str) -> str:
    k = (shift.amount or 0) % 64
    if shift.op == "lsl":
        return f"(bvshl {term} {_bv(k, n)})"
    if shift.op == "lsr":
        return f"(bvlshr {term} {_bv(k, n)})"
    if shift.op == "asr":
        return f"(bvashr {term} {_bv(k, n)})"
    if shift.op == "ror":
        return f"((_ rotate_right {k % n}) {term})"
    raise UnsupportedInstruction(mnemonic, "extend operands are not modelled")


def _flags_term(a: str, b: str, r: str, n: int, sub: bool) -> str:
    top = n - 1
    bit = lambda t: f"((_ extract {top} {top}) {t})"
    z = f"(ite (= {r} {_bv(0, n)}) #b1 #b0)"
    if sub:
        c = f"(ite (bvuge {a} {b}) #b1 #b0)"
        v = f"(bvand (bvxor {bit(a)} {bit(b)}) (bvxor {bit(r)} {bit(a)}))"
    else:
        c = f"(ite (bvult {r} {a}) #b1 #b0)"
        v = f"(bvand (bvnot (bvxor {bit(a)} {bit(b)})) (bvxor {bit(r)} {bit(a)}))"
    return f"(concat {bit(r)} (concat {z} (concat {c} {v})))"


class _Block:
    """Register terms of one side of the query while its lines are translated."""

    def __init__(self, prefix: str, spec: BlockSpec, env: Env, defs: List[str]):
        self.prefix = prefix
        self.spec = spec
        self.env = env
        self.defs = defs
        self.regs: Dict[str, str] = {}
        self.count = 0

    def define(self, term: str, sort_width: int) -> str:
        name = f"{self.prefix}{self.count}"
        self.count += 1
        self.defs.append(f"(define-fun {name} () (_ BitVec {sort_width}) {term})")
        return name

    def read(self, name: str, n: int) -> str:
        isa = self.spec.isa
        if is_zero_register(isa, name):
            return _bv(0, n)
        term = self.regs.get(canonical(isa, name))
        if term is None:
            return _bv(0, n)
        if name == ARM_FLAGS:
            return term
        view = view_width(isa, name)
        low = _low(term, min(n, view), FULL_WIDTH)
        return low if n <= view else f"((_ zero_extend {n - view}) {low})"

    def write(self, name: str, term: str, n: int, word: bool) -> None:
        isa = self.spec.isa
        if is_zero_register(isa, name):
            return
        view = view_width(isa, name)
        if word:
            term = f"((_ sign_extend {FULL_WIDTH - n}) {term})"
            n = FULL_WIDTH
        if n > view:
            term = _low(term, view, n)
            n = view
        if n < FULL_WIDTH:
            term = f"((_ zero_extend {FULL_WIDTH - n}) {term})"
        self.regs[canonical(isa, name)] = self.define(term, FULL_WIDTH)

    def operand(self, op, n: int, mnemonic: str) -> str:
        if isinstance(op, Register):
            return self.read(op.name, n)
        if isinstance(op, Immediate):
            return _bv(op.value, n)
        if isinstance(op, FloatImmediate):
            return _bv(op.bits, n)
        if isinstance(op, LabelRef):
            return _bv(symbol_value(op, self.env.symbols, mnemonic), n)
        if isinstance(op, _Lane) and isinstance(op.value, int):
            return _bv(op.value, n)
        raise UnsupportedInstruction(mnemonic, f"operand {op!r} cannot be exported")

    def translate(self, line: AsmLine) -> None:
        isa = self.spec.isa
        spec = resolve_spec(line, isa, self.env)
        operands = [_resolve(op, self.env) for op in line.operands]
        shift: Optional[Shift] = None
        if operands and isinstance(operands[-1], Shift):
            shift = operands.pop()
        n = operation_width(spec, operands, isa, FULL_WIDTH)
        values = [self.operand(op, n, spec.mnemonic) for op in operands]
        sh = 0
        if shift is not None:
            if spec.shift == "field":
                sh = shift.amount or 0
            else:
                values[-1] = _shifted(values[-1], shift, n, spec.mnemonic)
        values = [self.define(v, n) if not v.startswith("(_ bv") else v for v in values]
        if spec.klass == "compare":
            diff = self.define(f"(bvsub {values[0]} {values[1]})", n)
            self.regs[ARM_FLAGS] = self.define(_flags_term(values[0], values[1], diff, n, sub=True), 4)
            return
        if spec.rule is None:
            return
        env = {f"${i + 1}": v for i, v in enumerate(values)}
        env["$sh"] = _bv(sh, n)
        result = self.define(_render(compile_rule(spec.rule, n, FULL_WIDTH // 2), env), n)
        if spec.flags:
            self.regs[ARM_FLAGS] = self.define(
                _flags_term(values[1], values[2], result, n, sub=spec.flags == "sub"), 4)
        self.write(operands[0].name, result, n, spec.is_word_op)


def input_names(spec_x: BlockSpec) -> List[str]:
    return [f"in_{i}" for i in range(len(spec_x.inputs))]


def export_smtlib(spec_x: BlockSpec, spec_y: BlockSpec, reg_map: RegisterMap,
                  env_y: Optional[Env] = None) -> str:
    """QF_BV script whose satisfiability means spec_y differs from spec_x on some input."""
    env_y = env_y or Env(symbols=spec_y.symbols)
    lines = ["(set-logic QF_BV)", "(set-option :produce-models true)"]
    names = input_names(spec_x)
    for name in names:
        lines.append(f"(declare-const {name} (_ BitVec {FULL_WIDTH}))")
    sides = []
    for prefix, spec, env, pairs in (("x_", spec_x, Env(symbols=spec_x.symbols), [a for a, _ in reg_map.inputs]),
                                     ("y_", spec_y, env_y, [b for _, b in reg_map.inputs])):
        block = _Block(prefix, spec, env, lines)
        for reg, name in zip(pairs, names):
            block.regs[canonical(spec.isa, reg)] = name
        for line in spec.lines:
            block.translate(line)
        sides.append(block)
    x_side, y_side = sides
    diffs = []
    for a, b in reg_map.outputs:
        view = min(view_width(spec_x.isa, a), view_width(spec_y.isa, b))
        diffs.append(f"(not (= {x_side.read(a, view)} {y_side.read(b, view)}))")
    if not diffs:
        diffs.append("false")
    body = diffs[0] if len(diffs) == 1 else "(or " + " ".join(diffs) + ")"
    lines.append(f"(assert {body})")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


class Z3Verifier:
    """Strict verifier: hands the exported query to z3."""

    def __init__(self, timeout_ms: int = 10_000):
        self.timeout_ms = timeout_ms

    def check(self, spec_x: BlockSpec, spec_y: BlockSpec, reg_map: RegisterMap,
              env_y: Optional[Env] = None) -> EquivalenceResult:
        try:
            import z3
        except ImportError as e:
            raise ConfigError("the smt verifier needs the z3-solver package") from e
        script = export_smtlib(spec_x, spec_y, reg_map, env_y)
        solver = z3.Solver()
        solver.set("timeout", self.timeout_ms)
        solver.from_string(script)
        verdict = solver.check()
        if verdict == z3.unsat:
            return EquivalenceResult(True, None, FULL_WIDTH, 0, "unsat")
        if verdict == z3.sat:
            model = solver.model()
            cex = {}
            for reg, name in zip(spec_x.inputs, input_names(spec_x)):
                value = model.eval(z3.BitVec(name, FULL_WIDTH), model_completion=True)
                cex[reg] = value.as_long()
            logger.debug("z3 counterexample: %s", cex)
            return EquivalenceResult(False, cex, FULL_WIDTH, 1, "sat")
        return EquivalenceResult(False, None, FULL_WIDTH, 0, f"solver returned {verdict}")
