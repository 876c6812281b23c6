"""Reference evaluator: interprets the instruction table's SMT-LIB rules over Python ints.

Written independently of the vectorised interpreter so the two can be checked
against each other instruction by instruction.
"""

from functools import lru_cache
from typing import Dict, List, Mapping, Optional, Tuple, Union

from asm.isa import ARM_FLAGS, Isa, is_zero_register, register_info
from asm.models import AsmLine, FloatImmediate, Immediate, LabelRef, Register, Shift
from asm.table import BOUNDARY_CLASSES, InstructionSpec, lookup
from core.errors import UnsupportedInstruction

SExpr = Union[str, List["SExpr"]]
BV = Tuple[int, int]  # (value, width)


def tokenize_sexpr(text: str) -> List[str]:
    return text.replace("(", " ( ").replace(")", " ) ").split()


def parse_sexpr(text: str) -> SExpr:
    tokens = tokenize_sexpr(text)

    def read(pos: int) -> Tuple[SExpr, int]:
        tok = tokens[pos]
        if tok == "(":
            items = []
            pos += 1
            while tokens[pos] != ")":
                item, pos = read(pos)
                items.append(item)
            return items, pos + 1
        return tok, pos + 1

    expr, end = read(0)
    if end != len(tokens):
        raise ValueError(f"trailing tokens in {text!r}")
    return expr


@lru_cache(maxsize=None)
def compile_rule(rule: str, n: int, h: int) -> SExpr:
    text = (rule.replace("{N1}", str(n - 1)).replace("{N}", str(n))
            .replace("{H1}", str(h - 1)).replace("{H}", str(h)))
    return parse_sexpr(text)


def _m(w: int) -> int:
    return (1 << w) - 1


def _to_signed(v: int, w: int) -> int:
    return v - (1 << w) if v >> (w - 1) & 1 else v


def evaluate(expr: SExpr, env: Mapping[str, BV]):
    """Value of expr: a (value, width) pair, or a bool for predicates."""
    if isinstance(expr, str):
        if expr in env:
            return env[expr]
        raise ValueError(f"unbound atom {expr!r}")
    head = expr[0]
    if head == "_":
        w = int(expr[2])
        return int(expr[1][2:]) & _m(w), w
    if isinstance(head, list):
        op = head[1]
        value, w = evaluate(expr[1], env)
        if op == "sign_extend":
            k = int(head[2])
            return _to_signed(value, w) & _m(w + k), w + k
        if op == "zero_extend":
            return value, w + int(head[2])
        if op == "extract":
            hi, lo = int(head[2]), int(head[3])
            return (value >> lo) & _m(hi - lo + 1), hi - lo + 1
        raise ValueError(f"unknown indexed operator {op!r}")
    args = [evaluate(a, env) for a in expr[1:]]
    if head == "ite":
        return args[1] if args[0] else args[2]
    if head == "=":
        return args[0][0] == args[1][0]
    (a, w), rest = args[0], args[1:]
    b = rest[0][0] if rest else 0
    if head == "bvnot":
        return ~a & _m(w), w
    if head == "bvneg":
        return -a & _m(w), w
    if head == "bvadd":
        return (a + b) & _m(w), w
    if head == "bvsub":
        return (a - b) & _m(w), w
    if head == "bvmul":
        return (a * b) & _m(w), w
    if head == "bvand":
        return a & b, w
    if head == "bvor":
        return a | b, w
    if head == "bvxor":
        return a ^ b, w
    if head == "bvshl":
        return ((a << b) & _m(w) if b < w else 0), w
    if head == "bvlshr":
        return (a >> b if b < w else 0), w
    if head == "bvashr":
        return (_to_signed(a, w) >> min(b, w)) & _m(w), w
    if head == "bvudiv":
        return (a // b if b else _m(w)), w
    if head == "bvurem":
        return (a % b if b else a), w
    if head == "bvsdiv":
        sa, sb = _to_signed(a, w), _to_signed(b, w)
        q = abs(sa) // abs(sb) if sb else _m(w)
        return (-q if (sa < 0) != (sb < 0) else q) & _m(w), w
    if head == "bvsrem":
        sa, sb = _to_signed(a, w), _to_signed(b, w)
        r = abs(sa) % abs(sb) if sb else abs(sa)
        return (-r if sa < 0 else r) & _m(w), w
    if head == "bvslt":
        return _to_signed(a, w) < _to_signed(b, w)
    if head == "bvult":
        return a < b
    raise ValueError(f"unknown operator {head!r}")


def _view(isa: Isa, name: str, width: int) -> int:
    if name == ARM_FLAGS:
        return 4
    info = register_info(isa, name)
    return width // 2 if info is not None and info.width == 32 else width


def _canon(isa: Isa, name: str) -> str:
    info = register_info(isa, name)
    return info.canonical if info else name


def _read(regs: Mapping[str, int], isa: Isa, name: str, width: int) -> int:
    if is_zero_register(isa, name):
        return 0
    return regs.get(_canon(isa, name), 0) & _m(_view(isa, name, width))


def _address_part(ref: LabelRef, symbols: Mapping[str, int]) -> int:
    addr = symbols[ref.name]
    modifier = ref.modifier
    if modifier in ("lo12", "got_lo12", "lo12_nc"):
        return addr & 0xFFF
    if modifier == "hi":
        return (addr + 0x800) >> 12 & 0xFFFFF
    if modifier == "lo":
        low = addr & 0xFFF
        return low - 0x1000 if low & 0x800 else low
    return addr


def _shifted(value: int, shift: Shift, n: int) -> int:
    k = shift.amount or 0
    if shift.op == "lsl":
        return (value << k) & _m(n)
    if shift.op == "lsr":
        return value >> k
    if shift.op == "asr":
        return (_to_signed(value, n) >> k) & _m(n)
    if shift.op == "ror":
        k %= n
        return ((value >> k) | (value << (n - k))) & _m(n)
    raise UnsupportedInstruction(shift.op, "extend operands are not modelled")


def _flags(a: int, b: int, n: int, sub: bool) -> int:
    sa, sb = _to_signed(a, n), _to_signed(b, n)
    exact = sa - sb if sub else sa + sb
    r = exact & _m(n)
    neg = r >> (n - 1) & 1
    zero = int(r == 0)
    carry = int(a >= b) if sub else int(a + b >= 1 << n)
    overflow = int(not -(1 << (n - 1)) <= exact < (1 << (n - 1)))
    return neg << 3 | zero << 2 | carry << 1 | overflow


def reference_step(isa: Isa, line: AsmLine, regs: Mapping[str, int], width: int = 64,
                   symbols: Optional[Mapping[str, int]] = None) -> Dict[str, int]:
    """Registers (canonical name to value) after executing line by its table rule."""
    spec: Optional[InstructionSpec] = lookup(isa, line.mnemonic or "")
    if spec is None or spec.klass in BOUNDARY_CLASSES:
        raise UnsupportedInstruction(line.mnemonic or "?", "no rule")
    operands = list(line.operands)
    shift = operands.pop() if operands and isinstance(operands[-1], Shift) else None
    if spec.is_word_op:
        n = width // 2
    else:
        first = next((op for op in operands if isinstance(op, Register)), None)
        n = _view(isa, first.name, width) if first is not None else width
    values: List[int] = []
    for op in operands:
        if isinstance(op, Register):
            values.append(_read(regs, isa, op.name, width) & _m(n))
        elif isinstance(op, Immediate):
            values.append(op.value & _m(n))
        elif isinstance(op, FloatImmediate):
            values.append(op.bits & _m(n))
        elif isinstance(op, LabelRef):
            values.append(_address_part(op, symbols or {}) & _m(n))
        else:
            raise UnsupportedInstruction(spec.mnemonic, f"operand {op!r}")
    sh = 0
    if shift is not None:
        if spec.shift == "field":
            sh = shift.amount or 0
        else:
            values[-1] = _shifted(values[-1], shift, n)
    out = dict(regs)
    if spec.klass == "compare":
        out[ARM_FLAGS] = _flags(values[0], values[1], n, sub=True)
        return out
    if spec.rule is None:
        return out
    env = {f"${i + 1}": (v, n) for i, v in enumerate(values)}
    env["$sh"] = (sh, n)
    result, _ = evaluate(compile_rule(spec.rule, n, width // 2), env)
    if spec.flags:
        out[ARM_FLAGS] = _flags(values[1], values[2], n, sub=spec.flags == "sub")
    dest = operands[0].name
    if is_zero_register(isa, dest):
        return out
    if spec.is_word_op:
        result = _to_signed(result, n) & _m(width)
    out[_canon(isa, dest)] = result & _m(_view(isa, dest, width))
    return out
