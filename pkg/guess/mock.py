"""Synthetic guesser: corrupt a ground-truth translation and fabricate its guess tuple."""

import logging
from collections import Counter
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np

from asm.isa import general_registers, is_zero_register, register_info
from asm.layout import build_program
from asm.models import AsmLine, Immediate, LabelRef, Program, Register
from asm.printing import line_pieces
from asm.table import group_members, lookup
from asm.tokens import tokenize_program
from blockfinder.globals import definition_lines
from blockfinder.models import PureBlock, SubseqSpan
from blockfinder.scanner import partition_spans, program_blocks
from core.constants import DEFAULT_GAMMA
from core.errors import MutationInapplicable

from .models import GuessTuple, MutationSpec, stochastic_rows, token_strings

logger = logging.getLogger(__name__)

LOCAL_KINDS = ("replace-immediate", "replace-register", "swap-mnemonic-within-class")

Site = Tuple[int, int]  # (line index, operand index; -1 for the mnemonic)


class _Mutator:
    def __init__(self, truth: Program, spec: MutationSpec, rng: np.random.Generator):
        self.truth = truth
        self.isa = truth.isa
        self.spec = spec
        self.rng = rng
        self.lines: List[Optional[AsmLine]] = list(truth.all_lines())
        self.touched: Dict[int, Set[int]] = {}
        self.used: Set[Site] = set()
        blocks = program_blocks(truth)
        if spec.solvable_only:
            blocks = [b for b in blocks if b.is_solvable]
        self.blocks = blocks

    # site discovery

    def _immediate_sites(self, block: PureBlock) -> List[Site]:
        sites = []
        for li in block.span.line_range:
            line = self.lines[li]
            spec = lookup(self.isa, line.mnemonic)
            for k, op in enumerate(line.operands):
                if isinstance(op, Immediate) and k < len(spec.slots) and spec.slots[k] in ("i", "si"):
                    sites.append((li, k))
        return sites

    def _register_sites(self, block: PureBlock) -> List[Site]:
        sites = []
        for li in block.span.line_range:
            for k, op in enumerate(self.lines[li].operands):
                if isinstance(op, Register) and not is_zero_register(self.isa, op.name):
                    info = register_info(self.isa, op.name)
                    if info is not None and info.kind == "gpr":
                        sites.append((li, k))
        return sites

    def _mnemonic_sites(self, block: PureBlock) -> List[Site]:
        sites = []
        for li in block.span.line_range:
            spec = lookup(self.isa, self.lines[li].mnemonic)
            if spec is not None and len(group_members(self.isa, spec.group)) > 1:
                sites.append((li, -1))
        return sites

    def _sites(self, kind: str, blocks: Sequence[PureBlock]) -> List[Site]:
        finder = {
            "replace-immediate": self._immediate_sites,
            "replace-register": self._register_sites,
            "swap-mnemonic-within-class": self._mnemonic_sites,
        }[kind]
        return [s for b in blocks for s in finder(b) if s not in self.used]

    def _pick(self, sites: Sequence, kind: str):
        if not sites:
            raise MutationInapplicable(kind, "no site in the ground truth")
        return sites[int(self.rng.integers(len(sites)))]

    # local mutations

    def _mark(self, li: int, piece: int) -> None:
        self.touched.setdefault(li, set()).add(piece)

    def _replace_immediate(self, site: Site) -> None:
        li, k = site
        line = self.lines[li]
        op = line.operands[k]
        spec = lookup(self.isa, line.mnemonic)
        view = next((register_info(self.isa, o.name).width for o in line.operands
                     if isinstance(o, Register) and register_info(self.isa, o.name)), 64)
        lo, hi = spec.immediate_bounds(view)
        choices = [op.value + d for d in range(-16, 17) if d and lo <= op.value + d <= hi]
        if not choices:
            raise MutationInapplicable("replace-immediate", f"no alternative for {op.value}")
        value = choices[int(self.rng.integers(len(choices)))]
        operands = list(line.operands)
        operands[k] = Immediate(value)
        self.lines[li] = line.with_operands(tuple(operands))
        self._mark(li, k + 1)

    def _replace_register(self, site: Site) -> None:
        li, k = site
        line = self.lines[li]
        op = line.operands[k]
        info = register_info(self.isa, op.name)
        pool = [r for r in general_registers(self.isa, info.width)
                if register_info(self.isa, r).canonical != info.canonical]
        operands = list(line.operands)
        operands[k] = Register(pool[int(self.rng.integers(len(pool)))])
        self.lines[li] = line.with_operands(tuple(operands))
        self._mark(li, k + 1)

    def _swap_mnemonic(self, site: Site) -> None:
        li, _ = site
        line = self.lines[li]
        spec = lookup(self.isa, line.mnemonic)
        others = [m for m in group_members(self.isa, spec.group) if m != spec.mnemonic]
        self.lines[li] = line.with_mnemonic(others[int(self.rng.integers(len(others)))])
        self._mark(li, 0)

    # label mutations

    def _global_labels(self) -> List[str]:
        referenced = {r.name for l in self.lines if l is not None and l.is_instruction for r in l.label_refs()}
        return [name for name in self.truth.globals if name in referenced]

    def _drop_global(self, target: Optional[str]) -> None:
        names = [target] if target else self._global_labels()
        names = [n for n in names if n in self.truth.globals]
        name = self._pick(names, "drop-global-definition")
        index = next(i for i, l in enumerate(self.lines) if l is not None and l.is_label and l.label == name)
        body = definition_lines(self.truth.all_lines(), index)
        self.lines[index] = None
        for offset in range(1, len(body) + 1):
            self.lines[index + offset] = None
        logger.debug("dropped definition of %s", name)

    def _rename_label(self, target: Optional[str]) -> None:
        sites = []
        for li, line in enumerate(self.lines):
            if line is None or not line.is_instruction:
                continue
            for k, op in enumerate(line.operands):
                if isinstance(op, LabelRef) and (target is None or op.name == target) and (li, k) not in self.used:
                    if op.name in self.truth.defined_labels():
                        sites.append((li, k))
        li, k = self._pick(sites, "rename-label")
        line = self.lines[li]
        op = line.operands[k]
        operands = list(line.operands)
        operands[k] = LabelRef(f"{op.name}_{int(self.rng.integers(1000))}", op.modifier)
        self.lines[li] = line.with_operands(tuple(operands))
        self.used.add((li, k))
        self._mark(li, k + 1)

    def apply(self) -> None:
        local = [m for m in self.spec.mutations if m.kind in LOCAL_KINDS]
        blocks = self.blocks
        if self.spec.same_block and local:
            needed = Counter(m.kind for m in local)
            fitting = [b for b in blocks
                       if all(len(self._sites(kind, [b])) >= n for kind, n in needed.items())]
            blocks = [self._pick(fitting, local[0].kind)]
        for m in self.spec.mutations:
            if m.kind == "drop-global-definition":
                self._drop_global(m.target)
            elif m.kind == "rename-label":
                self._rename_label(m.target)
            else:
                site = self._pick(self._sites(m.kind, blocks), m.kind)
                self.used.add(site)
                if m.kind == "replace-immediate":
                    self._replace_immediate(site)
                elif m.kind == "replace-register":
                    self._replace_register(site)
                else:
                    self._swap_mnemonic(site)


def _span_map(truth_spans: Sequence[SubseqSpan], source_spans: Sequence[SubseqSpan],
              correspondence: Optional[Sequence[int]]) -> List[int]:
    """Source span index for every truth span."""
    if correspondence is not None:
        by_line = {}
        for i, span in enumerate(source_spans):
            for line in span.line_range:
                by_line[line] = i
        out = []
        for span in truth_spans:
            target = next((correspondence[l] for l in span.line_range
                           if l < len(correspondence) and correspondence[l] is not None
                           and correspondence[l] >= 0), None)
            out.append(by_line.get(target, out[-1] if out else 0))
        return out
    n, m = len(truth_spans), len(source_spans)
    if n == m:
        return list(range(n))
    return [min(m - 1, j * m // n) for j in range(n)]


def mock_guess(truth: Program, mutations: MutationSpec = MutationSpec(), seed: int = 0,
               source: Optional[Program] = None, correspondence: Optional[Sequence[int]] = None,
               gamma: float = DEFAULT_GAMMA, noise: float = 0.05, input_id: str = "input",
               rank: int = 1) -> GuessTuple:
    """Guess tuple for a corrupted copy of truth.

    Mutated tokens get probabilities below gamma, every other token 1.0. Attention
    is block diagonal between truth spans and source spans (positional, or through
    correspondence: truth line -> source line), plus uniform noise of total mass
    noise per row, renormalised.
    """
    rng = np.random.default_rng(seed)
    mutator = _Mutator(truth, mutations, rng)
    mutator.apply()
    kept = [i for i, line in enumerate(mutator.lines) if line is not None]
    candidate = build_program([mutator.lines[i] for i in kept], truth.isa)
    tokens = tokenize_program(candidate)
    source = source or truth
    x_tokens = tokenize_program(source)
    truth_spans = partition_spans(truth)
    source_spans = partition_spans(source)
    span_of_truth_line = {}
    for j, span in enumerate(truth_spans):
        for line in span.line_range:
            span_of_truth_line[line] = j
    target = _span_map(truth_spans, source_spans, correspondence)

    probs = np.ones(len(tokens))
    attention = np.zeros((len(tokens), len(x_tokens)))
    cand_lines = candidate.all_lines()
    first_piece = 0
    for new_line, old_line in enumerate(kept):
        pieces = len(line_pieces(cand_lines[new_line], candidate.isa))
        src = source_spans[target[span_of_truth_line[old_line]]]
        width = src.end_token - src.start_token + 1
        for p in range(pieces):
            row = first_piece + p
            attention[row, src.start_token:src.end_token + 1] = (1.0 - noise) / width
            if p in mutator.touched.get(old_line, ()):
                probs[row] = float(rng.uniform(0.05, 0.5) * gamma)
        first_piece += pieces
    if noise > 0 and len(x_tokens):
        jitter = rng.random(attention.shape)
        attention += noise * jitter / jitter.sum(axis=1, keepdims=True)
    attention = stochastic_rows(attention)
    metadata = {"producer": "mock", "seed": seed, "mutations": mutations.to_list(),
                "truncated": False}
    logger.debug("mock guess with %d mutated tokens over %d tokens", int((probs < gamma).sum()), len(tokens))
    return GuessTuple(input_id, rank, token_strings(tokens), probs, attention, token_strings(x_tokens), metadata)
