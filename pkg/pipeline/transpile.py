"""Guess-and-sketch: rank candidates, repair flagged spans, recheck with the oracle."""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from asm.isa import Isa
from asm.models import AsmLine, LabelRef, Memory, Program
from asm.tokens import tokenize_lines
from blockfinder.models import RefStatus, ScopedRef, SubseqSpan
from blockfinder.scanner import partition_spans, program_units
from blockfinder.scope import find_out_of_scope_refs
from comparison.operations import compare_literals
from core.errors import DomainExplosion, TranspileError
from guess.alignment import extract_alignment
from guess.loading import project_guess
from guess.marking import mark_errors
from guess.models import Alignment, Candidate, ErrorFlag, ErrorMask, GuessTuple, token_strings
from sketch.cegis import cegis_solve
from sketch.global_refs import LabelAllocator, resolve_global_reference
from sketch.holes import assign_lines, make_sketch
from sketch.spec_builder import build_spec, infer_register_map, symbol_table

from .models import OracleVerdict, PipelineConfig, RepairRecord, TranspileResult
from .recombine import recombine
from .taxonomy import RunReport, classify_failure, compile_report, is_math_block

logger = logging.getLogger(__name__)

Recheck = Callable[[Program], OracleVerdict]


def other_isa(isa: Isa) -> Isa:
    return Isa.RISCV64 if isa is Isa.ARMV8 else Isa.ARMV8


def _rename_ref(line: AsmLine, old: LabelRef, new_name: str) -> AsmLine:
    """line with the first occurrence of old renamed, modifier kept."""
    done = False
    operands = []
    for op in line.operands:
        if not done and op == old:
            op, done = LabelRef(new_name, old.modifier), True
        elif not done and isinstance(op, Memory) and op.offset_ref == old:
            op, done = Memory(op.base, op.offset, op.mode, LabelRef(new_name, old.modifier), op.index,
                              op.extend, op.has_offset, op.hash), True
        operands.append(op)
    return line.with_operands(tuple(operands))


@dataclass
class _Repair:
    """Mutable state while repairing one candidate."""
    source: Program
    candidate: Candidate
    config: PipelineConfig
    allocator: LabelAllocator
    lines: List[AsmLine] = field(default_factory=list)
    created: Dict[str, Tuple[AsmLine, ...]] = field(default_factory=dict)
    records: List[RepairRecord] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.program: Program = self.candidate.program
        self.lines = list(self.program.all_lines())
        self.symbols = symbol_table(self.program, self.lines)

    @property
    def isa(self) -> Isa:
        return self.program.isa

    def function_name(self, span: SubseqSpan) -> Optional[str]:
        if span.function < 0:
            return None
        return self.program.functions[span.function].name

    def rebuild(self) -> Program:
        """The candidate with every repair so far, created globals appended."""
        units = program_units(self.program)
        preamble: Tuple[str, ...] = ()
        functions = []
        start = 0
        for function, unit in units:
            lines = self.lines[start:start + len(unit)]
            start += len(unit)
            tokens = token_strings(tokenize_lines(lines, self.isa))
            if function < 0:
                preamble = tokens
            else:
                functions.append((self.program.functions[function].name, tokens))
        return recombine(functions, preamble, self.created, self.isa)

    def fix_reference(self, span: SubseqSpan, ref: ScopedRef, counterpart: Optional[ScopedRef]) -> RepairRecord:
        record = RepairRecord(span, (ErrorFlag.OUT_OF_SCOPE.value,), "global-ref",
                              function=self.function_name(span))
        if counterpart is None or counterpart.status is not RefStatus.GLOBAL_DEFINED:
            record.error = f"no input-side definition for {ref.ref.name!r}"
            return record
        required = self.source.globals[counterpart.ref.name]
        try:
            resolution = resolve_global_reference(self.program, "label", required, self.allocator)
        except TranspileError as e:
            record.status, record.error = "error", str(e)
            return record
        self.lines[ref.line] = _rename_ref(self.lines[ref.line], ref.ref, resolution.label)
        if resolution.kind == "create":
            self.created[resolution.label] = resolution.lines
        if resolution.value is not None:
            self.symbols[resolution.label] = resolution.value
        record.status, record.resolution = resolution.kind, resolution
        logger.debug("%s -> %s (%s)", ref.ref.name, resolution.label, resolution.kind)
        return record

    def fix_block(self, span: SubseqSpan, x_span: SubseqSpan, low: Sequence[int],
                  hint: Dict[str, str]) -> RepairRecord:
        record = RepairRecord(span, (ErrorFlag.LOW_CONFIDENCE.value,), "cegis",
                              function=self.function_name(span))
        block = self.lines[span.start_line:span.end_line + 1]
        if span.kind != "block":
            record.error = "flagged tokens outside a pure block"
            return record
        labels = list(self.program.globals) + list(self.created)
        spec = None
        try:
            spec = build_spec(self.source, x_span, self.config.solver.outputs)
            sketch = make_sketch(block, low, self.isa, origin=span, window=self.config.solver.imm_window,
                                 preferred=list(hint.values()), labels=labels)
            result = cegis_solve(spec, sketch, config=self.config.solver, verifier=self.config.verifier,
                                 hint=hint, symbols=self.symbols)
        except DomainExplosion as e:
            record.status, record.error = "timeout", str(e)
        except TranspileError as e:
            record.status, record.error = "error", str(e)
        else:
            record.result, record.status = result, result.status
            if result.solved:
                self.lines[span.start_line:span.end_line + 1] = assign_lines(sketch, result.assignment.values)
        if not record.repaired:
            record.math = is_math_block(block, self.isa) or (
                spec is not None and is_math_block(spec.lines, self.source.isa))
        return record

    def run(self, x_spans: Sequence[SubseqSpan], x_scope, recheck: Optional[Recheck] = None
            ) -> Optional[OracleVerdict]:
        """Repair every flagged span in order; stops early when recheck accepts."""
        cand = self.candidate
        y_spans = partition_spans(self.program)
        alignment: Optional[Alignment]
        try:
            alignment = extract_alignment(cand.attention, x_spans, y_spans, self.config.norm)
        except TranspileError as e:
            logger.warning("rank %d: no alignment: %s", cand.rank, e)
            alignment = None
        y_scope = find_out_of_scope_refs(self.program)
        mask: ErrorMask = mark_errors(len(cand.tokens), cand.probs, self.config.gamma, alignment,
                                      y_scope, x_scope, self.program, self.source)
        if alignment is None or not mask.any:
            return None
        hint = infer_register_map(self.source, self.program, alignment, mask)
        for j, span in enumerate(alignment.output_spans):
            flags = mask.within(span)
            if not flags:
                continue
            x_span = alignment.aligned(j)
            changed = False
            refs = y_scope.get(span, [])
            counterparts = x_scope.get(x_span, [])
            for k, ref in enumerate(refs):
                if flags.get(ref.token) is ErrorFlag.OUT_OF_SCOPE:
                    record = self.fix_reference(span, ref, counterparts[k] if k < len(counterparts) else None)
                    self.records.append(record)
                    changed |= record.repaired
            low = [t for t, f in flags.items() if f is ErrorFlag.LOW_CONFIDENCE]
            if low:
                record = self.fix_block(span, x_span, low, hint)
                self.records.append(record)
                changed |= record.repaired
            if changed and recheck is not None:
                verdict = recheck(self.rebuild())
                if verdict.accepted:
                    return verdict
        return None


def repair_candidate(source: Program, candidate: Candidate, config: PipelineConfig = PipelineConfig(),
                     allocator: Optional[LabelAllocator] = None,
                     recheck: Optional[Recheck] = None) -> Tuple[Program, List[RepairRecord], Optional[OracleVerdict]]:
    """Repair a parsed candidate's flagged spans.

    Returns the repaired program, one record per repair attempt and, in
    per-span mode, the verdict that stopped the repairs early.
    """
    if candidate.program is None:
        raise TranspileError(f"rank {candidate.rank} does not parse: {candidate.parse_error}")
    state = _Repair(source, candidate, config, allocator or LabelAllocator())
    verdict = state.run(partition_spans(source), find_out_of_scope_refs(source), recheck)
    if not any(r.repaired for r in state.records):
        return candidate.program, state.records, verdict
    return state.rebuild(), state.records, verdict


def _classify(source: Program, guess: GuessTuple, candidate: Candidate, program: Optional[Program],
              verdict: Optional[OracleVerdict], records: Sequence[RepairRecord], config: PipelineConfig) -> str:
    report = compile_report(program, candidate.parse_error, guess.truncated, len(guess.tokens),
                             config.max_tokens)
    diffs = tuple(compare_literals(source, program)) if program is not None else ()
    math = any(r.math for r in records)
    return classify_failure(report, RunReport(verdict, diffs, math))


def guess_only(source: Program, guesses: Sequence[GuessTuple], oracle,
               config: PipelineConfig = PipelineConfig(), isa: Optional[Isa] = None) -> TranspileResult:
    """Best-ranked candidate the oracle accepts as it stands, without any repair."""
    isa = isa or other_isa(source.isa)
    ranked = sorted(guesses, key=lambda g: g.rank)[:config.top_k]
    input_id = ranked[0].input_id if ranked else ""
    for guess in ranked:
        try:
            candidate = project_guess(guess, source, isa)
        except TranspileError as e:
            logger.debug("rank %d skipped: %s", guess.rank, e)
            continue
        if candidate.program is not None and oracle.check(source, candidate.program).accepted:
            return TranspileResult(input_id, candidate.program, "verified", guess.rank, rank=guess.rank,
                                   category="Correct", text=guess.text)
    return TranspileResult(input_id, None, "failed", config.top_k)


def guess_and_sketch(source: Program, guesses: Sequence[GuessTuple], oracle,
                     config: PipelineConfig = PipelineConfig(), isa: Optional[Isa] = None,
                     allocator: Optional[LabelAllocator] = None) -> TranspileResult:
    """Transpile source from ranked candidate translations.

    Candidates are tried best rank first. A candidate the oracle accepts as
    it stands is returned unchanged; otherwise its flagged spans are repaired
    and the result rechecked. When no candidate is accepted the first
    parseable one, repaired, is returned as an unverified fallback with its
    failure category.
    """
    isa = isa or other_isa(source.isa)
    allocator = allocator or LabelAllocator()
    ranked = sorted(guesses, key=lambda g: g.rank)[:config.top_k]
    input_id = ranked[0].input_id if ranked else ""
    first: Optional[Tuple[GuessTuple, Candidate]] = None
    fallback = None
    for guess in ranked:
        try:
            candidate = project_guess(guess, source, isa)
        except TranspileError as e:
            logger.warning("%s rank %d skipped: %s", input_id, guess.rank, e)
            continue
        first = first or (guess, candidate)
        if candidate.program is None:
            continue
        verdict = oracle.check(source, candidate.program)
        if verdict.accepted:
            logger.info("%s: rank %d accepted as guessed", input_id, guess.rank)
            return TranspileResult(input_id, candidate.program, "verified", guess.rank, rank=guess.rank,
                                   category="Correct", text=guess.text)
        recheck = (lambda p: oracle.check(source, p)) if config.recheck == "per-span" else None
        try:
            program, records, early = repair_candidate(source, candidate, config, allocator, recheck)
        except TranspileError as e:
            logger.warning("%s rank %d: repair abandoned: %s", input_id, guess.rank, e)
            program, records, early = candidate.program, [], None
        if early is not None:
            verdict = early
        elif any(r.repaired for r in records):
            verdict = oracle.check(source, program)
        if verdict.accepted:
            logger.info("%s: rank %d accepted after %d repairs", input_id, guess.rank,
                        sum(r.repaired for r in records))
            return TranspileResult(input_id, program, "verified", guess.rank, records, "Correct",
                                   guess.rank)
        if fallback is None:
            fallback = (guess, candidate, program, records, verdict)

    if fallback is not None:
        guess, candidate, program, records, verdict = fallback
        category = _classify(source, guess, candidate, program, verdict, records, config)
        logger.info("%s: no candidate accepted; falling back to rank %d (%s)", input_id, guess.rank, category)
        return TranspileResult(input_id, program, "unverified-fallback", config.top_k, records, category,
                               guess.rank)
    category = None
    if first is not None:
        category = _classify(source, first[0], first[1], None, None, (), config)
    logger.info("%s: no candidate parses", input_id)
    return TranspileResult(input_id, None, "failed", config.top_k, category=category)
