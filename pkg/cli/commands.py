"""Subcommand implementations. Each returns the process exit code."""

import argparse
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from asm.isa import Isa
from asm.models import AsmLine, Program
from asm.parsing import parse_lines, parse_program
from asm.printing import format_line, print_program
from blockfinder.scanner import partition_spans, program_blocks
from core.errors import ConfigError, TranspileError
from core.settings import ensure_dir
from guess.loading import load_guesses, read_records, write_guesses
from guess.mock import mock_guess
from guess.models import MutationSpec
from pipeline.oracle import make_oracle
from pipeline.taxonomy import failure_table
from pipeline.transpile import guess_and_sketch, other_isa
from pipeline.models import TranspileResult
from semantics.equivalence import default_pairing, eval_block
from semantics.interpreter import Env
from semantics.models import BlockSpec
from semantics.smtlib import export_smtlib
from sketch.cegis import cegis_solve
from sketch.holes import assign_lines, sketch_from_lines
from sketch.spec_builder import block_outputs

from .models import RunConfig

logger = logging.getLogger(__name__)

ISA_SUFFIXES = (".armv8", ".aarch64", ".arm", ".riscv64", ".riscv", ".rv")
OUTPUT_TAG = {Isa.ARMV8: "arm", Isa.RISCV64: "rv"}


def input_id_of(path) -> str:
    """File name without the .s extension and ISA tag: prog.arm.s -> prog."""
    name = Path(path).name
    if name.endswith(".s"):
        name = name[:-2]
    for suffix in ISA_SUFFIXES:
        if name.endswith(suffix):
            return name[:-len(suffix)]
    return name


def isa_of(path, given: Optional[Isa], flag: str) -> Isa:
    isa = given or Isa.from_path(path)
    if isa is None:
        raise ConfigError(f"cannot tell the ISA of {path}; pass {flag}")
    return isa


def read_program(path, isa: Isa) -> Program:
    return parse_program(Path(path).read_text(encoding="utf-8"), isa)


def read_block(path, isa: Isa) -> List[AsmLine]:
    return [l for l in parse_lines(Path(path).read_text(encoding="utf-8"), isa) if l.is_instruction]


def parse_assignments(items: Sequence[str], what: str) -> Dict[str, int]:
    """NAME=VALUE pairs; values in any base int() accepts with prefix."""
    out: Dict[str, int] = {}
    for item in items or ():
        name, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"{what} {item!r} is not NAME=VALUE")
        try:
            out[name.strip()] = int(value.strip(), 0)
        except ValueError as e:
            raise ConfigError(f"{what} {item!r} has a non-integer value") from e
    return out


def write_records(path: Optional[Path], records: Iterable[Mapping], append: bool = False) -> None:
    """Report records as JSON lines, to path or stdout."""
    lines = [json.dumps(r, ensure_ascii=False) for r in records]
    if path is None:
        for line in lines:
            print(line)
        return
    ensure_dir(path.parent)
    with open(path, "a" if append else "w", encoding="utf-8") as fh:
        for line in lines:
            fh.write(line + "\n")


def output_path(out_dir: Path, input_id: str, isa: Isa) -> Path:
    return out_dir / f"{input_id}.out.{OUTPUT_TAG[isa]}.s"


# transpile

def _transpile_one(path: Path, guesses: Mapping, oracle, config: RunConfig, out_dir: Optional[Path],
                   input_id: Optional[str]) -> Tuple[TranspileResult, Optional[Path]]:
    source_isa = isa_of(path, config.source_isa, "--source")
    target_isa = config.target_isa or other_isa(source_isa)
    source = read_program(path, source_isa)
    input_id = input_id or input_id_of(path)
    candidates = guesses.get(input_id)
    if not candidates:
        raise ConfigError(f"no guesses for input {input_id!r} ({path})")
    result = guess_and_sketch(source, candidates, oracle, config.pipeline(), target_isa)
    written = None
    if result.program is not None:
        written = output_path(out_dir or path.parent, input_id, target_isa)
        ensure_dir(written.parent)
        written.write_text(print_program(result.program), encoding="utf-8")
    logger.info("%s: %s (samples used %d)%s", input_id, result.status, result.samples_used,
                f" -> {written}" if written else "")
    return result, written


def cmd_transpile(args: argparse.Namespace, config: RunConfig) -> int:
    inputs = [Path(p) for p in args.inputs]
    if args.input_id and len(inputs) > 1:
        raise ConfigError("--input-id needs exactly one input file")
    guesses = load_guesses(args.guesses, config.top_k)
    oracle = make_oracle(config.oracle_cmd, config.fixtures, config.jobs)
    out_dir = Path(args.output_dir) if args.output_dir else None
    failed = 0
    records: List[Dict] = []
    with ThreadPoolExecutor(max_workers=config.jobs) as pool:
        futures = [pool.submit(_transpile_one, p, guesses, oracle, config, out_dir, args.input_id)
                   for p in inputs]
        for path, future in zip(inputs, futures):
            try:
                result, _ = future.result()
            except (TranspileError, OSError) as e:
                logger.error("%s: %s", path, e)
                failed += 1
                continue
            records.extend(result.to_records(config.to_dict()))
    write_records(Path(args.report_path) if args.report_path else None, records, args.append)
    if failed:
        logger.error("%d of %d inputs could not be processed", failed, len(inputs))
        return 2
    return 0


# mutate

def cmd_mutate(args: argparse.Namespace, config: RunConfig) -> int:
    truth_isa = isa_of(args.truth, config.target_isa, "--target")
    truth = read_program(args.truth, truth_isa)
    source = None
    if args.input:
        source = read_program(args.input, isa_of(args.input, config.source_isa, "--source"))
    spec = MutationSpec.parse(args.mutations or "", args.same_block)
    input_id = args.input_id or input_id_of(args.input or args.truth)
    guesses = [mock_guess(truth, spec, config.seed + rank - 1, source=source, gamma=config.gamma,
                          input_id=input_id, rank=rank)
               for rank in range(1, args.samples + 1)]
    write_guesses(args.output, guesses)
    logger.info("wrote %d guesses for %s to %s", len(guesses), input_id, args.output)
    return 0


# solve

def cmd_solve(args: argparse.Namespace, config: RunConfig) -> int:
    x_isa = isa_of(args.spec, config.source_isa, "--source")
    y_isa = config.target_isa or Isa.from_path(args.sketch) or other_isa(x_isa)
    symbols = parse_assignments(args.symbol, "--symbol")
    x_lines = read_block(args.spec, x_isa)
    spec = BlockSpec.from_lines(x_lines, x_isa, block_outputs(x_lines, x_isa, config.solver.outputs), symbols)
    sketch = sketch_from_lines(parse_lines(Path(args.sketch).read_text(encoding="utf-8"), y_isa), y_isa,
                               config.solver.imm_window, labels=list(symbols))
    result = cegis_solve(spec, sketch, config=config.solver, verifier=config.verifier, symbols=symbols)
    out = result.to_dict(y_isa)
    if result.solved:
        lines = assign_lines(sketch, result.assignment.values)
        out["lines"] = [format_line(l, y_isa).strip() for l in lines]
        if args.smt:
            candidate = BlockSpec.from_lines(lines, y_isa, block_outputs(lines, y_isa, config.solver.outputs),
                                             symbols)
            pairing = config.solver.reg_map or default_pairing(spec, candidate)
            if pairing is None:
                logger.warning("no register pairing; SMT query not written")
            else:
                Path(args.smt).write_text(export_smtlib(spec, candidate, pairing, Env(symbols=symbols)),
                                          encoding="utf-8")
                logger.info("SMT-LIB query written to %s", args.smt)
    elif args.smt:
        logger.warning("sketch %s; SMT query not written", result.status)
    print(json.dumps(out, indent=2))
    return 0


# exec-block

def cmd_exec_block(args: argparse.Namespace, config: RunConfig) -> int:
    isa = isa_of(args.block, config.source_isa, "--source")
    lines = read_block(args.block, isa)
    symbols = parse_assignments(args.symbol, "--symbol")
    spec = BlockSpec.from_lines(lines, isa, symbols=symbols)
    given = parse_assignments(args.set, "--set")
    inputs = {name: given.get(name, 0) for name in spec.inputs}
    unused = sorted(set(given) - set(spec.inputs))
    if unused:
        logger.warning("registers %s are not inputs of the block", unused)
    outputs = eval_block(spec, inputs, args.width)
    print(json.dumps({
        "inputs": {k: f"0x{v & ((1 << 64) - 1):x}" for k, v in inputs.items()},
        "outputs": {k: f"0x{v:x}" for k, v in outputs.items()},
    }, indent=2))
    return 0


# blocks

def cmd_blocks(args: argparse.Namespace, config: RunConfig) -> int:
    program = read_program(args.file, isa_of(args.file, config.source_isa, "--source"))
    if args.spans:
        write_records(None, (s.to_dict() for s in partition_spans(program)))
        return 0
    records = []
    for block in program_blocks(program):
        records.append({
            "span": block.span.to_dict(),
            "inputs": list(block.inputs),
            "outputs": list(block.outputs),
            "solvable": block.is_solvable,
            "global_refs": [r.name for r in block.global_refs],
            "lines": [format_line(l, program.isa).strip() for l in block.lines],
        })
    write_records(None, records)
    return 0


# report

def cmd_report(args: argparse.Namespace, config: RunConfig) -> int:
    records: List[Mapping] = []
    for path in args.records:
        records.extend(record for _, record in read_records(Path(path)))
    table = failure_table(records)
    if args.json:
        print(json.dumps(table.to_dict(), indent=2))
    else:
        print(table.format())
    return 0


COMMANDS = {
    "transpile": cmd_transpile,
    "mutate": cmd_mutate,
    "solve": cmd_solve,
    "exec-block": cmd_exec_block,
    "blocks": cmd_blocks,
    "report": cmd_report,
}
