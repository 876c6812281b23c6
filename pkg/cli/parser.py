"""Argument parser: global flags, shared run flags and one subparser per command."""

import argparse

from asm.isa import Isa
from core.constants import APP_NAME
from guess.models import NORMS
from pipeline.models import RECHECK_MODES

ISA_CHOICES = [i.value for i in Isa]


def _run_flags() -> argparse.ArgumentParser:
    """Flags layered over the config file; None means "not given"."""
    common = argparse.ArgumentParser(add_help=False)
    group = common.add_argument_group("run configuration")
    group.add_argument("--source", dest="source_isa", choices=ISA_CHOICES, help="input ISA")
    group.add_argument("--target", dest="target_isa", choices=ISA_CHOICES, help="output ISA")
    group.add_argument("--gamma", type=float, help="weak-guess probability threshold (default 0.9)")
    group.add_argument("--top-k", dest="top_k", type=int, help="candidates tried per input (default 100)")
    group.add_argument("--norm", choices=NORMS, help="attention sub-matrix norm")
    group.add_argument("--recheck", choices=RECHECK_MODES, help="when repaired candidates are re-run")
    group.add_argument("--seed", type=int, help="seed for mutations and random test vectors")
    group.add_argument("--oracle-cmd", dest="oracle_cmd",
                       help="external oracle command template with {program}, {fixture}, {isa}")
    group.add_argument("--jobs", type=int, help="concurrent inputs / fixture runs")
    group.add_argument("--verifier", dest="verifier_kind", choices=("battery", "smt"),
                       help="block equivalence checker")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=APP_NAME,
                                     description="Repair machine-guessed assembly translations.")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="warnings and errors only")
    parser.add_argument("--log-file", help="also log to this file")
    parser.add_argument("--config", help="JSON config file (default ~/.transketch/config.json)")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    common = _run_flags()

    p = sub.add_parser("transpile", parents=[common], help="transpile input files from ranked guesses")
    p.add_argument("inputs", nargs="+", help="input assembly files")
    p.add_argument("-g", "--guesses", required=True, help="guesses file (JSON lines)")
    p.add_argument("--input-id", help="guess input id (default: file name without ISA tag)")
    p.add_argument("-o", "--output-dir", help="where output programs go (default: next to the input)")
    p.add_argument("--report-path", help="report file (default: stdout)")
    p.add_argument("--append", action="store_true", help="append to the report file")

    p = sub.add_parser("mutate", parents=[common], help="write mock guesses from a ground-truth translation")
    p.add_argument("truth", help="ground-truth program in the output ISA")
    p.add_argument("-i", "--input", help="input program the attention should index")
    p.add_argument("-m", "--mutations", default="",
                   help='e.g. "replace-immediate*2,drop-global-definition=.LC0"')
    p.add_argument("--same-block", action="store_true", help="keep block mutations in one block")
    p.add_argument("--samples", type=int, default=1, help="number of ranked guesses")
    p.add_argument("--input-id", help="input id recorded in the guesses")
    p.add_argument("-o", "--output", required=True, help="guesses file to write")

    p = sub.add_parser("solve", parents=[common], help="fill the holes of a sketch block")
    p.add_argument("spec", help="specification block in the input ISA")
    p.add_argument("sketch", help="sketch block with ?N holes")
    p.add_argument("--symbol", action="append", default=[], metavar="LABEL=VALUE",
                   help="value of a referenced global")
    p.add_argument("--smt", help="write the SMT-LIB2 equivalence query of the solution here")

    p = sub.add_parser("exec-block", parents=[common], help="run a straight-line block")
    p.add_argument("block", help="block of instructions")
    p.add_argument("--set", action="append", default=[], metavar="REG=VALUE", help="input register value")
    p.add_argument("--symbol", action="append", default=[], metavar="LABEL=VALUE",
                   help="value of a referenced global")
    p.add_argument("--width", type=int, default=64, help="register width to evaluate at")

    p = sub.add_parser("blocks", parents=[common], help="list the pure blocks of a program")
    p.add_argument("file", help="assembly file")
    p.add_argument("--spans", action="store_true", help="list the full span partition instead")

    p = sub.add_parser("report", help="failure table and samples used from report records")
    p.add_argument("records", nargs="*", help="report files (JSON lines)")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    return parser
