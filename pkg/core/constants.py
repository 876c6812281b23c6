"""Constants and regex patterns shared across the transpiler."""

from pathlib import Path
import re

APP_NAME = "transketch"
APP_DIR = Path.home() / ".transketch"
CONFIG_PATH = APP_DIR / "config.json"

REPORT_SCHEMA_VERSION = 1
GUESS_SCHEMA_VERSION = 1

# Pipeline defaults: weak-guess threshold and number of sampled candidates.
DEFAULT_GAMMA = 0.9
DEFAULT_TOP_K = 100
DEFAULT_MAX_TOKENS = 2048

# Line grammar. A label sharing its line with an instruction ("L1: ret") is split
# into a label line and an instruction line carrying the same source index.
LABEL_RE = re.compile(r'^([A-Za-z_.$][\w.$]*):\s*(.*)$')
DIRECTIVE_RE = re.compile(r'^(\.[A-Za-z_][\w.]*)(?:\s+(.*))?$')
INSTRUCTION_RE = re.compile(r'^(\?\d+|[A-Za-z][\w.]*)(?:\s+(.*))?$')
HOLE_RE = re.compile(r'^\?(\d+)$')

# Prefix for labels created by the global-reference solver.
SYNTH_LABEL_PREFIX = ".LC_gs"

# Data directives recognised as global definitions, with element size in bytes.
DATA_DIRECTIVE_SIZES = {
    ".byte": 1,
    ".hword": 2, ".half": 2, ".short": 2, ".2byte": 2,
    ".word": 4, ".long": 4, ".int": 4, ".4byte": 4,
    ".xword": 8, ".dword": 8, ".quad": 8, ".8byte": 8,
    ".float": 4, ".double": 8,
}
STRING_DIRECTIVES = (".string", ".asciz", ".ascii")
ZERO_DIRECTIVES = (".zero", ".space", ".skip")

# Directives that may precede a function label as part of its header.
HEADER_DIRECTIVES = (
    ".text", ".align", ".p2align", ".balign", ".global", ".globl",
    ".type", ".weak", ".hidden", ".local",
)
SECTION_DIRECTIVES = (".section", ".text", ".data", ".bss", ".rodata")
