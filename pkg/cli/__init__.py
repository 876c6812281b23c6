"""Command-line surface: run configuration, argument parser and subcommands."""

from .commands import COMMANDS, input_id_of
from .models import RunConfig
from .parser import build_parser

__all__ = ['COMMANDS', 'input_id_of', 'RunConfig', 'build_parser']
