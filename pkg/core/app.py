"""Command-line entry point: logging setup, config layering and dispatch."""

import dataclasses
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from .errors import TranspileError
from .settings import Settings

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(levelname)-8s %(name)-24s %(message)s"
RUN_FLAGS = ("source_isa", "target_isa", "gamma", "top_k", "norm", "recheck", "seed", "oracle_cmd", "jobs")


def configure_logging(verbosity: int = 0, log_file: Optional[str] = None) -> None:
    """One stderr handler, plus a file handler when log_file is given.

    verbosity > 0 logs DEBUG, < 0 only WARNING and above.
    """
    level = logging.DEBUG if verbosity > 0 else logging.WARNING if verbosity < 0 else logging.INFO
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
    formatter = logging.Formatter(LOG_FORMAT)
    stream = logging.StreamHandler(sys.stderr)
    stream.setFormatter(formatter)
    root.addHandler(stream)
    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        handler = logging.FileHandler(log_file, encoding="utf-8")
        handler.setFormatter(formatter)
        root.addHandler(handler)
    root.setLevel(level)


def load_config(args):
    """Defaults, then the config file, then the flags given on the command line."""
    from cli.models import RunConfig

    settings = Settings(Path(args.config) if args.config else None)
    config = RunConfig.from_settings(settings)
    config = config.with_overrides(**{k: getattr(args, k, None) for k in RUN_FLAGS})
    kind = getattr(args, "verifier_kind", None)
    if kind:
        config = dataclasses.replace(config, verifier=dataclasses.replace(config.verifier, kind=kind))
    return config


def main(argv: Optional[Sequence[str]] = None) -> int:
    from cli import COMMANDS, build_parser

    args = build_parser().parse_args(argv)
    configure_logging(1 if args.verbose else -1 if args.quiet else 0, args.log_file)
    try:
        config = load_config(args)
        logger.debug("effective config: %s", config.to_dict())
        return COMMANDS[args.command](args, config)
    except (TranspileError, OSError) as e:
        logger.error("%s", e)
        return 2
