"""Execution oracles deciding whether a candidate behaves like the source program."""

import logging
import shlex
import subprocess
import tempfile
import threading
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from asm.models import Program
from asm.printing import print_program
from comparison.operations import decode_output
from core.errors import ConfigError
from semantics.models import ExecutionResult, Fixture
from semantics.program import DEFAULT_STEP_LIMIT, run_fixtures

from .models import OracleVerdict

logger = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 10.0


def _verdict(expected: Sequence[ExecutionResult], actual: Sequence[ExecutionResult]) -> OracleVerdict:
    failed = [r.error for r in expected if r.error and not r.faulted]
    if failed:
        return OracleVerdict(False, tuple(actual), tuple(expected), f"reference run failed: {failed[0]}")
    accepted = all(want.observable() == got.observable() and (not got.error or got.faulted)
                   for want, got in zip(expected, actual))
    return OracleVerdict(accepted, tuple(actual), tuple(expected))


class InterpreterOracle:
    """Runs both programs on the internal interpreter.

    Reference runs are cached per source text.
    """

    kind = "internal-interpreter"

    def __init__(self, fixtures: Sequence[Fixture] = (), step_limit: int = DEFAULT_STEP_LIMIT) -> None:
        self.fixtures = tuple(fixtures) or (Fixture(),)
        self.step_limit = step_limit
        self._reference: Dict[str, Tuple[ExecutionResult, ...]] = {}
        self._lock = threading.Lock()

    def reference(self, source: Program) -> Tuple[ExecutionResult, ...]:
        key = print_program(source)
        with self._lock:
            cached = self._reference.get(key)
        if cached is None:
            cached = tuple(run_fixtures(source, self.fixtures, self.step_limit))
            with self._lock:
                self._reference[key] = cached
        return cached

    def check(self, source: Program, candidate: Program) -> OracleVerdict:
        expected = self.reference(source)
        actual = run_fixtures(candidate, self.fixtures, self.step_limit)
        verdict = _verdict(expected, actual)
        logger.debug("interpreter verdict: %s%s", verdict.accepted,
                     f" ({verdict.error})" if verdict.error else "")
        return verdict


class CommandOracle:
    """Runs both programs through an external command, e.g. an emulator wrapper.

    The template may use {program} (path of the assembly file), {isa} and
    {fixture} (the fixture's argv, shell-quoted); the fixture's stdin is piped.
    A run's verdict is its stdout, exit code and terminating signal.
    """

    kind = "external-command"

    def __init__(self, template: str, fixtures: Sequence[Fixture] = (), jobs: int = 1,
                 timeout: float = DEFAULT_TIMEOUT) -> None:
        if "{program}" not in template:
            raise ConfigError("oracle command template must contain {program}")
        if jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {jobs}")
        self.template = template
        self.fixtures = tuple(fixtures) or (Fixture(),)
        self.jobs = jobs
        self.timeout = timeout
        self._reference: Dict[str, Tuple[ExecutionResult, ...]] = {}
        self._lock = threading.Lock()

    def command(self, path: Path, fixture: Fixture, isa: str) -> List[str]:
        text = self.template.format(program=shlex.quote(str(path)), isa=isa,
                                    fixture=" ".join(shlex.quote(a) for a in fixture.argv))
        return shlex.split(text)

    def run_one(self, path: Path, fixture: Fixture, isa: str) -> ExecutionResult:
        cmd = self.command(path, fixture, isa)
        try:
            proc = subprocess.run(cmd, input=fixture.stdin.encode("utf-8"), capture_output=True,
                                  timeout=self.timeout)
        except subprocess.TimeoutExpired:
            return ExecutionResult(exit_code=None, error=f"timed out after {self.timeout}s")
        except OSError as e:
            return ExecutionResult(exit_code=None, error=f"cannot run {cmd[0]!r}: {e}")
        stdout = decode_output(proc.stdout)
        if proc.returncode < 0:
            return ExecutionResult(stdout, None, -proc.returncode)
        return ExecutionResult(stdout, proc.returncode)

    def run_all(self, program: Program) -> Tuple[ExecutionResult, ...]:
        with tempfile.TemporaryDirectory(prefix="transketch-") as tmp:
            path = Path(tmp) / "program.s"
            path.write_text(print_program(program), encoding="utf-8")
            isa = program.isa.value
            if self.jobs == 1:
                return tuple(self.run_one(path, f, isa) for f in self.fixtures)
            with ThreadPoolExecutor(max_workers=self.jobs) as pool:
                return tuple(pool.map(lambda f: self.run_one(path, f, isa), self.fixtures))

    def reference(self, source: Program) -> Tuple[ExecutionResult, ...]:
        key = print_program(source)
        with self._lock:
            cached = self._reference.get(key)
        if cached is None:
            cached = self.run_all(source)
            with self._lock:
                self._reference[key] = cached
        return cached

    def check(self, source: Program, candidate: Program) -> OracleVerdict:
        expected = self.reference(source)
        actual = self.run_all(candidate)
        verdict = _verdict(expected, actual)
        logger.debug("command verdict: %s%s", verdict.accepted,
                     f" ({verdict.error})" if verdict.error else "")
        return verdict


def make_oracle(template: Optional[str], fixtures: Sequence[Fixture] = (), jobs: int = 1):
    """The external oracle when a command template is given, else the interpreter."""
    if template:
        return CommandOracle(template, fixtures, jobs)
    return InterpreterOracle(fixtures)
