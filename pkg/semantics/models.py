"""Data models for block specifications and equivalence checking."""

from dataclasses import asdict, dataclass, field
from typing import Dict, Mapping, Optional, Tuple

from asm.isa import Isa
from asm.models import AsmLine
from core.errors import ConfigError, UnsupportedInstruction

VERIFIER_KINDS = ("battery", "smt")


@dataclass(frozen=True)
class VerifierConfig:
    """How blocks_equivalent decides equivalence.

    battery: exhaustive (or sampled) inputs at reduced_width bits, then corner values
    and random_samples random vectors at 64 bits. smt: the z3 verifier.
    """
    reduced_width: int = 8
    random_samples: int = 10_000
    seed: int = 0
    exhaustive_limit: int = 1 << 16
    kind: str = "battery"

    def __post_init__(self) -> None:
        if self.kind not in VERIFIER_KINDS:
            raise ConfigError(f"verifier kind must be one of {VERIFIER_KINDS}, got {self.kind!r}")
        if self.reduced_width not in (4, 8, 16, 32):
            raise ConfigError(f"reduced_width must be 4, 8, 16 or 32, got {self.reduced_width}")
        if self.random_samples < 0 or self.exhaustive_limit < 1:
            raise ConfigError("random_samples must be >= 0 and exhaustive_limit >= 1")

    @classmethod
    def from_dict(cls, data: Mapping) -> "VerifierConfig":
        known = {k: v for k, v in data.items() if k in cls.__dataclass_fields__}
        return cls(**known)

    def to_dict(self) -> Dict:
        return asdict(self)

    def reseeded(self, seed: int) -> "VerifierConfig":
        return VerifierConfig(self.reduced_width, self.random_samples, seed, self.exhaustive_limit, self.kind)


@dataclass(frozen=True)
class BlockSpec:
    """A pure block with its input and output registers, as a correctness specification.

    symbols assigns each referenced global a value standing in for its address;
    build_spec uses the global's decoded contents so that two labels defining the
    same data are interchangeable.
    """
    isa: Isa
    lines: Tuple[AsmLine, ...]
    inputs: Tuple[str, ...]
    outputs: Tuple[str, ...]
    symbols: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        from blockfinder.scanner import boundary_reason
        for line in self.lines:
            reason = boundary_reason(line, self.isa)
            if reason is not None:
                raise UnsupportedInstruction(line.mnemonic or line.label or "?",
                                             f"{reason} line cannot be part of a block specification")

    @classmethod
    def from_lines(cls, lines, isa: Isa, outputs: Optional[Tuple[str, ...]] = None,
                   symbols: Optional[Mapping[str, int]] = None) -> "BlockSpec":
        """Spec with inputs from the read-before-write scan and all written outputs."""
        from blockfinder.registers import free_registers_of, written_registers
        lines = tuple(l for l in lines if l.is_instruction)
        return cls(isa, lines, free_registers_of(lines, isa),
                   outputs if outputs is not None else written_registers(lines, isa),
                   dict(symbols or {}))


@dataclass(frozen=True)
class RegisterMap:
    """Pairs (spec register, candidate register) for inputs and outputs."""
    inputs: Tuple[Tuple[str, str], ...] = ()
    outputs: Tuple[Tuple[str, str], ...] = ()

    @classmethod
    def from_dict(cls, data: Mapping) -> "RegisterMap":
        return cls(tuple((a, b) for a, b in data.get("inputs", {}).items()),
                   tuple((a, b) for a, b in data.get("outputs", {}).items()))

    def to_dict(self) -> Dict:
        return {"inputs": dict(self.inputs), "outputs": dict(self.outputs)}


@dataclass(frozen=True)
class EquivalenceResult:
    equivalent: bool
    counterexample: Optional[Dict[str, int]] = None  # spec input register -> value
    width: int = 64
    tested: int = 0
    reason: str = ""

    def __bool__(self) -> bool:
        return self.equivalent


@dataclass(frozen=True)
class Fixture:
    """One test input for a whole program: command-line arguments and stdin."""
    argv: Tuple[str, ...] = ()
    stdin: str = ""
    name: str = ""

    @classmethod
    def from_dict(cls, data: Mapping) -> "Fixture":
        return cls(tuple(str(a) for a in data.get("argv", ())), data.get("stdin", ""), data.get("name", ""))

    def to_dict(self) -> Dict:
        return {"argv": list(self.argv), "stdin": self.stdin, "name": self.name}


SIGSEGV = 11


@dataclass(frozen=True)
class ExecutionResult:
    """Observable behaviour of one program run.

    signal is set when the run was killed (SIGSEGV for memory faults); error holds
    the reason a run could not complete on the interpreter at all.
    """
    stdout: str = ""
    exit_code: Optional[int] = 0
    signal: Optional[int] = None
    steps: int = 0
    error: str = ""

    @property
    def faulted(self) -> bool:
        return self.signal == SIGSEGV

    @property
    def completed(self) -> bool:
        return self.signal is None and not self.error

    def observable(self) -> Tuple[str, Optional[int], Optional[int]]:
        return self.stdout, self.exit_code, self.signal

    def to_dict(self) -> Dict:
        return asdict(self)
