"""Data models for the transpilation pipeline."""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Tuple

from asm.isa import Isa
from asm.models import Program
from blockfinder.models import SubseqSpan
from core.constants import DEFAULT_GAMMA, DEFAULT_MAX_TOKENS, DEFAULT_TOP_K, REPORT_SCHEMA_VERSION
from core.errors import ConfigError
from guess.models import check_norm
from semantics.models import ExecutionResult, VerifierConfig
from sketch.global_refs import GlobalResolution
from sketch.models import SolveResult, SolverConfig

TRANSPILE_STATUSES = ("verified", "unverified-fallback", "failed")
RECHECK_MODES = ("per-candidate", "per-span")
REPAIR_SOLVERS = ("cegis", "global-ref", "none")


@dataclass(frozen=True)
class PipelineConfig:
    gamma: float = DEFAULT_GAMMA
    top_k: int = DEFAULT_TOP_K
    norm: str = "frobenius"
    recheck: str = "per-candidate"
    max_tokens: int = DEFAULT_MAX_TOKENS
    solver: SolverConfig = field(default_factory=SolverConfig)
    verifier: VerifierConfig = field(default_factory=VerifierConfig)

    def __post_init__(self) -> None:
        if not 0 < self.gamma <= 1:
            raise ConfigError(f"gamma must lie in (0, 1], got {self.gamma}")
        if self.top_k < 1:
            raise ConfigError(f"top_k must be >= 1, got {self.top_k}")
        check_norm(self.norm)
        if self.recheck not in RECHECK_MODES:
            raise ConfigError(f"recheck must be one of {RECHECK_MODES}, got {self.recheck!r}")
        if self.max_tokens < 1:
            raise ConfigError(f"max_tokens must be >= 1, got {self.max_tokens}")

    @classmethod
    def from_dict(cls, data: Mapping) -> "PipelineConfig":
        known = {k: v for k, v in data.items() if k in cls.__dataclass_fields__}
        if isinstance(known.get("solver"), Mapping):
            known["solver"] = SolverConfig.from_dict(known["solver"])
        if isinstance(known.get("verifier"), Mapping):
            known["verifier"] = VerifierConfig.from_dict(known["verifier"])
        return cls(**known)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "gamma": self.gamma, "top_k": self.top_k, "norm": self.norm, "recheck": self.recheck,
            "max_tokens": self.max_tokens, "solver": self.solver.to_dict(),
            "verifier": self.verifier.to_dict(),
        }


@dataclass(frozen=True)
class OracleVerdict:
    """Outcome of comparing a candidate's runs with the reference runs.

    error is set when the oracle itself could not produce a verdict.
    """
    accepted: bool
    results: Tuple[ExecutionResult, ...] = ()
    expected: Tuple[ExecutionResult, ...] = ()
    error: str = ""

    @property
    def faulted(self) -> bool:
        return any(r.faulted for r in self.results)


@dataclass
class RepairRecord:
    """What happened to one flagged span of one candidate."""
    span: SubseqSpan
    flags: Tuple[str, ...]
    solver: str = "none"
    status: str = "skipped"
    result: Optional[SolveResult] = None
    resolution: Optional[GlobalResolution] = None
    error: str = ""
    math: bool = False
    function: Optional[str] = None

    @property
    def repaired(self) -> bool:
        return self.status in ("solved", "reuse", "create", "inline")

    def to_dict(self, isa: Isa = Isa.ARMV8) -> Dict[str, Any]:
        return {
            "span": self.span.to_dict(),
            "function": self.function,
            "flags": list(self.flags),
            "solver": self.solver,
            "status": self.status,
            "result": self.result.to_dict(isa) if self.result is not None else None,
            "resolution": self.resolution.to_dict(isa) if self.resolution is not None else None,
            "error": self.error,
        }


@dataclass
class TranspileResult:
    input_id: str
    program: Optional[Program]
    status: str
    samples_used: int
    repairs: List[RepairRecord] = field(default_factory=list)
    category: Optional[str] = None
    rank: Optional[int] = None
    text: str = ""

    def __post_init__(self) -> None:
        if self.status not in TRANSPILE_STATUSES:
            raise ConfigError(f"status must be one of {TRANSPILE_STATUSES}, got {self.status!r}")

    @property
    def verified(self) -> bool:
        return self.status == "verified"

    def to_records(self, config: Optional[Mapping[str, Any]] = None) -> List[Dict[str, Any]]:
        """One report record per output function (one record when nothing parsed)."""
        isa = self.program.isa if self.program is not None else Isa.ARMV8
        names = [fn.name for fn in self.program.functions] if self.program is not None else []
        records = []
        for n, name in enumerate(names or [None]):
            repairs = [r.to_dict(isa) for r in self.repairs
                       if name is None or r.function == name or (r.function is None and n == 0)]
            records.append({
                "schema_version": REPORT_SCHEMA_VERSION,
                "input_id": self.input_id,
                "function": name,
                "status": self.status,
                "category": self.category,
                "samples_used": self.samples_used,
                "rank": self.rank,
                "repairs": repairs,
                "config": dict(config or {}),
            })
        return records
