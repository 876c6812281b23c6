"""Run configuration of the command-line tool."""

from dataclasses import dataclass, field, replace
from typing import Any, Dict, Mapping, Optional, Tuple

from asm.isa import Isa
from core.constants import DEFAULT_GAMMA, DEFAULT_MAX_TOKENS, DEFAULT_TOP_K
from core.errors import ConfigError
from core.settings import Settings
from guess.models import check_norm
from pipeline.models import RECHECK_MODES, PipelineConfig
from semantics.models import Fixture, VerifierConfig
from sketch.models import SolverConfig


def _isa(value) -> Optional[Isa]:
    if value is None or isinstance(value, Isa):
        return value
    try:
        return Isa.parse(value)
    except ValueError as e:
        raise ConfigError(f"unknown ISA {value!r}") from e


@dataclass(frozen=True)
class RunConfig:
    """Everything a run depends on; echoed into every report record."""
    source_isa: Optional[Isa] = None
    target_isa: Optional[Isa] = None
    gamma: float = DEFAULT_GAMMA
    top_k: int = DEFAULT_TOP_K
    norm: str = "frobenius"
    recheck: str = "per-candidate"
    max_tokens: int = DEFAULT_MAX_TOKENS
    seed: int = 0
    oracle_cmd: Optional[str] = None
    jobs: int = 1
    fixtures: Tuple[Fixture, ...] = ()
    verifier: VerifierConfig = field(default_factory=VerifierConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self) -> None:
        object.__setattr__(self, "source_isa", _isa(self.source_isa))
        object.__setattr__(self, "target_isa", _isa(self.target_isa))
        if not 0 < self.gamma <= 1:
            raise ConfigError(f"gamma must lie in (0, 1], got {self.gamma}")
        if self.top_k < 1:
            raise ConfigError(f"top_k must be >= 1, got {self.top_k}")
        check_norm(self.norm)
        if self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs}")
        if self.recheck not in RECHECK_MODES:
            raise ConfigError(f"recheck must be one of {RECHECK_MODES}, got {self.recheck!r}")
        if self.source_isa is not None and self.source_isa is self.target_isa:
            raise ConfigError("source and target ISA are the same")

    @classmethod
    def from_dict(cls, data: Mapping) -> "RunConfig":
        known = {k: v for k, v in data.items() if k in cls.__dataclass_fields__}
        if isinstance(known.get("verifier"), Mapping):
            known["verifier"] = VerifierConfig.from_dict(known["verifier"])
        if isinstance(known.get("solver"), Mapping):
            known["solver"] = SolverConfig.from_dict(known["solver"])
        if "fixtures" in known:
            known["fixtures"] = tuple(f if isinstance(f, Fixture) else Fixture.from_dict(f)
                                      for f in known["fixtures"] or ())
        return cls(**known)

    @classmethod
    def from_settings(cls, settings: Settings) -> "RunConfig":
        """Built-in defaults overlaid with a settings file."""
        data: Dict[str, Any] = dict(settings.values)
        for name in Settings.SECTIONS:
            section = settings.section(name)
            if section:
                data[name] = section
        return cls.from_dict(data)

    def with_overrides(self, **flags) -> "RunConfig":
        """Copy with every flag that was actually given (not None) applied."""
        given = {k: v for k, v in flags.items() if v is not None}
        if "seed" in given:
            given["verifier"] = self.verifier.reseeded(given["seed"])
        return replace(self, **given)

    def pipeline(self) -> PipelineConfig:
        return PipelineConfig(self.gamma, self.top_k, self.norm, self.recheck, self.max_tokens,
                              self.solver, self.verifier)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "source_isa": self.source_isa.value if self.source_isa else None,
            "target_isa": self.target_isa.value if self.target_isa else None,
            "gamma": self.gamma,
            "top_k": self.top_k,
            "norm": self.norm,
            "recheck": self.recheck,
            "max_tokens": self.max_tokens,
            "seed": self.seed,
            "oracle_cmd": self.oracle_cmd,
            "jobs": self.jobs,
            "fixtures": [f.to_dict() for f in self.fixtures],
            "verifier": self.verifier.to_dict(),
            "solver": self.solver.to_dict(),
        }
