"""Exception hierarchy shared by every stage of the transpiler."""

from typing import Optional


class TranspileError(Exception):
    """Base class for all errors raised by transketch."""


class ConfigError(TranspileError):
    """A configuration value is outside its legal range."""


class UnparsableLine(TranspileError):
    """A source line matches no production of the assembly grammar."""

    def __init__(self, line_number: int, text: str, reason: str = "") -> None:
        self.line_number = line_number
        self.text = text
        self.reason = reason
        detail = f" ({reason})" if reason else ""
        super().__init__(f"line {line_number}: cannot parse {text.strip()!r}{detail}")


class UnsupportedInstruction(TranspileError):
    """An instruction has no executable semantics (opaque, boundary or memory)."""

    def __init__(self, mnemonic: str, reason: str = "") -> None:
        self.mnemonic = mnemonic
        super().__init__(f"unsupported instruction {mnemonic!r}" + (f": {reason}" if reason else ""))


class HoleNotConcrete(TranspileError):
    """An instruction still contains a hole where a concrete operand is needed."""

    def __init__(self, hole_id: int) -> None:
        self.hole_id = hole_id
        super().__init__(f"hole ?{hole_id} has no concrete value")


class UndefinedLabel(TranspileError):
    def __init__(self, label: str) -> None:
        self.label = label
        super().__init__(f"label {label!r} is not defined in the program")


class SchemaError(TranspileError):
    """A guess interchange record does not follow the schema."""

    def __init__(self, record_index: int, reason: str) -> None:
        self.record_index = record_index
        self.reason = reason
        super().__init__(f"record {record_index}: {reason}")


class ShapeError(SchemaError):
    """Attention dimensions disagree with the token tables."""


class EmptyPartition(TranspileError):
    """An alignment was requested over an empty span partition."""


class MutationInapplicable(TranspileError):
    """A mutation targets a construct absent from the ground-truth program."""

    def __init__(self, kind: str, reason: str = "") -> None:
        self.kind = kind
        super().__init__(f"mutation {kind!r} is not applicable" + (f": {reason}" if reason else ""))


class HoleOnMnemonic(TranspileError):
    """A flagged token is a mnemonic; carries the functional class to range over."""

    def __init__(self, position: int, mnemonic: str, domain: tuple) -> None:
        self.position = position
        self.mnemonic = mnemonic
        self.domain = domain
        super().__init__(f"token {position} ({mnemonic!r}) is a mnemonic; class {list(domain)}")


class UnalignableSpan(TranspileError):
    """The aligned input span is not a pure block and cannot act as a specification."""


class DomainExplosion(TranspileError):
    """The joint hole domain exceeds the enumeration budget."""

    def __init__(self, size: int, limit: int) -> None:
        self.size = size
        self.limit = limit
        super().__init__(f"joint hole domain of {size} assignments exceeds max_enum={limit}")


class UndecodableRequirement(TranspileError):
    """The input-side entity has no bit-vector decoding and no textual twin."""

    def __init__(self, label: Optional[str]) -> None:
        self.label = label
        super().__init__(f"required entity {label!r} cannot be decoded to a bit-vector")


class IncompleteAssignment(TranspileError):
    def __init__(self, missing: list[int]) -> None:
        self.missing = missing
        super().__init__("no value for holes " + ", ".join(f"?{h}" for h in missing))


class DuplicateFunction(TranspileError):
    def __init__(self, name: str) -> None:
        self.name = name
        super().__init__(f"function {name!r} appears more than once")


class MemoryFault(TranspileError):
    """A program touched memory outside every mapped region."""

    def __init__(self, address: int, size: int = 1) -> None:
        self.address = address
        self.size = size
        super().__init__(f"segmentation fault at 0x{address:x} ({size} bytes)")


class ExecutionError(TranspileError):
    """A program cannot run on the internal interpreter (unknown call, bad jump, step limit)."""
