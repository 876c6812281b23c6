"""Helpers for turning raw process output into comparable text."""


def looks_binary(data: bytes) -> bool:
    """Heuristic: NUL bytes or invalid UTF-8 mean the output is not text."""
    if b"\x00" in data:
        return True
    try:
        data.decode("utf-8")
        return False
    except UnicodeDecodeError:
        return True


def decode_output(data: bytes) -> str:
    """Decode captured stdout, tolerating errors."""
    return data.decode("utf-8", errors="replace")


def quote_literal(data: bytes) -> str:
    return data.decode("latin-1").encode("unicode_escape").decode("ascii")
