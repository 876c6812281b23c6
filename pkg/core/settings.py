"""User defaults file and the small JSON helpers the reports share."""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional

from core.constants import CONFIG_PATH

logger = logging.getLogger(__name__)


def ensure_dir(directory: Path) -> None:
    """Create a directory and its parents if needed."""
    directory.mkdir(parents=True, exist_ok=True)


def read_json(path: Path, default: Any) -> Any:
    """Load JSON from a file; missing or malformed files yield default."""
    try:
        with path.open(encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        return default
    except (OSError, ValueError) as exc:
        logger.warning("ignoring unreadable JSON file %s: %s", path, exc)
        return default


def write_json(path: Path, data: Any) -> None:
    """Replace a JSON file through a sibling temp file."""
    ensure_dir(path.parent)
    staged = path.with_name(path.name + ".part")
    staged.write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")
    staged.replace(path)


class Settings:
    """User defaults layered under the command-line flags.

    The file holds a flat mapping of RunConfig field names to values, plus optional
    "verifier" and "solver" sub-mappings. Unknown keys are ignored.
    """

    SECTIONS = ("verifier", "solver")

    def __init__(self, path: Optional[Path] = None) -> None:
        self.path = path or CONFIG_PATH
        data = read_json(self.path, {})
        if not isinstance(data, dict):
            logger.warning("config file %s is not a mapping; using defaults", self.path)
            data = {}
        self.values: Dict[str, Any] = {k: v for k, v in data.items() if k not in self.SECTIONS}
        self.sections: Dict[str, Dict[str, Any]] = {}
        for name in self.SECTIONS:
            section = data.get(name, {})
            self.sections[name] = section if isinstance(section, dict) else {}

    def section(self, name: str) -> Dict[str, Any]:
        return dict(self.sections.get(name, {}))
