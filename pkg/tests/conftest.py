import os
import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))
TESTS = Path(__file__).resolve().parent
if str(TESTS) not in sys.path:
    sys.path.insert(0, str(TESTS))

from helpers import CORPUS, load_pair  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running property runs (TRANSKETCH_FULL=1 widens them)")


@pytest.fixture
def corpus_dir() -> Path:
    return CORPUS


@pytest.fixture
def add_const():
    """(ARMv8 program, RISC-V program) of the add_const pair."""
    return load_pair("add_const")


@pytest.fixture
def full_run() -> bool:
    return os.environ.get("TRANSKETCH_FULL") == "1"


@pytest.fixture
def no_user_config(tmp_path):
    """Path of a config file that does not exist, so runs use the built-in defaults."""
    return tmp_path / "absent-config.json"
