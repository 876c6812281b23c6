"""Core components shared by every package: constants, errors and settings."""

from .constants import APP_DIR, APP_NAME, CONFIG_PATH, REPORT_SCHEMA_VERSION
from .errors import ConfigError, TranspileError
from .settings import Settings, ensure_dir, read_json, write_json

__all__ = [
    'APP_NAME',
    'APP_DIR',
    'CONFIG_PATH',
    'REPORT_SCHEMA_VERSION',
    'ConfigError',
    'TranspileError',
    'Settings',
    'ensure_dir',
    'read_json',
    'write_json',
]
