"""
Shared utilities: logging, settings, errors, schemas and persistence.
"""

from .errors import InnLoopsError
from .logging_config import LoggerMixin, get_logger, setup_logging
from .models import *
from .settings import Settings, get_settings
from .store import LoopStore, dump_json, write_json

__all__ = [
    "InnLoopsError",
    "LoggerMixin",
    "LoopStore",
    "Settings",
    "dump_json",
    "get_logger",
    "get_settings",
    "setup_logging",
    "write_json",
]
