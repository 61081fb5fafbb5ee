"""
Structured logging for the library and the command line.

Records are rendered by structlog and handed to the stdlib root logger, which
writes them to stderr. Stdout is left to tables and reports.
"""

import logging
import os
import sys
from typing import Any, Dict, List, Optional

import numpy as np
import structlog

from .. import __version__


def _plain(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def numpy_to_builtin(logger: Any, method_name: str, event_dict: Dict[str, Any]) -> Dict[str, Any]:
    """Turn numpy scalars and arrays in event fields into JSON-native values."""
    return {key: _plain(value) for key, value in event_dict.items()}


def _processors(json_format: bool) -> List[Any]:
    renderer = (structlog.processors.JSONRenderer(sort_keys=True) if json_format
                else structlog.dev.ConsoleRenderer(colors=False))
    return [
        structlog.contextvars.merge_contextvars,
        structlog.stdlib.filter_by_level,
        structlog.stdlib.add_logger_name,
        structlog.stdlib.add_log_level,
        structlog.stdlib.PositionalArgumentsFormatter(),
        structlog.processors.TimeStamper(fmt="iso"),
        structlog.processors.StackInfoRenderer(),
        structlog.processors.format_exc_info,
        numpy_to_builtin,
        renderer,
    ]


def setup_logging(service_name: str = "innloops", level: str = "INFO",
                  json_format: bool = True, environment: Optional[str] = None) -> None:
    """Configure structlog and route its output to stderr at ``level``."""
    structlog.configure(
        processors=_processors(json_format),
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )
    logging.basicConfig(format="%(message)s", stream=sys.stderr,
                        level=logging.getLevelName(level.upper()), force=True)

    structlog.contextvars.clear_contextvars()
    structlog.contextvars.bind_contextvars(
        service=service_name,
        environment=environment or os.getenv("ENVIRONMENT", "development"),
        version=__version__,
    )


def get_logger(name: Optional[str] = None) -> structlog.BoundLogger:
    return structlog.get_logger(name)


class LoggerMixin:
    """Gives instances a ``logger`` named after their class."""

    @property
    def logger(self) -> structlog.BoundLogger:
        return get_logger(type(self).__name__)


def log_table_call(func_name: str, order: int, **kwargs: Any) -> Dict[str, Any]:
    """Fields logged on entry to an operation over a table of the given order."""
    return {"function": func_name, "order": order, "parameters": kwargs}
