"""
Logging utility for the scaling planner.

Reports and JSON payloads own stdout; every log record goes to stderr.
"""

import logging
import sys
from typing import Optional

HANDLER_NAME = "scaling-planner-stderr"
DEFAULT_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def _stderr_handler(logger: logging.Logger) -> logging.Handler:
    for handler in logger.handlers:
        if handler.get_name() == HANDLER_NAME:
            return handler
    handler = logging.StreamHandler(sys.stderr)
    handler.set_name(HANDLER_NAME)
    logger.addHandler(handler)
    return handler


def setup_logger(
        name: str, level: int = logging.WARNING, format_string: Optional[str] = None
) -> logging.Logger:
    """
    Route ``name`` and its children to stderr at ``level``.

    Repeated calls reuse one handler: it is re-levelled and re-pointed at the
    current ``sys.stderr``. The format is applied when given, or on first setup.

    Args:
        name: Logger name (``src`` for the whole package)
        level: Logging level
        format_string: Custom format string

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)
    logger.setLevel(level)

    handler = _stderr_handler(logger)
    handler.setLevel(level)
    # The previous stream may already be closed, so it is swapped without a flush.
    handler.stream = sys.stderr
    if format_string is not None or handler.formatter is None:
        handler.setFormatter(logging.Formatter(format_string or DEFAULT_FORMAT))

    return logger
