"""
Logging setup

Modules log through `logging.getLogger(__name__)`; this installs the single
stderr handler on the package logger.
"""

import logging
import sys
from typing import Optional

_HANDLER_NAME = "flatwkb-stderr"


def configure_logging(level: str = "WARNING", fmt: Optional[str] = None) -> logging.Logger:
    """
    Install a stderr handler on the `src` logger (idempotent).

    Args:
        level: Log level name
        fmt: Record format; defaults to a timestamped one-line format

    Returns:
        The configured package logger
    """
    logger = logging.getLogger("src")
    logger.setLevel(level.upper())
    if not any(h.get_name() == _HANDLER_NAME for h in logger.handlers):
        handler = logging.StreamHandler(sys.stderr)
        handler.set_name(_HANDLER_NAME)
        handler.setFormatter(
            logging.Formatter(fmt or "%(asctime)s %(levelname)s %(name)s: %(message)s")
        )
        logger.addHandler(handler)
    elif fmt:
        for h in logger.handlers:
            if h.get_name() == _HANDLER_NAME:
                h.setFormatter(logging.Formatter(fmt))
    return logger
