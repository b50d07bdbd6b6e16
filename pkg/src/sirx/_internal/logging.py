"""logging setup: a single rich handler on stderr."""

from __future__ import annotations

import logging

from rich.console import Console
from rich.logging import RichHandler

_ROOT = "sirx"

stderr_console = Console(stderr=True)


def get_logger(name: str) -> logging.Logger:
    """return a logger under the `sirx` namespace."""
    if name == _ROOT or name.startswith(f"{_ROOT}."):
        return logging.getLogger(name)
    return logging.getLogger(f"{_ROOT}.{name}")


def configure_logging(level: str | int = "WARNING") -> None:
    """attach a rich handler to the `sirx` logger (idempotent).

    Args:
        level: logging level name or number
    """
    logger = logging.getLogger(_ROOT)
    if isinstance(level, str):
        level = level.upper()
    logger.setLevel(level)

    if not any(isinstance(h, RichHandler) for h in logger.handlers):
        handler = RichHandler(
            console=stderr_console,
            show_path=False,
            show_time=False,
            markup=False,
        )
        handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
        logger.addHandler(handler)
