"""Logging configuration for the eddy-current LSM toolkit."""

import sys
from pathlib import Path
from typing import Any, Optional

from loguru import logger

from eddy_lsm.config.settings import settings

CONSOLE_FORMAT = "{level}: {message}"


def setup_logging(
    level: Optional[str] = None,
    log_file: Optional[Path] = None,
    sink: Any = None,
    console_format: Optional[str] = None,
) -> None:
    """Replace all loguru sinks with a console sink and an optional file sink.

    Args:
        level: Log level (DEBUG, INFO, WARNING, ERROR), settings default if None
        log_file: Rotating, gz-compressed log file; no file sink if None
        sink: Console sink, ``sys.stderr`` if None
        console_format: Console format, the settings format if None
    """
    logger.remove()
    level = level or settings.logging.level

    logger.add(
        sink or sys.stderr,
        level=level,
        format=console_format or settings.logging.format,
        colorize=sink is None,
        backtrace=True,
        diagnose=False,
    )

    if log_file is not None:
        log_file = Path(log_file)
        log_file.parent.mkdir(parents=True, exist_ok=True)
        logger.add(
            str(log_file),
            level=level,
            format=settings.logging.format,
            rotation=settings.logging.rotation,
            retention=settings.logging.retention,
            compression="gz",
            backtrace=True,
            diagnose=False,
        )

    logger.debug(f"Logging configured: level={level}, log_file={log_file}")
