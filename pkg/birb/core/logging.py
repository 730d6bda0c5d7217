"""
Centralized Logging Configuration
Uses loguru for structured, context-aware logging
"""

import sys
from pathlib import Path

from loguru import logger

from .config import settings

_configured = False


def setup_logging(level: str = None, log_file: str = None):
    """
    Configure toolkit-wide logging

    Console output goes to stderr so that JSON artifacts written to
    stdout stay machine-readable.
    """
    global _configured

    level = (level or settings.log_level).upper()
    log_file = log_file or settings.log_file

    # Remove default handler
    logger.remove()

    # Console handler with color
    logger.add(
        sys.stderr,
        format="<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | <cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - <level>{message}</level>",
        level=level,
        colorize=True,
    )

    # File handler
    if log_file:
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)

        logger.add(
            log_file,
            format="{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {name}:{function}:{line} - {message}",
            level=level,
            rotation="10 MB",
            retention="30 days",
            compression="zip",
        )

    _configured = True
    logger.debug(f"Logging configured (level={level})")
    return logger


def get_logger():
    """Get toolkit logger instance"""
    if not _configured:
        setup_logging()
    return logger
