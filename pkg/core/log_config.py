# core/log_config.py
import sys

from loguru import logger

from core.config import settings
from core.exceptions import UsageError

LOG_FORMAT = "<level>{level: <8}</level> | {name}:{function} - {message}"


def configure_logging(level: str | None = None) -> None:
    """Route every log record to a single stderr sink; stdout stays reserved for output."""
    logger.remove()
    try:
        logger.add(sys.stderr, level=(level or settings.LOG_LEVEL).upper(), format=LOG_FORMAT)
    except ValueError:
        logger.add(sys.stderr, level="WARNING", format=LOG_FORMAT)
        raise UsageError(f"unknown log level '{level}'") from None
