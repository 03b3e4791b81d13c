"""
Shared process-wide setup: logging
"""
import logging
import sys

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

logger = logging.getLogger("shorttext")


def configure_logging(level="INFO", stream=None):
    """Route package logs to standard error at the given level"""
    handler = logging.StreamHandler(stream or sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))

    # Replace handlers so repeated CLI invocations in one process don't duplicate lines
    logger.handlers = [handler]
    logger.setLevel(level.upper() if isinstance(level, str) else level)
    return logger
