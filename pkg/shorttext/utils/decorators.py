"""
Custom decorators for the CLI
"""
import logging
from functools import wraps

import click

from shorttext.errors import ConfigError, ShortTextError

logger = logging.getLogger(__name__)

USAGE_EXIT = 1
FAILURE_EXIT = 2


class ConfigUsageError(click.UsageError):
    """Bad flags or configuration: exit 1"""
    exit_code = USAGE_EXIT


class CommandFailed(click.ClickException):
    """Data or model problem: exit 2"""
    exit_code = FAILURE_EXIT


def cli_errors(fn):
    """
    Decorator turning package errors into click exceptions with the CLI's exit codes
    """
    @wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ConfigError as e:
            logger.debug("configuration error", exc_info=True)
            raise ConfigUsageError(str(e)) from e
        except ShortTextError as e:
            logger.debug("command failed", exc_info=True)
            raise CommandFailed(f"{type(e).__name__}: {e}") from e

    return wrapper
