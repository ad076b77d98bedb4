"""
Exo-Mix - Command Decorators
"""
import logging
from functools import wraps

import click

from ..exceptions import ExoMixError

logger = logging.getLogger(__name__)

EXIT_IO = 5


def handle_errors(f):
    """Turn package errors into a stderr message and the family's exit code."""
    @wraps(f)
    def decorated_function(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except ExoMixError as e:
            logger.debug(f"{f.__name__} failed", exc_info=True)
            click.echo(f"Error: {e}", err=True)
            raise SystemExit(e.exit_code)
        except OSError as e:
            logger.debug(f"{f.__name__} failed", exc_info=True)
            click.echo(f"I/O error: {e}", err=True)
            raise SystemExit(EXIT_IO)
    return decorated_function
