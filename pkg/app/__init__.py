"""
Exo-Mix - Application Factory

Recovering exogenous variation from a mixture-distributed regressor:
estimate the mixture nonparametrically, label its components, keep the
observations that most likely come from the exogenous component and run the
second-stage regression on them.
"""
import logging
import sys

from .config import config
from .exceptions import InvalidParameterError
from .extensions import state


def create_app(config_name='default'):
    """Resolve the configuration and set up logging.

    Returns the active configuration class; services read their defaults
    from it through ``app.extensions.get_config``.
    """
    if config_name not in config:
        raise InvalidParameterError(
            f"Unknown config '{config_name}' (choose from {', '.join(sorted(config))})"
        )
    cfg = config[config_name]
    state.init_app(cfg)
    configure_logging(cfg)
    return cfg


def configure_logging(cfg):
    """Attach a single stderr handler to the package logger."""
    logger = logging.getLogger(__name__)
    logger.setLevel(getattr(logging, str(cfg.LOG_LEVEL).upper(), logging.INFO))

    if not any(getattr(h, '_exomix', False) for h in logger.handlers):
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(cfg.LOG_FORMAT))
        handler._exomix = True
        logger.addHandler(handler)
    return logger
