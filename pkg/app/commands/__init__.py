"""
Exo-Mix - Command Line Interface

Subcommands: simulate, fit, label, select, regress, pipeline, panel-prep.
Global options go before the subcommand; ``--config`` takes a JSON file
written by an earlier run (or by hand) whose values act as defaults.
"""
import logging

import click

from .. import create_app
from ..config import config as _configs
from .common import load_config_file

LOG_LEVELS = ('DEBUG', 'INFO', 'WARNING', 'ERROR')


@click.group(context_settings={'help_option_names': ['-h', '--help']})
@click.option('--config', 'config_file', type=click.Path(exists=True, dir_okay=False),
              is_eager=True, expose_value=True, callback=load_config_file,
              help='JSON file of default option values.')
@click.option('--seed', type=int, default=0, show_default=True, help='Master random seed.')
@click.option('--threads', type=click.IntRange(min=1), default=None,
              help='Worker cap for restarts and bootstrap replicates.')
@click.option('--output', type=click.Path(file_okay=False), default=None,
              help='Output directory (default from EXOMIX_OUTPUT_DIR).')
@click.option('--log-level', type=click.Choice(LOG_LEVELS, case_sensitive=False), default=None)
@click.option('--env', type=click.Choice(sorted(_configs)), default='default', show_default=True,
              help='Configuration profile.')
@click.pass_context
def cli(ctx, config_file, seed, threads, output, log_level, env):
    """Recover exogenous variation from mixture-distributed regressors."""
    cfg = create_app(env)
    if log_level:
        logging.getLogger('app').setLevel(log_level.upper())
    ctx.obj = {
        'seed': seed,
        'threads': threads if threads is not None else cfg.THREADS,
        'output': output,
        'config': cfg,
    }


def register_commands(group):
    from .simulate import simulate
    from .estimate import fit, label, select
    from .regress import regress
    from .pipeline import pipeline
    from .panel import panel_prep

    for command in (simulate, fit, label, select, regress, pipeline, panel_prep):
        group.add_command(command)
    return group


register_commands(cli)

__all__ = ['cli']
