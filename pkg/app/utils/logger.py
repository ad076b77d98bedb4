"""
Exo-Mix - Run Audit

Every command records what it was asked to do and what it produced, so
that a run can be repeated from its own config file.
"""
import logging
from pathlib import Path

from .helpers import write_json

logger = logging.getLogger(__name__)


def config_path(output_dir, command):
    return Path(output_dir) / f"{command}.config.json"


def audit_log(command, params, output_dir, artifacts=(), extra=None):
    """
    Write ``<command>.config.json`` and return the audit record.

    Args:
        command: subcommand name
        params: resolved parameters, nested as {command: {...}} so the
            file can be handed back through --config
        output_dir: directory receiving the record
        artifacts: paths produced by the run
        extra: additional JSON-serializable metadata
    """
    record = dict(params)
    record['_run'] = {
        'command': command,
        'artifacts': sorted(Path(a).name for a in artifacts),
        **(extra or {}),
    }
    path = write_json(config_path(output_dir, command), record)
    logger.info(f"Recorded {command} run in {path}")
    return record
