"""
Exo-Mix - Shared command plumbing
"""
import json
from functools import wraps
from pathlib import Path

import click
import numpy as np
import pandas as pd

from ..exceptions import InvalidParameterError, ParseError, SchemaMismatchError
from ..extensions import get_config
from ..models.density import BandwidthRule
from ..models.mixture import DataMatrix, FitOptions
from ..utils.logger import audit_log


def load_config_file(ctx, param, value):
    """Eager --config callback: the JSON file becomes click's default_map."""
    if value is None:
        return value
    try:
        with open(value, encoding='utf-8') as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as e:
        raise click.BadParameter(f"{value} is not valid JSON: {e}")
    if not isinstance(payload, dict):
        raise click.BadParameter(f"{value} must hold a JSON object")
    payload = {k: v for k, v in payload.items() if not k.startswith('_')}
    ctx.default_map = {**(ctx.default_map or {}), **payload}
    return value


def split_list(value):
    """'a,b,c' (or a tuple of such strings) -> ['a', 'b', 'c']."""
    if value is None:
        return []
    items = value if isinstance(value, (list, tuple)) else [value]
    return [part.strip() for item in items for part in str(item).split(',') if part.strip()]


def parse_schema(pairs):
    """('price=PRICE', ...) -> {'price': 'PRICE'}."""
    schema = {}
    for pair in split_list(pairs):
        if '=' not in pair:
            raise InvalidParameterError(f"Schema entries must look like column=NAME, got '{pair}'")
        target, source = pair.split('=', 1)
        schema[target.strip()] = source.strip()
    return schema


def fit_options_flags(f):
    """npEM option flags shared by fit and pipeline commands."""
    flags = [
        click.option('--max-iterations', type=int, default=None, help='EM iteration cap.'),
        click.option('--tolerance', type=float, default=None, help='Convergence tolerance.'),
        click.option('--restarts', type=int, default=None, help='Independent restarts.'),
        click.option('--init', type=click.Choice([FitOptions.INIT_KMEANS, FitOptions.INIT_RANDOM]),
                     default=None, help='Initialization of the first posteriors.'),
        click.option('--bandwidth', default='silverman', show_default=True,
                     help="'silverman' or a fixed positive bandwidth."),
        click.option('--adaptive-bandwidth/--fixed-bandwidth', default=False,
                     help='Per-component weighted Silverman bandwidths in the kernel step.'),
        click.option('--histogram-bins', default=None,
                     help="EM bins per coordinate: a numpy rule ('auto', 'fd', ...) or a count."),
    ]
    for flag in reversed(flags):
        f = flag(f)
    return f


def build_fit_options(params, seed, threads):
    return FitOptions(
        max_iterations=params.get('max_iterations'),
        tolerance=params.get('tolerance'),
        restarts=params.get('restarts'),
        init=params.get('init'),
        seed=seed,
        bandwidth_rule=BandwidthRule.parse(params.get('bandwidth') or 'silverman'),
        adaptive_bandwidth=bool(params.get('adaptive_bandwidth')),
        threads=threads,
        histogram_bins=params.get('histogram_bins'),
    )


def read_frame(path):
    return pd.read_csv(path, encoding='utf-8')


def require_columns(frame, columns):
    for col in columns:
        if col not in frame.columns:
            raise SchemaMismatchError(col, frame.columns)


def read_dataset(path, columns):
    """Numeric columns of a CSV as a DataMatrix."""
    frame = read_frame(path)
    require_columns(frame, columns)
    values = frame[list(columns)].apply(pd.to_numeric, errors='coerce')
    bad = values.isna().any(axis=1)
    if bad.any():
        column = values.columns[values.isna().any()].tolist()[0]
        raise ParseError(column, (np.flatnonzero(bad.to_numpy()) + 2).tolist())
    return DataMatrix(values.to_numpy(dtype=float), tuple(columns)), frame


def output_dir():
    ctx = click.get_current_context()
    root = ctx.find_root()
    path = Path(root.obj['output'] or get_config().OUTPUT_DIR)
    path.mkdir(parents=True, exist_ok=True)
    return path


def command_name(ctx=None):
    """'fit', 'simulate-uniform', ... (root group excluded)."""
    ctx = ctx or click.get_current_context()
    names = []
    while ctx.parent is not None:
        names.append(ctx.info_name)
        ctx = ctx.parent
    return '-'.join(reversed(names))


def resolved_params(ctx=None):
    """Global options plus this command's parameters, nested like the --config file."""
    ctx = ctx or click.get_current_context()
    chain = []
    node = ctx
    while node.parent is not None:
        chain.append(node)
        node = node.parent
    root = node
    record = {k: _plain(v) for k, v in root.params.items() if k != 'config_file'}
    cursor = record
    for node in reversed(chain):
        cursor = cursor.setdefault(node.info_name, {})
        cursor.update({k: _plain(v) for k, v in node.params.items()})
    return record


def _plain(value):
    if isinstance(value, tuple):
        return [_plain(v) for v in value]
    if isinstance(value, Path):
        return str(value)
    return value


def global_options():
    return click.get_current_context().find_root().obj


def finish(artifacts, extra=None):
    """Write the run record next to the artifacts and list what was produced."""
    name = command_name()
    audit_log(name, resolved_params(), output_dir(), artifacts, extra)
    for path in artifacts:
        click.echo(str(path))


def seed_option(f):
    """--seed on a subcommand; overrides the global --seed for that command."""
    return click.option('--seed', type=int, default=None,
                        help='Random seed (overrides the global --seed).')(f)


def recorded(f):
    """Pass the resolved global options into the command as ``opts``."""
    @wraps(f)
    def decorated_function(*args, **kwargs):
        opts = dict(global_options())
        seed = kwargs.pop('seed', None)
        if seed is not None:
            opts['seed'] = seed
        return f(opts, *args, **kwargs)
    return decorated_function
