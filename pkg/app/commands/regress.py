"""
Exo-Mix - regress command
"""
import click
import numpy as np

from ..models.labels import SelectionResult
from ..models.regression import FESpec
from ..services.regression_service import RegressionService
from ..utils.decorators import handle_errors
from ..utils.helpers import regression_table, write_json, write_text
from .common import finish, output_dir, read_dataset, read_frame, recorded, require_columns, resolved_params, split_list


@click.command()
@click.argument('data', type=click.Path(exists=True, dir_okay=False))
@click.option('--y', 'outcome', default='Y', show_default=True, help='Outcome column.')
@click.option('--x', 'regressor', default='X', show_default=True, help='Regressor column.')
@click.option('--selection', 'selection_file', type=click.Path(exists=True, dir_okay=False),
              default=None, help='selection.csv from the select command.')
@click.option('--no-intercept', is_flag=True)
@click.option('--fe', 'fixed_effects', multiple=True, default=(),
              help='Fixed-effect columns; switches to the within estimator.')
@click.option('--cluster', 'cluster_key', default=None, help='Cluster column for FE standard errors.')
@handle_errors
@recorded
def regress(opts, data, outcome, regressor, selection_file, no_intercept, fixed_effects, cluster_key):
    """OLS of the outcome on one regressor (optionally on a selected subset, or with fixed effects)."""
    fixed_effects = split_list(fixed_effects)
    out = output_dir()
    columns = {}

    if fixed_effects:
        frame = read_frame(data)
        spec = FESpec(outcome=outcome, regressor=regressor, fixed_effects=fixed_effects,
                      cluster_key=cluster_key or fixed_effects[0])
        require_columns(frame, [outcome, regressor])
        columns['Fixed effects'] = RegressionService.fe_regression(frame, spec)
        names = ('beta',)
    else:
        matrix, _ = read_dataset(data, [outcome, regressor])
        y, x = matrix.column(outcome), matrix.column(regressor)
        intercept = not no_intercept
        columns['Full sample'] = RegressionService.ols(y, x, intercept=intercept)
        if selection_file:
            rows = read_frame(selection_file)
            require_columns(rows, ['row'])
            indices = rows['row'].to_numpy(dtype=int)
            selection = SelectionResult(indices=indices, threshold=float('nan'), target='selected',
                                        target_posteriors=np.ones(matrix.n))
            columns['Selected'] = RegressionService.ols_on_subset(y, x, selection, intercept=intercept)
        names = ('beta', 'alpha') if intercept else ('beta',)

    table = regression_table(columns, names=names)
    txt_path = write_text(out / 'regress.txt', table)
    json_path = write_json(out / 'regress.json', {
        'config': resolved_params(),
        'results': {title: result.to_dict() for title, result in columns.items()},
    })
    click.echo(table, nl=False)
    finish([json_path, txt_path])
