"""
Exo-Mix - fit / label / select commands
"""
import click
import pandas as pd

from ..models.labels import PRICING_ORDERING, ComponentLabels, LabelRule
from ..models.mixture import MixtureFit
from ..services.labeling_service import LabelingService
from ..services.npem_service import VIOLATED, NPEMService
from ..utils.decorators import handle_errors
from ..utils.helpers import read_json, write_csv, write_json
from .common import (
    build_fit_options, finish, fit_options_flags, output_dir, read_dataset, recorded,
    resolved_params, seed_option, split_list,
)

DEFAULT_COORDS = ('X', 'W1', 'W2')


@click.command()
@click.argument('data', type=click.Path(exists=True, dir_okay=False))
@click.option('--coords', multiple=True, default=DEFAULT_COORDS, show_default=True,
              help='Coordinate columns (repeat or comma-separate).')
@click.option('--components', 'm', type=click.IntRange(min=1), default=2, show_default=True)
@fit_options_flags
@seed_option
@handle_errors
@recorded
def fit(opts, data, coords, m, **fit_flags):
    """Estimate the mixture on DATA; writes fit.json and densities.csv."""
    options = build_fit_options(fit_flags, opts['seed'], opts['threads'])
    columns = split_list(coords)
    matrix, _ = read_dataset(data, columns)
    if NPEMService.check_identifiability(m, matrix.r) == VIOLATED:
        click.echo(f"Warning: identifiability condition 2^r - 1 >= m*r + 1 fails for m={m}, "
                   f"r={matrix.r}; estimates may not be unique", err=True)
    result = NPEMService.fit(matrix, m, options)

    out = output_dir()
    fit_path = write_json(out / 'fit.json', {'config': resolved_params(), 'fit': result.to_dict()})
    curves_path = write_csv(NPEMService.density_curves(result), out / 'densities.csv')
    finish([fit_path, curves_path], {'weights': result.weights.tolist()})


def _load_fit(path):
    return MixtureFit.from_dict(read_json(path)['fit'])


@click.command()
@click.argument('fit_file', type=click.Path(exists=True, dir_okay=False))
@click.option('--rule', type=click.Choice([LabelRule.WEIGHT_ORDER, LabelRule.MOMENT_ORDER]),
              default=LabelRule.WEIGHT_ORDER, show_default=True)
@click.option('--majority', default='exogenous', show_default=True,
              help='weight_order: label of the larger-weight component.')
@click.option('--minority', default='endogenous', show_default=True)
@click.option('--ordering', multiple=True, default=PRICING_ORDERING, show_default=True,
              help='moment_order: labels from highest to lowest moment.')
@click.option('--label-coords', multiple=True, default=(),
              help='moment_order: coordinates summed for the moment (default all).')
@handle_errors
@recorded
def label(opts, fit_file, rule, majority, minority, ordering, label_coords):
    """Name the components of FIT_FILE and label every row by its argmax posterior."""
    result = _load_fit(fit_file)
    if rule == LabelRule.WEIGHT_ORDER:
        label_rule = LabelRule.weight_order(majority, minority)
    else:
        label_rule = LabelRule.moment_order(split_list(label_coords), split_list(ordering))
    labels = LabelingService.label_components(result, label_rule)
    rows = LabelingService.assign_argmax_labels(result, labels)

    out = output_dir()
    labels_path = write_json(out / 'labels.json', {
        'config': resolved_params(),
        'rule': label_rule.to_dict(),
        'labels': labels.to_dict(),
    })
    frame = pd.DataFrame({'row': range(result.n), 'label': rows})
    for j, name in enumerate(labels.assignment):
        frame[f'posterior {name}'] = result.posteriors[:, j]
    rows_path = write_csv(frame, out / 'row_labels.csv')
    finish([labels_path, rows_path])


@click.command()
@click.argument('fit_file', type=click.Path(exists=True, dir_okay=False))
@click.argument('labels_file', type=click.Path(exists=True, dir_okay=False))
@click.option('--target', default='exogenous', show_default=True)
@click.option('--p', type=float, default=0.9, show_default=True, help='Posterior threshold.')
@handle_errors
@recorded
def select(opts, fit_file, labels_file, target, p):
    """Rows whose posterior for TARGET is at least p."""
    result = _load_fit(fit_file)
    labels = ComponentLabels.from_dict(read_json(labels_file)['labels'])
    selection = LabelingService.select_subset(result, labels, target, p)

    out = output_dir()
    rows = pd.DataFrame({
        'row': selection.indices,
        'posterior': selection.target_posteriors[selection.indices],
    })
    csv_path = write_csv(rows, out / 'selection.csv')
    json_path = write_json(out / 'selection.json', {
        'config': resolved_params(),
        'selection': selection.to_dict(),
    })
    finish([csv_path, json_path], {'selected': selection.size, 'fraction': selection.fraction})
