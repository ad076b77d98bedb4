"""
Exo-Mix - pipeline commands
"""
import click
import pandas as pd

from ..jobs.pipeline_job import did_summary, group_summary, run_panel_pipeline, run_subset_pipeline
from ..models.labels import ENDOGENOUS, EXOGENOUS, LabelRule
from ..models.panel import DROP_PRODUCT, DROP_UNIT
from ..services import panel_service
from ..services.labeling_service import LabelingService
from ..utils.decorators import handle_errors
from ..utils.helpers import format_coefficient, write_csv, write_json, write_text
from .common import (
    build_fit_options, finish, fit_options_flags, output_dir, read_dataset, parse_schema, read_frame,
    recorded, require_columns, resolved_params, seed_option, split_list,
)
from .estimate import DEFAULT_COORDS


@click.group()
def pipeline():
    """Run the full estimation pipeline."""


@pipeline.command('subset')
@click.argument('data', type=click.Path(exists=True, dir_okay=False))
@click.option('--y', 'outcome', default='Y', show_default=True)
@click.option('--x', 'regressor', default='X', show_default=True)
@click.option('--coords', multiple=True, default=DEFAULT_COORDS, show_default=True)
@click.option('--components', 'm', type=click.IntRange(min=2), default=2, show_default=True)
@click.option('--rule', type=click.Choice([LabelRule.MOMENT_ORDER, LabelRule.WEIGHT_ORDER]),
              default=LabelRule.MOMENT_ORDER, show_default=True)
@click.option('--ordering', multiple=True, default=(EXOGENOUS, ENDOGENOUS), show_default=True,
              help='moment_order: labels from highest to lowest moment.')
@click.option('--label-coords', multiple=True, default=(),
              help='moment_order: coordinates summed for the moment (default the regressor).')
@click.option('--majority', default=EXOGENOUS, show_default=True,
              help='weight_order: label of the larger-weight component.')
@click.option('--minority', default=ENDOGENOUS, show_default=True)
@click.option('--target', default=EXOGENOUS, show_default=True)
@click.option('--p', type=float, default=0.9, show_default=True)
@click.option('--bootstrap', 'replicates', type=int, default=None,
              help='Full-pipeline bootstrap replicates (at least 50).')
@fit_options_flags
@seed_option
@handle_errors
@recorded
def subset(opts, data, outcome, regressor, coords, m, rule, ordering, label_coords, majority, minority,
           target, p, replicates, **fit_flags):
    """Fit, label, keep rows with posterior >= p and regress OUTCOME on the regressor."""
    options = build_fit_options(fit_flags, opts['seed'], opts['threads'])
    columns = split_list(coords)
    matrix, frame = read_dataset(data, columns)
    require_columns(frame, [outcome])
    y = pd.to_numeric(frame[outcome], errors='raise').to_numpy(dtype=float)
    if rule == LabelRule.WEIGHT_ORDER:
        rule = LabelRule.weight_order(majority, minority)
    else:
        rule = LabelRule.moment_order(split_list(label_coords) or [regressor], split_list(ordering))
        for column in rule.coordinates:
            matrix.column_index(column)

    run = run_subset_pipeline(matrix, y, m=m, p=p, rule=rule, target=target, options=options,
                              regressor=regressor, bootstrap=replicates, threads=opts['threads'])

    out = output_dir()
    coef, se = format_coefficient(run['subset'])
    txt_path = write_text(out / 'pipeline.txt', run['table'])
    json_path = write_json(out / 'pipeline.json', {
        'config': resolved_params(),
        'fit_options': options.to_dict(),
        'weights': run['fit'].weights.tolist(),
        'rule': rule.to_dict(),
        'labels': run['labels'].to_dict(),
        'selected': run['selection'].size,
        'fraction': run['selection'].fraction,
        'full': run['full'].to_dict(),
        'subset': run['subset'].to_dict(),
        'bootstrap': run['bootstrap'].to_dict() if run['bootstrap'] else None,
        'summary': f"{coef} {se}",
    })
    click.echo(run['table'], nl=False)
    finish([json_path, txt_path])


@pipeline.command('panel')
@click.argument('panel_file', type=click.Path(exists=True, dir_okay=False))
@click.option('--truth', 'truth_file', type=click.Path(exists=True, dir_okay=False), default=None,
              help='Documented regimes: category, zone, store, week, regime.')
@click.option('--schema', multiple=True, default=(), help='column=NAME mapping for the panel CSV.')
@click.option('--threshold', type=float, default=None, help='Product price-variation threshold.')
@click.option('--cap', type=int, default=None, help='Maximum coordinates per group (0 = no cap).')
@click.option('--window', type=int, default=None, help='Weeks before and after a regime change.')
@click.option('--missing-policy', type=click.Choice([DROP_UNIT, DROP_PRODUCT]), default=DROP_UNIT,
              show_default=True)
@fit_options_flags
@seed_option
@handle_errors
@recorded
def panel(opts, panel_file, truth_file, schema, threshold, cap, window, missing_policy, **fit_flags):
    """Label store-weeks by pricing regime and report accuracy, price changes and elasticity."""
    options = build_fit_options(fit_flags, opts['seed'], opts['threads'])
    with open(panel_file, 'rb') as fh:
        table = panel_service.load_panel(fh, parse_schema(schema))
    truth = None
    if truth_file:
        truth = read_frame(truth_file)
        require_columns(truth, ['category', 'zone', 'store', 'week', 'regime'])
        truth = truth.astype({'category': str, 'zone': str, 'store': str, 'week': int})

    run = run_panel_pipeline(table, truth=truth, options=options, threshold=threshold, cap=cap,
                             window=window, missing_policy=missing_policy)

    out = output_dir()
    artifacts = [
        write_csv(run['labels'], out / 'store_week_labels.csv'),
        write_csv(group_summary(run['groups']), out / 'groups.csv'),
        write_csv(_flatten(run['price_change']), out / 'price_change.csv', index=True),
    ]
    if run['accuracy'] is not None:
        artifacts.append(write_csv(LabelingService.accuracy_table(run['accuracy']), out / 'accuracy.csv'))
    did_text = did_summary(run['did'], run['did_documented'])
    if did_text:
        artifacts.append(write_text(out / 'did.txt', did_text))
    artifacts.append(write_json(out / 'pipeline-panel.json', {
        'config': resolved_params(),
        'fit_options': options.to_dict(),
        'groups': {f'{z}/{c}': {'coordinates': list(g['coordinates']),
                                'labels': g['labels'].to_dict(),
                                'weights': g['fit'].weights.tolist()}
                   for (z, c), g in sorted(run['groups'].items())},
        'accuracy': run['accuracy'],
        'did': _did_dict(run['did']),
        'did_documented': _did_dict(run['did_documented']),
        'notes': run['notes'],
    }))
    finish(artifacts)


def _flatten(table):
    flat = table.copy()
    flat.columns = [f'{regime} {source}' for regime, source in flat.columns]
    return flat


def _did_dict(did):
    if did is None:
        return None
    return {
        'result': did['result'].to_dict(),
        'pairs': len(did['pairs']),
        'unmatched': len(did['unmatched']),
        'cells': len(did['table']),
    }
