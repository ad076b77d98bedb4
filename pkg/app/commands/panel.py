"""
Exo-Mix - panel-prep command
"""
import click

from ..exceptions import EmptyResultError, ExcessiveMissingnessError
from ..models.panel import DROP_PRODUCT, DROP_UNIT, WideMatrixSpec
from ..services import panel_service
from ..utils.decorators import handle_errors
from ..utils.helpers import write_csv, write_json
from .common import finish, output_dir, parse_schema, recorded, resolved_params, split_list


@click.command('panel-prep')
@click.argument('panel_file', type=click.Path(exists=True, dir_okay=False))
@click.option('--schema', multiple=True, default=(), help='column=NAME mapping for the panel CSV.')
@click.option('--zone', 'zones', multiple=True, default=(), help='Restrict to these zones.')
@click.option('--category', 'categories', multiple=True, default=(), help='Restrict to these categories.')
@click.option('--threshold', type=float, default=None, help='Product price-variation threshold.')
@click.option('--cap', type=int, default=None, help='Maximum coordinates per group (0 = no cap).')
@click.option('--missing-policy', type=click.Choice([DROP_UNIT, DROP_PRODUCT]), default=DROP_UNIT,
              show_default=True)
@handle_errors
@recorded
def panel_prep(opts, panel_file, schema, zones, categories, threshold, cap, missing_policy):
    """Demean log prices, pick products and write one unit x product matrix per group."""
    with open(panel_file, 'rb') as fh:
        table = panel_service.load_panel(fh, parse_schema(schema))
    demeaned = panel_service.log_demean(table)
    zones = split_list(zones) or panel_service.eligible_zones(table)
    categories = split_list(categories) or table.categories

    out = output_dir()
    artifacts = [write_csv(demeaned.frame, out / 'demeaned.csv')]
    groups = {}
    for zone, category in table.groups():
        if zone not in zones or category not in categories:
            continue
        key = f'{zone}/{category}'
        try:
            coordinates = panel_service.select_coordinates(
                demeaned.subset(zone=zone, category=category), threshold, cap)
            matrix = panel_service.to_matrix(
                demeaned, WideMatrixSpec(zone=zone, category=category, coordinates=coordinates),
                missing_policy)
        except (EmptyResultError, ExcessiveMissingnessError) as e:
            groups[key] = {'skipped': str(e)}
            continue
        frame = matrix.units.copy()
        for k, product in enumerate(matrix.products):
            frame[product] = matrix.data.values[:, k]
        artifacts.append(write_csv(frame, out / f'matrix_{zone}_{category}.csv'))
        groups[key] = {
            'products': list(matrix.products),
            'rows': matrix.data.n,
            'excluded_stores': list(matrix.excluded_stores),
            'dropped_products': list(matrix.dropped_products),
            'dropped_units': matrix.dropped_units,
            'notes': matrix.notes,
        }

    artifacts.append(write_json(out / 'panel-prep.json', {
        'config': resolved_params(),
        'missing_policy': missing_policy,
        'groups': groups,
    }))
    finish(artifacts)
