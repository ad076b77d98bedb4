# app/services/experiment_service.py
"""Pricing-experiment analysis on store-week labels: windows, price changes, matched-pair DiD."""

import logging

import numpy as np
import pandas as pd

from ..exceptions import EmptyResultError, InvalidParameterError, NoQualifyingWindowError, SchemaMismatchError
from ..extensions import get_config
from ..models.labels import CONTROL, EDLP, HILO
from ..models.regression import FESpec
from .regression_service import RegressionService

logger = logging.getLogger(__name__)

LABEL_COLUMNS = ('category', 'zone', 'store', 'week', 'label')
TREATMENTS = (HILO, EDLP)
REPORT_COLUMNS = ('Published', 'Replicated', 'Recovered')

DID_SPEC = FESpec(
    outcome='log_quantity',
    regressor='log_price',
    fixed_effects=('cell', 'product_period'),
    cluster_key='store',
)


def labels_frame(units, predicted, zone, category):
    """Per store-week labels of one (zone, category) matrix as a long frame."""
    frame = units[['store', 'week']].copy()
    frame.insert(0, 'zone', str(zone))
    frame.insert(0, 'category', str(category))
    frame['label'] = np.asarray(predicted, dtype=object)
    return frame.reset_index(drop=True)


def _check_labels(labels):
    for col in LABEL_COLUMNS:
        if col not in labels.columns:
            raise SchemaMismatchError(col, labels.columns)
    frame = labels[list(LABEL_COLUMNS)].copy()
    frame['week'] = frame['week'].astype(int)
    for col in ('category', 'zone', 'store'):
        frame[col] = frame[col].astype(str)
    return frame.sort_values(['category', 'store', 'week'], kind='mergesort').reset_index(drop=True)


def find_windows(labels, window=None):
    """
    Control-then-treatment runs within each store-category.

    A run qualifies when ``window`` consecutive Control weeks are followed
    immediately by ``window`` consecutive weeks of one treatment regime.
    There is at most one run per Control-to-treatment boundary.

    Returns:
        DataFrame: category, zone, store, regime, start, boundary, end
    """
    window = get_config().EXPERIMENT_WINDOW if window is None else int(window)
    if window < 1:
        raise InvalidParameterError(f"window must be >= 1, got {window}")
    frame = _check_labels(labels)

    rows = []
    for (category, store), group in frame.groupby(['category', 'store'], sort=True):
        weeks = group['week'].to_numpy()
        label = group['label'].to_numpy()
        zone = group['zone'].iloc[0]
        for b in range(window, len(weeks) - window + 1):
            if label[b] not in TREATMENTS or label[b - 1] != CONTROL:
                continue
            span = weeks[b - window:b + window]
            if span[-1] - span[0] != 2 * window - 1:
                continue
            if (label[b - window:b] == CONTROL).all() and (label[b:b + window] == label[b]).all():
                rows.append((category, zone, store, label[b], int(span[0]), int(weeks[b]), int(span[-1])))
    return pd.DataFrame(rows, columns=['category', 'zone', 'store', 'regime', 'start', 'boundary', 'end'])


def _weekly_log_price(panel, products=None):
    frame = panel.frame
    if products is not None:
        frame = frame[frame['product'].isin([str(p) for p in products])]
    log_price = np.log(frame['price'].to_numpy(dtype=float))
    return (frame.assign(log_price=log_price)
            .groupby(['category', 'store', 'week'], sort=True)['log_price'].mean())


def window_price_changes(panel, windows, products=None):
    """Mean log price over the treatment weeks minus over the Control weeks, per window."""
    weekly = _weekly_log_price(panel, products)
    changes = []
    for row in windows.itertuples(index=False):
        series = weekly.loc[(row.category, row.store)]
        before = series[(series.index >= row.start) & (series.index < row.boundary)]
        after = series[(series.index >= row.boundary) & (series.index <= row.end)]
        changes.append(after.mean() - before.mean() if len(before) and len(after) else np.nan)
    return windows.assign(change=np.asarray(changes, dtype=float))


def category_price_change(changes, category, regime):
    """Percent price change for one category and regime; raises when no run qualifies."""
    subset = changes[(changes['category'] == category) & (changes['regime'] == regime)]
    subset = subset[np.isfinite(subset['change'])]
    if subset.empty:
        raise NoQualifyingWindowError(f"No {regime} window in category {category}")
    return 100.0 * float(subset['change'].mean()), int(len(subset))


def price_change_report(panel, labels, window=None, products=None):
    """
    Mean percent price change of Hi-Lo and EDLP weeks against the preceding Control weeks.

    Categories without a qualifying window for a regime are reported as
    missing (NaN).

    Returns:
        DataFrame indexed by category with '<regime>' and '<regime> windows' columns
    """
    windows = find_windows(labels, window)
    changes = window_price_changes(panel, windows, products)
    categories = sorted(set(panel.categories) | set(labels['category'].astype(str)))

    rows = {}
    for category in categories:
        row = {}
        for regime in TREATMENTS:
            try:
                pct, count = category_price_change(changes, category, regime)
            except NoQualifyingWindowError as e:
                logger.info(f"{e}; reported as missing")
                pct, count = float('nan'), 0
            row[regime] = pct
            row[f'{regime} windows'] = count
        rows[category] = row
    report = pd.DataFrame.from_dict(rows, orient='index')
    report.index.name = 'category'
    return report


def compare_price_changes(recovered, replicated=None, published=None):
    """
    Published / Replicated / Recovered columns per regime.

    Args:
        recovered: price_change_report on predicted labels
        replicated: price_change_report on documented labels (optional)
        published: {regime: percent} reference values (optional)
    """
    columns = {}
    for regime in TREATMENTS:
        reference = (published or {}).get(regime, np.nan)
        columns[(regime, 'Published')] = pd.Series(reference, index=recovered.index, dtype=float)
        columns[(regime, 'Replicated')] = (replicated[regime].reindex(recovered.index)
                                           if replicated is not None
                                           else pd.Series(np.nan, index=recovered.index))
        columns[(regime, 'Recovered')] = recovered[regime]
    table = pd.DataFrame(columns)
    table.columns = pd.MultiIndex.from_tuples(table.columns, names=['regime', 'source'])
    return table


def match_pairs(labels, windows):
    """
    Match every experiment window to a store predicted Control over the same weeks.

    Candidates share the zone and category; the lowest store id wins.

    Returns:
        tuple: (pairs DataFrame, unmatched windows DataFrame)
    """
    frame = _check_labels(labels)
    is_control = frame.assign(control=frame['label'] == CONTROL)
    pairs, unmatched = [], []
    for row in windows.itertuples(index=False):
        span = is_control[(is_control['category'] == row.category)
                          & (is_control['zone'] == row.zone)
                          & (is_control['store'] != row.store)
                          & is_control['week'].between(row.start, row.end)]
        counts = span.groupby('store')['control'].agg(['sum', 'size'])
        full = counts[(counts['sum'] == row.end - row.start + 1) & (counts['size'] == counts['sum'])]
        if full.empty:
            unmatched.append(row._asdict())
            continue
        pairs.append({**row._asdict(), 'control_store': sorted(full.index)[0]})

    columns = list(windows.columns)
    pairs = pd.DataFrame(pairs, columns=columns + ['control_store'])
    unmatched = pd.DataFrame(unmatched, columns=columns)
    if len(unmatched):
        logger.warning(f"{len(unmatched)} of {len(windows)} experiment windows have no Control match")
    return pairs, unmatched


def did_table(panel, pairs, products=None):
    """
    Product x store-window x period cells for the matched pairs.

    Each cell holds the log of the average quantity and the log of the
    average price over the Control weeks (period 0) or the treatment weeks
    (period 1). ``cell`` is the product-unit fixed effect and
    ``product_period`` the product-pair-period one.
    """
    frame = panel.frame
    if products is not None:
        frame = frame[frame['product'].isin([str(p) for p in products])]
    frame = frame[frame['quantity'] > 0]
    indexed = frame.set_index(['category', 'store', 'week']).sort_index()

    cells = []
    for pair_id, row in enumerate(pairs.itertuples(index=False)):
        for role, store in (('treated', row.store), ('control', row.control_store)):
            try:
                rows = indexed.loc[(row.category, store, slice(row.start, row.end))].reset_index()
            except KeyError:
                continue
            rows['period'] = (rows['week'] >= row.boundary).astype(int)
            agg = rows.groupby(['product', 'period'], sort=True).agg(
                price=('price', 'mean'), quantity=('quantity', 'mean')).reset_index()
            agg['store'] = store
            agg['unit'] = f'{store}@{row.start}'
            agg['pair'] = pair_id
            agg['role'] = role
            agg['regime'] = row.regime
            agg['category'] = row.category
            cells.append(agg)
    if not cells:
        raise EmptyResultError("No matched pair has price observations")

    table = pd.concat(cells, ignore_index=True)
    table['log_price'] = np.log(table['price'])
    table['log_quantity'] = np.log(table['quantity'])
    table['cell'] = table['product'] + '|' + table['unit']
    table['product_period'] = (table['product'] + '|' + table['pair'].astype(str)
                               + '|' + table['period'].astype(str))
    return table


def did_elasticity(panel, labels, window=None, products=None):
    """
    Matched-pair difference-in-differences price elasticity.

    Returns:
        dict: result (RegressionResult), table, pairs, unmatched
    """
    windows = find_windows(labels, window)
    if windows.empty:
        raise NoQualifyingWindowError("No Control-then-treatment window in any store-category")
    pairs, unmatched = match_pairs(labels, windows)
    if pairs.empty:
        raise NoQualifyingWindowError("No experiment window could be matched to a Control store")
    table = did_table(panel, pairs, products)
    result = RegressionService.fe_regression(table, DID_SPEC)
    logger.info(f"DiD elasticity from {len(pairs)} pairs: {result.coef('beta'):.4f}")
    return {'result': result, 'table': table, 'pairs': pairs, 'unmatched': unmatched}
