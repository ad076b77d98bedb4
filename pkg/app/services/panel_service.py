# app/services/panel_service.py
"""Panel ingestion and preprocessing: CSV loading, log demeaning, product filter, wide matrices."""

import io
import logging

import numpy as np
import pandas as pd

from ..exceptions import (
    EmptyResultError, ExcessiveMissingnessError, InvalidParameterError, ParseError,
    SchemaMismatchError,
)
from ..extensions import get_config
from ..models.mixture import DataMatrix
from ..models.panel import (
    DROP_PRODUCT, DROP_UNIT, PANEL_COLUMNS, UNIT_KEY, PanelTable, WideMatrix,
)

logger = logging.getLogger(__name__)

DEMEAN_GROUP = ('zone', 'week', 'product')


def load_panel(source, schema=None):
    """
    Read a long-format panel CSV.

    Args:
        source: path, text/byte stream or raw bytes (UTF-8, header row)
        schema: optional {panel column: CSV column} mapping

    Returns:
        PanelTable
    """
    if isinstance(source, (bytes, bytearray)):
        source = io.BytesIO(source)
    frame = pd.read_csv(source, dtype=str, keep_default_na=False, encoding='utf-8')
    mapping = {col: col for col in PANEL_COLUMNS}
    mapping.update(schema or {})

    renamed = {}
    for target, column in mapping.items():
        if column not in frame.columns:
            raise SchemaMismatchError(column, frame.columns)
        renamed[target] = frame[column].str.strip()
    frame = pd.DataFrame(renamed)

    # header is line 1
    for column in ('week', 'price', 'quantity'):
        parsed = pd.to_numeric(frame[column], errors='coerce')
        bad = parsed.isna() & ~((column == 'quantity') & (frame[column] == ''))
        if bad.any():
            raise ParseError(column, (frame.index[bad] + 2).tolist())
        frame[column] = parsed
    if (frame['week'] != frame['week'].round()).any():
        bad = frame.index[frame['week'] != frame['week'].round()]
        raise ParseError('week', (bad + 2).tolist())

    table = PanelTable(frame)
    logger.info(f"Loaded panel: {len(table)} rows, {len(table.categories)} categories, "
                f"{len(table.zones)} zones")
    return table


def log_demean(panel, group=DEMEAN_GROUP):
    """
    Add ``log_price`` and the demeaned ``x`` = log(price) - group mean of log(price).

    Always recomputed from the price column, so it is idempotent.
    """
    frame = panel.frame.copy()
    group = list(group)
    for col in group:
        if col not in frame.columns:
            raise SchemaMismatchError(col, frame.columns)
    frame['log_price'] = np.log(frame['price'].to_numpy(dtype=float))
    frame['x'] = frame['log_price'] - frame.groupby(group, sort=False)['log_price'].transform('mean')
    return panel.with_frame(frame)


def product_variation(panel, window=None):
    """Per product: max over zone-weeks of (max - min) / min price across stores."""
    frame = panel.frame
    if window is not None:
        lo, hi = window
        frame = frame[frame['week'].between(lo, hi)]
    cells = frame.groupby(['zone', 'week', 'product'], sort=True)['price'].agg(['max', 'min'])
    spread = (cells['max'] - cells['min']) / cells['min']
    return spread.groupby(level='product').max()


def filter_products(panel, threshold=None, window=None):
    """
    Products whose maximum cross-store price gap within a zone-week exceeds ``threshold``.

    Returns:
        list of products ordered by descending price variation
    """
    threshold = get_config().PRODUCT_THRESHOLD if threshold is None else float(threshold)
    if not 0.0 < threshold < 1.0:
        raise InvalidParameterError(f"threshold must lie in (0, 1), got {threshold}")
    variation = product_variation(panel, window)
    kept = variation[variation > threshold]
    if kept.empty:
        raise EmptyResultError(f"No product varies by more than {threshold:.1%} within a zone-week")
    order = sorted(kept.index, key=lambda p: (-kept[p], str(p)))
    return [str(p) for p in order]


def select_coordinates(panel, threshold=None, cap=None, window=None):
    """filter_products capped at ``cap`` products (None or 0 = no cap)."""
    products = filter_products(panel, threshold, window)
    cap = get_config().COORDINATE_CAP if cap is None else int(cap)
    if cap and len(products) > cap:
        logger.info(f"Capping coordinates at {cap} of {len(products)} qualifying products")
        products = products[:cap]
    return products


def to_matrix(panel, spec, missing_policy=DROP_UNIT, max_missing_share=None):
    """
    One row per (store, week) and one column per product of ``spec``.

    Stores with no purchase in more than ``max_missing_share`` of the
    group's weeks are excluded. Remaining gaps are resolved by dropping
    units (rows) or products (columns).

    Returns:
        WideMatrix
    """
    if missing_policy not in (DROP_UNIT, DROP_PRODUCT):
        raise InvalidParameterError(f"Unknown missing policy '{missing_policy}'")
    max_missing_share = (get_config().MISSING_WEEK_SHARE if max_missing_share is None
                         else float(max_missing_share))
    group = panel.subset(zone=spec.zone, category=spec.category).frame
    if spec.value_column not in group.columns:
        raise SchemaMismatchError(spec.value_column, group.columns)
    if group.empty:
        raise EmptyResultError(f"No rows for zone {spec.zone}, category {spec.category}")

    notes = []
    all_weeks = np.sort(group['week'].unique())
    purchased = group[group['quantity'].fillna(0) > 0].groupby('store')['week'].nunique()
    share_missing = 1.0 - purchased.reindex(sorted(group['store'].unique()), fill_value=0) / all_weeks.size
    excluded = sorted(share_missing.index[share_missing > max_missing_share])
    for store in excluded:
        msg = (f"Excluded store {store} (zone {spec.zone}, category {spec.category}): "
               f"no purchase in {share_missing[store]:.0%} of weeks")
        logger.warning(msg)
        notes.append(msg)
    group = group[~group['store'].isin(excluded)]
    if group.empty:
        raise ExcessiveMissingnessError(
            f"Every store in zone {spec.zone}, category {spec.category} misses more than "
            f"{max_missing_share:.0%} of weeks"
        )

    wide = (group[group['product'].isin(spec.coordinates)]
            .pivot_table(index=list(UNIT_KEY), columns='product', values=spec.value_column,
                         aggfunc='first'))
    units = group[list(UNIT_KEY)].drop_duplicates().sort_values(list(UNIT_KEY), kind='mergesort')
    wide = wide.reindex(index=pd.MultiIndex.from_frame(units), columns=list(spec.coordinates))

    dropped_products, dropped_units = (), 0
    if missing_policy == DROP_PRODUCT:
        sparse = [p for p in wide.columns if wide[p].isna().any()]
        dropped_products = tuple(sparse)
        wide = wide.drop(columns=sparse)
        if sparse:
            notes.append(f"Dropped products with missing cells: {', '.join(sparse)}")
    else:
        complete = wide.notna().all(axis=1)
        dropped_units = int((~complete).sum())
        wide = wide[complete]
        if dropped_units:
            notes.append(f"Dropped {dropped_units} store-weeks with missing prices")

    if wide.shape[0] == 0 or wide.shape[1] == 0:
        raise EmptyResultError(f"Nothing left after resolving missing cells for zone {spec.zone}, "
                               f"category {spec.category}")

    unit_frame = wide.index.to_frame(index=False)
    unit_frame['store'] = unit_frame['store'].astype(str)
    unit_frame['week'] = unit_frame['week'].astype(int)
    return WideMatrix(
        data=DataMatrix(wide.to_numpy(dtype=float), tuple(str(c) for c in wide.columns)),
        units=unit_frame,
        products=tuple(str(c) for c in wide.columns),
        excluded_stores=tuple(excluded),
        dropped_products=dropped_products,
        dropped_units=dropped_units,
        notes=notes,
    )


def eligible_zones(panel, min_stores=None):
    """Zones with at least ``min_stores`` stores."""
    min_stores = get_config().MIN_STORES_PER_ZONE if min_stores is None else int(min_stores)
    counts = panel.frame.groupby('zone')['store'].nunique()
    return sorted(counts.index[counts >= min_stores])
