# app/models/panel.py
"""Long-format scanner panel and its wide (unit x product) view."""

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from ..exceptions import DataValidationError, DuplicateKeyError, SchemaMismatchError


PANEL_KEY = ('category', 'zone', 'store', 'week', 'product')
PANEL_COLUMNS = PANEL_KEY + ('price', 'quantity')
UNIT_KEY = ('store', 'week')

DROP_UNIT = 'drop_unit'
DROP_PRODUCT = 'drop_product'


class PanelTable:
    """Validated long-format panel (one row per category-zone-store-week-product)."""

    def __init__(self, frame):
        missing = [c for c in PANEL_COLUMNS if c not in frame.columns]
        if missing:
            raise SchemaMismatchError(missing[0], frame.columns)
        frame = frame.copy()
        for col in ('category', 'zone', 'store', 'product'):
            frame[col] = frame[col].astype(str)
        frame['week'] = frame['week'].astype(int)
        frame['price'] = frame['price'].astype(float)
        frame['quantity'] = frame['quantity'].astype(float)

        dup = frame.duplicated(list(PANEL_KEY), keep=False)
        if dup.any():
            row = frame.loc[dup].iloc[0]
            raise DuplicateKeyError(tuple((k, row[k]) for k in PANEL_KEY))
        bad = ~(frame['price'] > 0)
        if bad.any():
            first = frame.loc[bad].iloc[0]
            raise DataValidationError(
                f"Price must be > 0 (log undefined): {first['price']} for "
                f"store {first['store']} week {first['week']} product {first['product']}"
            )
        if (frame['quantity'] < 0).any():
            raise DataValidationError("Quantity must be non-negative")

        self.frame = frame.sort_values(list(PANEL_KEY), kind='mergesort').reset_index(drop=True)

    def __len__(self):
        return len(self.frame)

    @property
    def categories(self):
        return sorted(self.frame['category'].unique())

    @property
    def zones(self):
        return sorted(self.frame['zone'].unique())

    def groups(self):
        """(zone, category) pairs present in the panel."""
        pairs = self.frame[['zone', 'category']].drop_duplicates()
        return sorted(map(tuple, pairs.to_numpy()))

    def subset(self, zone=None, category=None, products=None, weeks=None):
        mask = pd.Series(True, index=self.frame.index)
        if zone is not None:
            mask &= self.frame['zone'] == str(zone)
        if category is not None:
            mask &= self.frame['category'] == str(category)
        if products is not None:
            mask &= self.frame['product'].isin([str(p) for p in products])
        if weeks is not None:
            lo, hi = weeks
            mask &= self.frame['week'].between(lo, hi)
        return self.with_frame(self.frame.loc[mask])

    def with_frame(self, frame):
        table = PanelTable.__new__(PanelTable)
        table.frame = frame.reset_index(drop=True)
        return table


@dataclass(frozen=True)
class WideMatrixSpec:
    """One (zone, category) group: units are (store, week), coordinates are products."""
    zone: str
    category: str
    coordinates: tuple
    value_column: str = 'x'

    def __post_init__(self):
        object.__setattr__(self, 'coordinates', tuple(str(c) for c in self.coordinates))
        if not self.coordinates:
            raise DataValidationError("WideMatrixSpec needs at least one coordinate")


@dataclass(frozen=True, eq=False)
class WideMatrix:
    """DataMatrix plus the (store, week) unit of every row."""
    data: object
    units: pd.DataFrame
    products: tuple
    excluded_stores: tuple = ()
    dropped_products: tuple = ()
    dropped_units: int = 0
    notes: list = field(default_factory=list)

    def unit_of(self, row):
        unit = self.units.iloc[int(row)]
        return unit['store'], int(unit['week'])

    def row_of(self, store, week):
        match = np.flatnonzero((self.units['store'].to_numpy() == str(store))
                               & (self.units['week'].to_numpy() == int(week)))
        return int(match[0]) if match.size else None
