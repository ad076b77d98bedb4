import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings, strategies as st

from app.exceptions import (
    DataValidationError, DuplicateKeyError, EmptyResultError, ExcessiveMissingnessError,
    InvalidParameterError, ParseError, SchemaMismatchError,
)
from app.models import DROP_PRODUCT, DROP_UNIT, WideMatrixSpec
from app.services import panel_service
from tests.conftest import make_panel

HEADER = b"category,zone,store,week,product,price,quantity\n"


def test_load_three_rows():
    body = HEADER + b"C1,Z1,S1,1,P1,2.00,3\nC1,Z1,S2,1,P1,2.10,4\nC1,Z1,S1,2,P1,2.05,\n"
    table = panel_service.load_panel(body)
    assert len(table) == 3
    assert table.frame['price'].dtype == float
    assert np.isnan(table.frame.loc[(table.frame['store'] == 'S1') & (table.frame['week'] == 2),
                                    'quantity']).all()


def test_load_duplicate_key():
    body = HEADER + b"C1,Z1,S1,1,P1,2.00,3\nC1,Z1,S1,1,P1,2.10,4\n"
    with pytest.raises(DuplicateKeyError) as exc:
        panel_service.load_panel(body)
    assert ('store', 'S1') in exc.value.key
    assert ('product', 'P1') in exc.value.key


def test_load_zero_price():
    with pytest.raises(DataValidationError, match='log undefined'):
        panel_service.load_panel(HEADER + b"C1,Z1,S1,1,P1,0,3\n")


def test_load_reports_line_numbers():
    body = HEADER + b"C1,Z1,S1,1,P1,2.0,3\nC1,Z1,S1,2,P1,abc,3\nC1,Z1,S1,3,P1,2.0,3\nC1,Z1,S1,4,P1,,3\n"
    with pytest.raises(ParseError) as exc:
        panel_service.load_panel(body)
    assert exc.value.column == 'price'
    assert exc.value.line_numbers == [3, 5]


def test_load_fractional_week():
    with pytest.raises(ParseError) as exc:
        panel_service.load_panel(HEADER + b"C1,Z1,S1,1.5,P1,2.0,3\n")
    assert exc.value.line_numbers == [2]


def test_load_schema_mapping():
    body = b"cat,zone,shop,wk,upc,p,q\nC1,Z1,S1,1,P1,2.0,3\n"
    schema = {'category': 'cat', 'store': 'shop', 'week': 'wk', 'product': 'upc',
              'price': 'p', 'quantity': 'q'}
    table = panel_service.load_panel(body, schema)
    assert table.frame.loc[0, 'store'] == 'S1'
    with pytest.raises(SchemaMismatchError) as exc:
        panel_service.load_panel(body)
    assert exc.value.column == 'category'


def test_demean_identical_prices_is_zero():
    panel = make_panel([('C', 'Z', s, 1, 'P', 2.5, 1.0) for s in ('A', 'B', 'C')])
    assert np.allclose(panel_service.log_demean(panel).frame['x'], 0.0)


def test_demean_two_point_symmetry():
    panel = make_panel([('C', 'Z', 'A', 1, 'P', np.exp(1.0), 1.0),
                        ('C', 'Z', 'B', 1, 'P', np.exp(3.0), 1.0)])
    x = panel_service.log_demean(panel).frame.sort_values('store')['x'].to_numpy()
    assert x == pytest.approx([-1.0, 1.0])


def test_demean_group_means_vanish(pricing):
    frame = panel_service.log_demean(pricing.panel).frame
    means = frame.groupby(list(panel_service.DEMEAN_GROUP))['x'].mean()
    assert np.abs(means).max() < 1e-12


def test_demean_idempotent(pricing):
    once = panel_service.log_demean(pricing.panel)
    twice = panel_service.log_demean(once)
    pd.testing.assert_frame_equal(once.frame, twice.frame)


def _spread_panel():
    rows = []
    for week in (1, 2):
        rows += [('C', 'Z', 'A', week, 'flat', 1.0, 1.0), ('C', 'Z', 'B', week, 'flat', 1.0, 1.0)]
    rows += [('C', 'Z', 'A', 1, 'promo', 2.00, 1.0), ('C', 'Z', 'B', 1, 'promo', 2.10, 1.0),
             ('C', 'Z', 'A', 2, 'promo', 2.00, 1.0), ('C', 'Z', 'B', 2, 'promo', 2.00, 1.0),
             ('C', 'Z', 'A', 1, 'wide', 1.00, 1.0), ('C', 'Z', 'B', 1, 'wide', 1.20, 1.0),
             ('C', 'Z', 'A', 2, 'wide', 1.00, 1.0), ('C', 'Z', 'B', 2, 'wide', 1.00, 1.0)]
    return make_panel(rows)


def test_filter_products_example():
    panel = _spread_panel()
    assert panel_service.filter_products(panel, 0.03) == ['wide', 'promo']
    assert panel_service.filter_products(panel, 0.1) == ['wide']
    with pytest.raises(EmptyResultError):
        panel_service.filter_products(panel, 0.5)


@pytest.mark.parametrize('threshold', [0.0, 1.0, -0.2])
def test_filter_products_threshold_range(threshold):
    with pytest.raises(InvalidParameterError):
        panel_service.filter_products(_spread_panel(), threshold)


def test_filter_products_window():
    # Week 2 has no spread for any product.
    with pytest.raises(EmptyResultError):
        panel_service.filter_products(_spread_panel(), 0.03, window=(2, 2))


@settings(max_examples=30, deadline=None)
@given(low=st.floats(0.001, 0.5), high=st.floats(0.001, 0.5))
def test_filter_products_monotone(pricing, low, high):
    low, high = sorted((low, high))
    try:
        strict = set(panel_service.filter_products(pricing.panel, high))
    except EmptyResultError:
        strict = set()
    try:
        loose = set(panel_service.filter_products(pricing.panel, low))
    except EmptyResultError:
        loose = set()
    assert strict <= loose


def test_select_coordinates_cap():
    assert panel_service.select_coordinates(_spread_panel(), 0.03, cap=1) == ['wide']
    assert panel_service.select_coordinates(_spread_panel(), 0.03, cap=0) == ['wide', 'promo']


def _complete_panel():
    rows = [('C', 'Z', store, week, product, 1.0 + 0.1 * k + 0.01 * week, 2.0)
            for store in ('A', 'B') for week in (1, 2)
            for k, product in enumerate(('P1', 'P2', 'P3'))]
    return panel_service.log_demean(make_panel(rows))


def test_to_matrix_shape():
    matrix = panel_service.to_matrix(_complete_panel(), WideMatrixSpec('Z', 'C', ('P1', 'P2', 'P3')))
    assert matrix.data.values.shape == (4, 3)
    assert matrix.products == ('P1', 'P2', 'P3')
    assert list(matrix.units['store']) == ['A', 'A', 'B', 'B']
    assert list(matrix.units['week']) == [1, 2, 1, 2]
    for row in range(matrix.data.n):
        assert matrix.row_of(*matrix.unit_of(row)) == row


def test_to_matrix_excludes_sparse_store():
    rows = [('C', 'Z', 'A', week, 'P1', 1.0 + 0.01 * week, 1.0) for week in range(1, 6)]
    rows += [('C', 'Z', 'B', week, 'P1', 1.1, 1.0) for week in range(1, 5)]
    panel = panel_service.log_demean(make_panel(rows))
    matrix = panel_service.to_matrix(panel, WideMatrixSpec('Z', 'C', ('P1',)))
    assert matrix.excluded_stores == ('B',)
    assert set(matrix.units['store']) == {'A'}
    assert any('Excluded store B' in note for note in matrix.notes)


def test_to_matrix_all_stores_sparse():
    rows = [('C', 'Z', 'A', 1, 'P1', 1.0, 1.0), ('C', 'Z', 'B', 2, 'P1', 1.0, 1.0)]
    with pytest.raises(ExcessiveMissingnessError):
        panel_service.to_matrix(panel_service.log_demean(make_panel(rows)),
                                WideMatrixSpec('Z', 'C', ('P1',)))


def _gappy_panel():
    rows = [('C', 'Z', store, week, 'P1', 1.0 + 0.01 * week, 1.0)
            for store in ('A', 'B') for week in (1, 2)]
    rows.append(('C', 'Z', 'A', 1, 'P2', 2.0, 1.0))
    return panel_service.log_demean(make_panel(rows))


def test_to_matrix_drop_product():
    matrix = panel_service.to_matrix(_gappy_panel(), WideMatrixSpec('Z', 'C', ('P1', 'P2')),
                                     missing_policy=DROP_PRODUCT)
    assert matrix.products == ('P1',)
    assert matrix.dropped_products == ('P2',)
    assert matrix.data.n == 4


def test_to_matrix_drop_unit():
    matrix = panel_service.to_matrix(_gappy_panel(), WideMatrixSpec('Z', 'C', ('P1', 'P2')),
                                     missing_policy=DROP_UNIT)
    assert matrix.products == ('P1', 'P2')
    assert matrix.data.n == 1
    assert matrix.dropped_units == 3
    assert matrix.unit_of(0) == ('A', 1)


def test_to_matrix_unknown_policy():
    with pytest.raises(InvalidParameterError):
        panel_service.to_matrix(_gappy_panel(), WideMatrixSpec('Z', 'C', ('P1',)), missing_policy='impute')


def test_eligible_zones(pricing):
    assert panel_service.eligible_zones(pricing.panel, 4) == ['Z1', 'Z2']
    assert panel_service.eligible_zones(pricing.panel, 9) == []


def test_schema_mismatch_lists_index_columns():
    error = SchemaMismatchError('price', pd.Index(['store', 'week']))
    assert error.available == ['store', 'week']
    assert str(error) == "Missing column 'price' (available: store, week)"
    assert SchemaMismatchError('price', pd.Index([])).available == []
