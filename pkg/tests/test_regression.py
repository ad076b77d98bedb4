import numpy as np
import pandas as pd
import pytest
import statsmodels.api as sm
from hypothesis import given, settings, strategies as st
from scipy import stats

from app.exceptions import (
    CollinearFixedEffectsError, DegenerateRegressorError, EmptySelectionError, InsufficientDataError,
    InvalidParameterError, LengthMismatchError, SchemaMismatchError,
)
from app.models import FESpec, SelectionResult
from app.services import RegressionService
from app.utils.helpers import format_coefficient, regression_table, significance_stars


def all_rows(n):
    return SelectionResult(indices=np.arange(n), threshold=0.0, target='exogenous',
                           target_posteriors=np.ones(n))


class TestOLS:
    def test_zero_noise_recovery(self):
        x = np.random.default_rng(0).uniform(size=200)
        result = RegressionService.ols(1.5 - 0.75 * x, x)
        assert result.coef('alpha') == pytest.approx(1.5, abs=1e-10)
        assert result.coef('beta') == pytest.approx(-0.75, abs=1e-10)

    def test_two_points(self):
        result = RegressionService.ols([1.0, 3.0], [0.0, 1.0])
        assert result.coef('alpha') == pytest.approx(1.0)
        assert result.coef('beta') == pytest.approx(2.0)
        assert np.isnan(result.se('beta'))

    def test_matches_statsmodels(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=100)
        y = 0.3 + 2.0 * x + rng.normal(size=100)
        result = RegressionService.ols(y, x)
        ref = sm.OLS(y, sm.add_constant(x)).fit()
        assert result.coef('beta') == pytest.approx(ref.params[1])
        assert result.se('beta') == pytest.approx(ref.bse[1])
        assert result.p_value('beta') == pytest.approx(ref.pvalues[1])

    def test_without_intercept(self):
        x = np.array([1.0, 2.0, 3.0])
        result = RegressionService.ols(2 * x, x, intercept=False)
        assert list(result.coefficients) == ['beta']
        assert result.coef() == pytest.approx(2.0)

    def test_constant_regressor(self):
        with pytest.raises(DegenerateRegressorError):
            RegressionService.ols([1.0, 2.0, 3.0], [4.0, 4.0, 4.0])

    def test_too_few_rows(self):
        with pytest.raises(InsufficientDataError):
            RegressionService.ols([1.0], [1.0])

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatchError):
            RegressionService.ols([1.0, 2.0], [1.0, 2.0, 3.0])

    def test_subset_of_all_rows_equals_full(self, uniform_data):
        y, x = uniform_data.outcome, uniform_data.data.column('X')
        full = RegressionService.ols(y, x)
        subset = RegressionService.ols_on_subset(y, x, all_rows(y.size))
        assert subset.coef() == pytest.approx(full.coef(), abs=1e-12)
        assert subset.coef('alpha') == pytest.approx(full.coef('alpha'), abs=1e-12)

    def test_empty_subset(self):
        empty = SelectionResult(indices=np.array([], dtype=int), threshold=0.9, target='exogenous',
                                target_posteriors=np.zeros(3))
        with pytest.raises(EmptySelectionError):
            RegressionService.ols_on_subset([1.0, 2.0, 3.0], [1.0, 2.0, 4.0], empty)


def dummy_ols_beta(frame, fixed_effects):
    design = [frame[['x']].to_numpy(dtype=float)]
    for i, fe in enumerate(fixed_effects):
        dummies = pd.get_dummies(frame[fe], dtype=float).to_numpy()
        design.append(dummies if i == 0 else dummies[:, 1:])
    coef, *_ = np.linalg.lstsq(np.hstack(design), frame['y'].to_numpy(dtype=float), rcond=None)
    return coef[0]


class TestFixedEffects:
    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 100_000), units=st.integers(2, 6), periods=st.integers(2, 6))
    def test_two_way_matches_dummy_ols(self, seed, units, periods):
        rng = np.random.default_rng(seed)
        frame = pd.DataFrame({
            'unit': np.repeat(np.arange(units), periods).astype(str),
            'period': np.tile(np.arange(periods), units).astype(str),
        })
        frame['x'] = rng.normal(size=len(frame))
        frame['y'] = -2.0 * frame['x'] + rng.normal(size=len(frame))
        spec = FESpec(outcome='y', regressor='x', fixed_effects=('unit', 'period'), cluster_key='unit')
        result = RegressionService.fe_regression(frame, spec)
        assert result.coef() == pytest.approx(dummy_ols_beta(frame, ['unit', 'period']), abs=1e-8)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 100_000), n=st.integers(6, 50), groups=st.integers(2, 5))
    def test_single_effect_matches_dummy_ols(self, seed, n, groups):
        rng = np.random.default_rng(seed)
        frame = pd.DataFrame({'g': (np.arange(n) % groups).astype(str)})
        frame['x'] = rng.normal(size=n)
        frame['y'] = frame['x'] + rng.normal(size=n)
        spec = FESpec(outcome='y', regressor='x', fixed_effects=('g',), cluster_key='g')
        result = RegressionService.fe_regression(frame, spec)
        assert result.coef() == pytest.approx(dummy_ols_beta(frame, ['g']), abs=1e-8)

    def test_cluster_interval_uses_t(self):
        rng = np.random.default_rng(3)
        frame = pd.DataFrame({'store': np.repeat(list('abcdef'), 10), 'week': np.tile(np.arange(10), 6)})
        frame['x'] = rng.normal(size=60)
        frame['y'] = 0.5 * frame['x'] + rng.normal(size=60)
        spec = FESpec(outcome='y', regressor='x', fixed_effects=('store', 'week'), cluster_key='store')
        result = RegressionService.fe_regression(frame, spec)
        low, high = result.interval()
        crit = stats.t.ppf(0.975, 5)
        assert result.n_clusters == 6
        assert low == pytest.approx(result.coef() - crit * result.se())
        assert high == pytest.approx(result.coef() + crit * result.se())

    def test_collinear(self):
        frame = pd.DataFrame({'cell': list('aabb'), 'x': [1.0, 1.0, 2.0, 2.0], 'y': [0.0, 1.0, 2.0, 3.0]})
        spec = FESpec(outcome='y', regressor='x', fixed_effects=('cell',), cluster_key='cell')
        with pytest.raises(CollinearFixedEffectsError):
            RegressionService.fe_regression(frame, spec)

    def test_single_level_fixed_effect(self):
        frame = pd.DataFrame({'cell': list('aaaa'), 'x': [1.0, 2.0, 3.0, 5.0], 'y': [0.0, 1.0, 2.0, 3.0]})
        spec = FESpec(outcome='y', regressor='x', fixed_effects=('cell',), cluster_key='cell')
        with pytest.raises(InvalidParameterError):
            RegressionService.fe_regression(frame, spec)

    def test_missing_column(self):
        frame = pd.DataFrame({'cell': list('ab'), 'x': [1.0, 2.0]})
        spec = FESpec(outcome='y', regressor='x', fixed_effects=('cell',), cluster_key='cell')
        with pytest.raises(SchemaMismatchError):
            RegressionService.fe_regression(frame, spec)

    def test_spec_names_distinct(self):
        with pytest.raises(InvalidParameterError):
            FESpec(outcome='y', regressor='y', fixed_effects=('g',), cluster_key='g')

    def test_demean_is_idempotent(self):
        rng = np.random.default_rng(4)
        frame = pd.DataFrame({'a': rng.integers(0, 4, 40), 'b': rng.integers(0, 3, 40), 'v': rng.normal(size=40)})
        once, _ = RegressionService.demean(frame, ['v'], ['a', 'b'])
        twice, _ = RegressionService.demean(frame.assign(v=once['v']), ['v'], ['a', 'b'])
        assert np.allclose(once['v'], twice['v'], atol=1e-8)


class TestFormatting:
    @pytest.mark.parametrize('p, stars', [(0.005, '***'), (0.03, '**'), (0.07, '*'), (0.2, ''), (float('nan'), '')])
    def test_stars(self, p, stars):
        assert significance_stars(p) == stars

    def test_coefficient_layout(self):
        x = np.random.default_rng(5).normal(size=500)
        result = RegressionService.ols(2 * x + np.random.default_rng(6).normal(size=500), x)
        coef, se = format_coefficient(result)
        assert coef.endswith('***')
        assert se.startswith('(') and se.endswith(')')

    def test_table_has_every_column(self, uniform_data):
        full = RegressionService.ols(uniform_data.outcome, uniform_data.data.column('X'))
        text = regression_table({'Full sample': full, 'Subset': full})
        assert 'Full sample' in text and 'Subset' in text
        assert 'Note: *p<0.1; **p<0.05; ***p<0.01' in text
