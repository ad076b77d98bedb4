import numpy as np
import pytest

from app.exceptions import InvalidParameterError
from app.models import CONTROL, EDLP, HILO, PricingSimConfig, UniformMixtureConfig
from app.models.panel import PANEL_COLUMNS
from app.services import SimulationService


def test_uniform_shapes(uniform_data):
    assert uniform_data.data.columns == ('X', 'W1', 'W2')
    assert uniform_data.data.n == 2000
    assert uniform_data.outcome.shape == (2000,)
    assert set(np.unique(uniform_data.latent_component)) == {1, 2}


def test_uniform_supports(uniform_data):
    first = uniform_data.latent_component == 1
    assert np.all(uniform_data.data.values[first] <= 1.0)
    assert np.all(uniform_data.data.values >= 0.0)
    assert np.all(uniform_data.data.values <= 2.0)
    assert (~first).mean() == pytest.approx(0.6, abs=0.04)


def test_uniform_outcome_identity(uniform_data):
    x = uniform_data.data.column('X')
    assert np.allclose(uniform_data.outcome, 2.0 * x + uniform_data.latent_epsilon)


def test_uniform_is_seeded():
    a = SimulationService.simulate_uniform_mixture(UniformMixtureConfig(T=50, seed=4))
    b = SimulationService.simulate_uniform_mixture(UniformMixtureConfig(T=50, seed=4))
    c = SimulationService.simulate_uniform_mixture(UniformMixtureConfig(T=50, seed=5))
    assert np.array_equal(a.data.values, b.data.values)
    assert not np.array_equal(a.data.values, c.data.values)


def test_uniform_frame_columns(small_uniform):
    assert list(small_uniform.to_frame().columns) == ['Y', 'X', 'W1', 'W2']
    assert list(small_uniform.to_frame(emit_latent=True).columns) == \
        ['Y', 'X', 'W1', 'W2', 'component', 'epsilon']


@pytest.mark.parametrize('kwargs', [{'T': 0}, {'pi': 1.5}, {'pi': -0.1}])
def test_uniform_rejects_bad_config(kwargs):
    with pytest.raises(InvalidParameterError):
        UniformMixtureConfig(**kwargs)


def test_plim_value():
    assert SimulationService.uniform_plim() == pytest.approx(2.1136, abs=1e-4)


def test_oracle_fit_uses_true_weights(small_uniform):
    fit = SimulationService.uniform_oracle_fit(small_uniform.data)
    assert np.allclose(fit.weights, [0.4, 0.6])
    assert fit.check_simplex()


def test_pricing_panel_is_complete(pricing):
    cfg = pricing.config
    frame = pricing.panel.frame
    assert tuple(frame.columns[:len(PANEL_COLUMNS)]) == PANEL_COLUMNS
    assert len(frame) == cfg.n_stores * cfg.n_weeks * cfg.n_products * cfg.n_categories
    assert (frame['price'] > 0).all()
    assert (frame['quantity'] >= 0).all()
    assert len(pricing.truth) == cfg.n_stores * cfg.n_weeks * cfg.n_categories


def test_pricing_regimes_are_blocks(pricing):
    truth = pricing.truth
    assert set(truth['regime']) <= {CONTROL, HILO, EDLP}
    block = pricing.config.block_weeks
    for _, rows in truth.groupby(['category', 'store']):
        regimes = rows.sort_values('week')['regime'].to_numpy()
        for start in range(0, len(regimes), block):
            assert len(set(regimes[start:start + block])) == 1


def test_pricing_shift_direction():
    data = SimulationService.simulate_pricing(PricingSimConfig(
        n_stores=12, n_weeks=24, n_products=3, n_zones=1, n_categories=1, block_weeks=6,
        noise_sd=0.0, chain_sd=0.0, seed=2,
    ))
    frame = data.panel.frame.merge(data.truth, on=['category', 'zone', 'store', 'week'])
    mean_log = frame.assign(lp=np.log(frame['price'])).groupby(['product', 'regime'])['lp'].mean()
    for product in frame['product'].unique():
        levels = mean_log.loc[product]
        if {HILO, CONTROL} <= set(levels.index):
            assert levels[HILO] - levels[CONTROL] == pytest.approx(0.04)
        if {EDLP, CONTROL} <= set(levels.index):
            assert levels[EDLP] - levels[CONTROL] == pytest.approx(-0.04)


@pytest.mark.parametrize('kwargs', [
    {'n_stores': 0},
    {'n_zones': 30, 'n_stores': 4},
    {'treatment_shares': (0.5, 0.5, 0.5)},
    {'hilo_shift': -0.02},
    {'noise_sd': -1.0},
])
def test_pricing_rejects_bad_config(kwargs):
    with pytest.raises(InvalidParameterError):
        PricingSimConfig(**kwargs)


def test_uniform_regressor_moments():
    x = SimulationService.simulate_uniform_mixture(UniformMixtureConfig(T=1_000_000, seed=1)).data.column('X')
    assert x.mean() == pytest.approx(0.8, abs=0.005)
    assert x.var() == pytest.approx(22 / 75, abs=0.005)


@pytest.mark.parametrize('T, tolerance', [(2000, 0.0282), (100_000, 0.01)])
def test_first_component_share(T, tolerance):
    data = SimulationService.simulate_uniform_mixture(UniformMixtureConfig(T=T, seed=7))
    assert (data.latent_component == 1).mean() == pytest.approx(0.4, abs=tolerance)


def test_pricing_accepts_zero_shifts():
    config = PricingSimConfig(hilo_shift=0.0, edlp_shift=0.0)
    assert config.hilo_shift == config.edlp_shift == 0.0
