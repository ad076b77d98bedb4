"""Shared fixtures: testing configuration and small seeded datasets."""
import numpy as np
import pandas as pd
import pytest

from app import create_app
from app.models import DataMatrix, FitOptions, PanelTable, PricingSimConfig, UniformMixtureConfig
from app.services import SimulationService


@pytest.fixture(scope='session', autouse=True)
def testing_config():
    return create_app('testing')


@pytest.fixture
def options():
    return FitOptions(restarts=2, max_iterations=200, seed=0, threads=1)


@pytest.fixture(scope='session')
def uniform_data():
    return SimulationService.simulate_uniform_mixture(UniformMixtureConfig(T=2000, seed=11))


@pytest.fixture(scope='session')
def small_uniform():
    return SimulationService.simulate_uniform_mixture(UniformMixtureConfig(T=400, seed=3))


@pytest.fixture(scope='session')
def pricing():
    config = PricingSimConfig(n_stores=16, n_weeks=48, n_products=4, n_zones=2, n_categories=1, seed=5)
    return SimulationService.simulate_pricing(config)


@pytest.fixture
def separated_data():
    """Two components with N(0, 0.1) vs N(10, 0.1) coordinates, r = 3."""
    rng = np.random.default_rng(7)
    first = rng.normal(0.0, 0.1, size=(150, 3))
    second = rng.normal(10.0, 0.1, size=(250, 3))
    return DataMatrix(np.vstack([first, second]), ('a', 'b', 'c'))


def make_panel(rows):
    """PanelTable from (category, zone, store, week, product, price, quantity) tuples."""
    frame = pd.DataFrame(rows, columns=['category', 'zone', 'store', 'week', 'product', 'price', 'quantity'])
    return PanelTable(frame)
