# app/services/simulation_service.py
"""Seeded data generators: the two-component uniform DGP and a synthetic pricing panel."""

import logging

import numpy as np
import pandas as pd
from scipy import stats

from ..extensions import STREAM_SIMULATION, seed_stream
from ..models.density import FrozenDensity
from ..models.labels import CONTROL, EDLP, ENDOGENOUS, EXOGENOUS, HILO, ComponentLabels
from ..models.mixture import DataMatrix
from ..models.panel import PanelTable
from ..models.simulation import LabeledDataset, PricingDataset, PricingSimConfig, UniformMixtureConfig
from .npem_service import NPEMService

logger = logging.getLogger(__name__)

UNIFORM_COLUMNS = ('X', 'W1', 'W2')
REGIMES = (CONTROL, HILO, EDLP)

# Component order used by the oracle fit: index 0 endogenous, index 1 exogenous.
ORACLE_LABELS = ComponentLabels((ENDOGENOUS, EXOGENOUS))


class SimulationService:
    """Data generators with the latent truth kept alongside the observables."""

    @staticmethod
    def simulate_uniform_mixture(config=None):
        """
        Two-component mixture with three conditionally independent coordinates.

        Component 1 (prob. 1 - pi): (X1, W11, W21) ~ U(0,1)^3, endogenous.
        Component 2 (prob. pi):     (X2, W12, W22) ~ U(0,2)^3, exogenous.
        eps = X1 + W11 + W21 + v with v ~ U(0,1), using the component-1 draws
        on every row, and Y = beta * X + eps.
        """
        config = config or UniformMixtureConfig()
        T = int(config.T)
        rng = seed_stream(config.seed, STREAM_SIMULATION, 0)
        endogenous = rng.uniform(0.0, 1.0, size=(T, 3))
        exogenous = rng.uniform(0.0, 2.0, size=(T, 3))
        is_first = rng.uniform(size=T) < 1.0 - float(config.pi)
        v = rng.uniform(0.0, 1.0, size=T)

        epsilon = endogenous.sum(axis=1) + v
        observed = np.where(is_first[:, None], endogenous, exogenous)
        outcome = float(config.beta) * observed[:, 0] + epsilon

        logger.debug(f"simulate_uniform_mixture: T={T}, share of component 1={is_first.mean():.4f}")
        return LabeledDataset(
            data=DataMatrix(observed, UNIFORM_COLUMNS),
            outcome=outcome,
            latent_component=np.where(is_first, 1, 2),
            latent_epsilon=epsilon,
            config=config,
        )

    @staticmethod
    def uniform_true_densities():
        """2 x 3 grid of the true coordinate densities (endogenous row first)."""
        first = stats.uniform(loc=0.0, scale=1.0)
        second = stats.uniform(loc=0.0, scale=2.0)
        return [
            [FrozenDensity(first.pdf, 'U(0,1)') for _ in UNIFORM_COLUMNS],
            [FrozenDensity(second.pdf, 'U(0,2)') for _ in UNIFORM_COLUMNS],
        ]

    @classmethod
    def uniform_oracle_fit(cls, data, pi=0.6):
        """MixtureFit with the true uniforms substituted for the estimates."""
        return NPEMService.fit_from_densities(
            data, [1.0 - float(pi), float(pi)], cls.uniform_true_densities()
        )

    @staticmethod
    def uniform_plim(beta=2.0, pi=0.6):
        """Probability limit of full-sample OLS: beta + Cov(X, eps) / Var(X)."""
        q = 1.0 - pi
        mean_x = q * 0.5 + pi * 1.0
        var_x = q * (1.0 / 3.0) + pi * (4.0 / 3.0) - mean_x ** 2
        # E[X eps] = q * E[X1 (X1 + W11 + W21 + v)] + pi * E[X2] * E[eps]
        e_x_eps = q * (1.0 / 3.0 + 3.0 * 0.25) + pi * 1.0 * 2.0
        cov = e_x_eps - mean_x * 2.0
        return beta + cov / var_x

    @staticmethod
    def simulate_pricing(config=None):
        """
        Synthetic scanner panel with Control / Hi-Lo / EDLP regimes.

        log price = product base + chain week effect + regime shift + noise
        log quantity = product intercept + store effect + elasticity * log price + noise

        Regimes are drawn per store-category in contiguous blocks of
        ``block_weeks`` weeks, so Control-then-treatment runs occur.

        Returns:
            PricingDataset with the panel and the true store-week-category regimes
        """
        config = config or PricingSimConfig()
        rng = seed_stream(config.seed, STREAM_SIMULATION, 1)
        n_s, n_w, n_p = int(config.n_stores), int(config.n_weeks), int(config.n_products)
        stores = np.array([f'S{i + 1:03d}' for i in range(n_s)])
        zones = np.array([f'Z{(i % config.n_zones) + 1}' for i in range(n_s)])
        weeks = np.arange(1, n_w + 1)
        shifts = np.array([0.0, config.hilo_shift, config.edlp_shift])
        n_blocks = int(np.ceil(n_w / config.block_weeks))
        store_effect = rng.normal(0.0, 0.1, size=n_s)

        frames, truth = [], []
        for c in range(int(config.n_categories)):
            category = f'C{c + 1}'
            products = np.array([f'{category}-P{j + 1}' for j in range(n_p)])
            base = rng.uniform(0.5, 1.5, size=n_p)
            q_base = rng.uniform(2.0, 4.0, size=n_p)
            chain = rng.normal(0.0, config.chain_sd, size=(n_w, n_p))

            blocks = rng.choice(3, size=(n_s, n_blocks), p=config.treatment_shares)
            regime = np.repeat(blocks, config.block_weeks, axis=1)[:, :n_w]

            noise = rng.normal(0.0, config.noise_sd, size=(n_s, n_w, n_p))
            log_p = base[None, None, :] + chain[None, :, :] + shifts[regime][:, :, None] + noise
            q_noise = rng.normal(0.0, config.quantity_noise_sd, size=(n_s, n_w, n_p))
            log_q = (q_base[None, None, :] + store_effect[:, None, None]
                     + config.elasticity * log_p + q_noise)

            s_idx, w_idx, p_idx = np.meshgrid(np.arange(n_s), np.arange(n_w), np.arange(n_p),
                                              indexing='ij')
            frames.append(pd.DataFrame({
                'category': category,
                'zone': zones[s_idx.ravel()],
                'store': stores[s_idx.ravel()],
                'week': weeks[w_idx.ravel()],
                'product': products[p_idx.ravel()],
                'price': np.exp(log_p.ravel()),
                'quantity': np.exp(log_q.ravel()),
            }))
            s2, w2 = np.meshgrid(np.arange(n_s), np.arange(n_w), indexing='ij')
            truth.append(pd.DataFrame({
                'category': category,
                'zone': zones[s2.ravel()],
                'store': stores[s2.ravel()],
                'week': weeks[w2.ravel()],
                'regime': np.asarray(REGIMES, dtype=object)[regime.ravel()],
            }))

        panel = PanelTable(pd.concat(frames, ignore_index=True))
        truth = pd.concat(truth, ignore_index=True)
        logger.info(
            f"simulate_pricing: {len(panel)} rows, {n_s} stores, {n_w} weeks, "
            f"{config.n_categories} categories"
        )
        return PricingDataset(panel=panel, truth=truth, config=config)
