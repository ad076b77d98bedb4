# app/models/simulation.py
"""Simulation configs and generated datasets."""

from dataclasses import asdict, dataclass, field

import numpy as np
import pandas as pd

from ..exceptions import InvalidParameterError


@dataclass(frozen=True)
class UniformMixtureConfig:
    """Two-component uniform DGP: U(0,1)^3 (endogenous) vs U(0,2)^3 (exogenous)."""
    T: int = 2000
    pi: float = 0.6
    beta: float = 2.0
    seed: int = 0

    def __post_init__(self):
        if int(self.T) < 1:
            raise InvalidParameterError(f"T must be >= 1, got {self.T}")
        if not 0.0 <= float(self.pi) <= 1.0:
            raise InvalidParameterError(f"pi must lie in [0, 1], got {self.pi}")

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class PricingSimConfig:
    """Synthetic scanner panel with Control / Hi-Lo / EDLP pricing regimes.

    Each store-category is priced in contiguous blocks of ``block_weeks``
    weeks; each block draws its regime from ``treatment_shares`` (Control,
    Hi-Lo, EDLP).
    """
    n_stores: int = 24
    n_weeks: int = 72
    n_products: int = 6
    n_zones: int = 2
    n_categories: int = 2
    treatment_shares: tuple = (0.5, 0.25, 0.25)
    hilo_shift: float = 0.04
    edlp_shift: float = -0.04
    noise_sd: float = 0.01
    chain_sd: float = 0.02
    elasticity: float = -2.0
    quantity_noise_sd: float = 0.05
    block_weeks: int = 12
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'treatment_shares', tuple(float(s) for s in self.treatment_shares))
        for name in ('n_stores', 'n_weeks', 'n_products', 'n_zones', 'n_categories', 'block_weeks'):
            if int(getattr(self, name)) < 1:
                raise InvalidParameterError(f"{name} must be >= 1")
        if self.n_zones > self.n_stores:
            raise InvalidParameterError("n_zones cannot exceed n_stores")
        shares = np.asarray(self.treatment_shares)
        if shares.size != 3 or np.any(shares < 0) or abs(shares.sum() - 1.0) > 1e-9:
            raise InvalidParameterError(f"treatment_shares must be a 3-simplex, got {self.treatment_shares}")
        degenerate = self.hilo_shift == 0 and self.edlp_shift == 0
        if not degenerate and not self.hilo_shift > 0 > self.edlp_shift:
            raise InvalidParameterError("Shifts must satisfy hilo_shift > 0 > edlp_shift")
        if self.noise_sd < 0 or self.chain_sd < 0 or self.quantity_noise_sd < 0:
            raise InvalidParameterError("Noise scales must be non-negative")

    def to_dict(self):
        payload = asdict(self)
        payload['treatment_shares'] = list(self.treatment_shares)
        return payload


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Simulated (Y, X, W1, W2) plus the latent truth.

    ``latent_component`` is 1 for the endogenous U(0,1) component and 2 for
    the exogenous U(0,2) component.
    """
    data: object
    outcome: np.ndarray
    latent_component: np.ndarray
    latent_epsilon: np.ndarray
    config: UniformMixtureConfig = None

    def to_frame(self, emit_latent=False):
        frame = pd.DataFrame({'Y': self.outcome})
        for k, name in enumerate(self.data.columns):
            frame[name] = self.data.values[:, k]
        if emit_latent:
            frame['component'] = self.latent_component
            frame['epsilon'] = self.latent_epsilon
        return frame


@dataclass(frozen=True, eq=False)
class PricingDataset:
    """Generated panel plus the true store-week-category regimes."""
    panel: object
    truth: object = field(repr=False)
    config: PricingSimConfig = None
