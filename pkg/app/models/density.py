# app/models/density.py
"""Density-estimation types: bandwidth rules, weighted samples, density handles."""

from dataclasses import dataclass

import numpy as np

from ..exceptions import DegenerateWeightsError, InvalidBandwidthError, InvalidParameterError


@dataclass(frozen=True)
class BandwidthRule:
    """Either Silverman's rule of thumb or a fixed bandwidth."""
    variant: str = 'silverman'
    value: float = None

    SILVERMAN = 'silverman'
    FIXED = 'fixed'

    def __post_init__(self):
        if self.variant not in (self.SILVERMAN, self.FIXED):
            raise InvalidParameterError(f"Unknown bandwidth rule '{self.variant}'")
        if self.variant == self.FIXED:
            if self.value is None or not np.isfinite(self.value) or self.value <= 0:
                raise InvalidBandwidthError(f"Fixed bandwidth must be > 0, got {self.value}")

    @classmethod
    def silverman(cls):
        return cls(cls.SILVERMAN)

    @classmethod
    def fixed(cls, value):
        return cls(cls.FIXED, float(value))

    @classmethod
    def parse(cls, text):
        """'silverman' or a positive number."""
        text = str(text).strip().lower()
        if text == cls.SILVERMAN:
            return cls.silverman()
        try:
            return cls.fixed(float(text))
        except ValueError:
            raise InvalidParameterError(f"Bandwidth must be 'silverman' or a number, got '{text}'")

    def to_dict(self):
        return {'variant': self.variant, 'value': self.value}


@dataclass(frozen=True, eq=False)
class WeightedSample:
    """Points with non-negative weights (weights need not be normalized)."""
    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float).ravel()
        weights = np.asarray(self.weights, dtype=float).ravel()
        if points.shape != weights.shape:
            raise DegenerateWeightsError(
                f"points ({points.size}) and weights ({weights.size}) differ in length"
            )
        if not np.all(np.isfinite(weights)) or np.any(weights < 0):
            raise DegenerateWeightsError("Weights must be finite and non-negative")
        if weights.sum() <= 0:
            raise DegenerateWeightsError("Weights sum to zero")
        object.__setattr__(self, 'points', points)
        object.__setattr__(self, 'weights', weights)

    @classmethod
    def unweighted(cls, points):
        points = np.asarray(points, dtype=float).ravel()
        return cls(points, np.ones_like(points))

    @property
    def size(self):
        return self.points.size


class KernelDensity:
    """Weighted Gaussian KDE handle: one coordinate of one mixture component."""

    kind = 'kernel'

    def __init__(self, sample, bandwidth):
        if not np.isfinite(bandwidth) or bandwidth <= 0:
            raise InvalidBandwidthError(f"Bandwidth must be > 0, got {bandwidth}")
        self.sample = sample
        self.bandwidth = float(bandwidth)

    def evaluate(self, query):
        from ..services.kde_service import kde_eval
        return kde_eval(self.sample, self.bandwidth, query)

    def __call__(self, query):
        return self.evaluate(query)


class FrozenDensity:
    """A known density (e.g. the true generator density) used as an oracle."""

    kind = 'frozen'

    def __init__(self, pdf, name=''):
        self.pdf = pdf
        self.name = name

    def evaluate(self, query):
        return np.asarray(self.pdf(np.asarray(query, dtype=float)), dtype=float)

    def __call__(self, query):
        return self.evaluate(query)
