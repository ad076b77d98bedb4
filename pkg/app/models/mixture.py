# app/models/mixture.py
"""Mixture-estimation types: the data matrix, fit options and the fitted mixture."""

from dataclasses import dataclass, field, replace

import numpy as np

from ..exceptions import DataValidationError, InvalidOptionsError, SchemaMismatchError
from ..extensions import get_config
from .density import BandwidthRule, KernelDensity, WeightedSample


SIMPLEX_TOLERANCE = 1e-10


@dataclass(frozen=True, eq=False)
class DataMatrix:
    """n observations by r coordinates, all finite."""
    values: np.ndarray
    columns: tuple = ()

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2 or values.shape[1] < 1:
            raise DataValidationError("DataMatrix needs a 2-D array with at least one column")
        if not np.all(np.isfinite(values)):
            raise DataValidationError("DataMatrix entries must be finite")
        columns = tuple(self.columns) or tuple(f'x{k + 1}' for k in range(values.shape[1]))
        if len(columns) != values.shape[1]:
            raise DataValidationError(
                f"{len(columns)} column names for {values.shape[1]} columns"
            )
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'columns', columns)

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def r(self):
        return self.values.shape[1]

    def column(self, name_or_index):
        if isinstance(name_or_index, str):
            return self.values[:, self.columns.index(name_or_index)]
        return self.values[:, name_or_index]

    def column_index(self, name_or_index):
        if isinstance(name_or_index, str):
            if name_or_index not in self.columns:
                raise SchemaMismatchError(name_or_index, self.columns)
            return self.columns.index(name_or_index)
        return int(name_or_index)

    def take(self, rows):
        return DataMatrix(self.values[np.asarray(rows)], self.columns)

    def to_dict(self):
        return {'columns': list(self.columns), 'values': self.values.tolist()}

    @classmethod
    def from_dict(cls, payload):
        return cls(np.asarray(payload['values'], dtype=float), tuple(payload['columns']))


@dataclass(frozen=True)
class FitOptions:
    """Settings for npem_fit. Defaults come from the active config."""
    max_iterations: int = None
    tolerance: float = None
    restarts: int = None
    init: str = None
    seed: int = 0
    bandwidth_rule: BandwidthRule = field(default_factory=BandwidthRule.silverman)
    adaptive_bandwidth: bool = False
    threads: int = None
    histogram_bins: object = None
    binned: bool = False

    INIT_KMEANS = 'kmeans'
    INIT_RANDOM = 'random_posterior'
    BIN_RULES = ('auto', 'fd', 'doane', 'scott', 'stone', 'rice', 'sturges', 'sqrt')

    def __post_init__(self):
        cfg = get_config()
        if self.max_iterations is None:
            object.__setattr__(self, 'max_iterations', cfg.MAX_ITERATIONS)
        if self.tolerance is None:
            object.__setattr__(self, 'tolerance', cfg.TOLERANCE)
        if self.restarts is None:
            object.__setattr__(self, 'restarts', cfg.RESTARTS)
        if self.init is None:
            object.__setattr__(self, 'init', cfg.INIT)
        if self.histogram_bins is None:
            object.__setattr__(self, 'histogram_bins', cfg.HISTOGRAM_BINS)
        if isinstance(self.histogram_bins, str) and self.histogram_bins.isdigit():
            object.__setattr__(self, 'histogram_bins', int(self.histogram_bins))
        self.validate()

    def validate(self):
        if int(self.max_iterations) < 1:
            raise InvalidOptionsError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if int(self.restarts) < 1:
            raise InvalidOptionsError(f"restarts must be >= 1, got {self.restarts}")
        if not self.tolerance > 0:
            raise InvalidOptionsError(f"tolerance must be > 0, got {self.tolerance}")
        if self.init not in (self.INIT_KMEANS, self.INIT_RANDOM):
            raise InvalidOptionsError(f"Unknown init '{self.init}'")
        if self.threads is not None and int(self.threads) < 1:
            raise InvalidOptionsError(f"threads must be >= 1, got {self.threads}")
        bins = self.histogram_bins
        if isinstance(bins, str):
            if bins not in self.BIN_RULES:
                raise InvalidOptionsError(f"Unknown histogram bin rule '{bins}'")
        elif isinstance(bins, bool) or not isinstance(bins, (int, np.integer)) or bins < 1:
            raise InvalidOptionsError(f"histogram_bins must be a bin rule or a count >= 1, got {bins!r}")

    def with_seed(self, seed):
        return replace(self, seed=int(seed))

    def to_dict(self):
        return {
            'max_iterations': int(self.max_iterations),
            'tolerance': float(self.tolerance),
            'restarts': int(self.restarts),
            'init': self.init,
            'seed': int(self.seed),
            'bandwidth_rule': self.bandwidth_rule.to_dict(),
            'adaptive_bandwidth': bool(self.adaptive_bandwidth),
            'histogram_bins': self.histogram_bins if isinstance(self.histogram_bins, str)
            else int(self.histogram_bins),
            'binned': bool(self.binned),
        }

    @classmethod
    def from_dict(cls, payload):
        payload = dict(payload)
        rule = payload.pop('bandwidth_rule', None) or {}
        if rule.get('variant') == BandwidthRule.FIXED:
            payload['bandwidth_rule'] = BandwidthRule.fixed(rule['value'])
        return cls(**payload)


class MixtureFit:
    """A fitted m-component mixture with conditionally independent coordinates.

    ``posteriors`` is the E-step under (``weights``, densities), where each
    kernel density f_jk is the KDE of coordinate k weighted by column j of
    ``density_weights``. Frozen densities (oracle fits) replace the kernel
    densities when given. ``loglik`` and ``loglik_trace`` are the histogram
    log-likelihood of the EM iterations.
    """

    def __init__(self, data, weights, posteriors, bandwidths, density_weights=None,
                 frozen_densities=None, iterations_run=0, converged=True,
                 loglik=float('nan'), loglik_trace=(), restart_scores=(), options=None):
        self.data = data
        self.weights = np.asarray(weights, dtype=float)
        self.posteriors = np.asarray(posteriors, dtype=float)
        self.bandwidths = np.asarray(bandwidths, dtype=float)
        self.density_weights = None if density_weights is None else np.asarray(density_weights, dtype=float)
        self.frozen_densities = frozen_densities
        self.iterations_run = int(iterations_run)
        self.converged = bool(converged)
        self.loglik = float(loglik)
        self.loglik_trace = tuple(float(v) for v in loglik_trace)
        self.restart_scores = tuple(float(v) for v in restart_scores)
        self.options = options
        for arr in (self.weights, self.posteriors, self.bandwidths):
            arr.setflags(write=False)
        self._densities = None

    @property
    def m(self):
        return self.weights.size

    @property
    def n(self):
        return self.posteriors.shape[0]

    @property
    def r(self):
        return self.data.r

    @property
    def densities(self):
        """m x r grid of density handles."""
        if self._densities is None:
            if self.frozen_densities is not None:
                self._densities = [list(row) for row in self.frozen_densities]
            else:
                self._densities = [
                    [
                        KernelDensity(
                            WeightedSample(self.data.values[:, k], self.density_weights[:, j]),
                            self.bandwidth(j, k),
                        )
                        for k in range(self.r)
                    ]
                    for j in range(self.m)
                ]
        return self._densities

    def bandwidth(self, component, coordinate):
        if self.bandwidths.ndim == 2:
            return float(self.bandwidths[component, coordinate])
        return float(self.bandwidths[coordinate])

    def density(self, component, coordinate, query):
        return self.densities[component][coordinate].evaluate(query)

    def check_simplex(self, tol=SIMPLEX_TOLERANCE):
        """True when weights and every posterior row lie on the simplex."""
        ok_weights = np.all(self.weights >= -tol) and abs(self.weights.sum() - 1.0) <= tol
        ok_rows = np.all(self.posteriors >= -tol) and np.all(
            np.abs(self.posteriors.sum(axis=1) - 1.0) <= tol
        )
        return bool(ok_weights and ok_rows)

    def permuted(self, order):
        """Same fit with components reordered so that new j = old order[j]."""
        order = list(order)
        frozen = None
        if self.frozen_densities is not None:
            frozen = [self.frozen_densities[j] for j in order]
        bandwidths = self.bandwidths[order] if self.bandwidths.ndim == 2 else self.bandwidths
        return MixtureFit(
            data=self.data,
            weights=self.weights[order],
            posteriors=self.posteriors[:, order],
            bandwidths=bandwidths,
            density_weights=None if self.density_weights is None else self.density_weights[:, order],
            frozen_densities=frozen,
            iterations_run=self.iterations_run,
            converged=self.converged,
            loglik=self.loglik,
            loglik_trace=self.loglik_trace,
            restart_scores=self.restart_scores,
            options=self.options,
        )

    def to_dict(self):
        if self.frozen_densities is not None:
            raise InvalidOptionsError("Oracle fits with frozen densities are not serializable")
        return {
            'm': self.m,
            'columns': list(self.data.columns),
            'weights': self.weights.tolist(),
            'bandwidths': self.bandwidths.tolist(),
            'iterations_run': self.iterations_run,
            'converged': self.converged,
            'loglik': self.loglik,
            'loglik_trace': list(self.loglik_trace),
            'restart_scores': list(self.restart_scores),
            'options': self.options.to_dict() if self.options is not None else None,
            'data': self.data.to_dict(),
            'density_weights': self.density_weights.tolist(),
            'posteriors': self.posteriors.tolist(),
        }

    @classmethod
    def from_dict(cls, payload):
        options = payload.get('options')
        return cls(
            data=DataMatrix.from_dict(payload['data']),
            weights=payload['weights'],
            posteriors=payload['posteriors'],
            bandwidths=payload['bandwidths'],
            density_weights=payload['density_weights'],
            iterations_run=payload.get('iterations_run', 0),
            converged=payload.get('converged', True),
            loglik=payload['loglik'] if payload.get('loglik') is not None else float('nan'),
            loglik_trace=payload.get('loglik_trace', ()),
            restart_scores=payload.get('restart_scores', ()),
            options=FitOptions.from_dict(options) if options else None,
        )