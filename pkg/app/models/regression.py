# app/models/regression.py
"""Second-stage regression result types."""

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from ..exceptions import InvalidParameterError
from ..extensions import get_config


SE_CLASSICAL = 'classical'
SE_CLUSTER = 'cluster'
SE_BOOTSTRAP = 'bootstrap'


@dataclass(frozen=True, eq=False)
class RegressionResult:
    """Coefficients, standard errors and fit statistics of one regression.

    ``se_kind`` is 'classical', 'cluster' or 'bootstrap'; ``se_detail`` holds
    the cluster key or the replicate count. ``df_resid`` drives p-values
    (None means a normal reference distribution).
    """
    coefficients: dict
    standard_errors: dict
    se_kind: str
    r_squared: float
    n_used: int
    residuals: np.ndarray = field(repr=False)
    se_detail: object = None
    df_resid: float = None
    n_clusters: int = None
    conf_int: dict = None

    def __post_init__(self):
        if set(self.coefficients) != set(self.standard_errors):
            raise InvalidParameterError("Coefficient and standard-error names differ")
        if self.n_used < len(self.coefficients):
            raise InvalidParameterError("Fewer observations than parameters")

    def coef(self, name='beta'):
        return self.coefficients[name]

    def se(self, name='beta'):
        return self.standard_errors[name]

    def p_value(self, name='beta', null=0.0):
        se = self.standard_errors[name]
        if not np.isfinite(se) or se <= 0:
            return float('nan')
        t = (self.coefficients[name] - null) / se
        if self.df_resid is None or self.df_resid <= 0:
            return float(2 * stats.norm.sf(abs(t)))
        return float(2 * stats.t.sf(abs(t), self.df_resid))

    def interval(self, name='beta', level=0.95):
        """Two-sided interval: stored bounds if present, else coef +/- crit*SE."""
        if self.conf_int and name in self.conf_int:
            return tuple(self.conf_int[name])
        se = self.standard_errors[name]
        q = 0.5 + level / 2
        crit = stats.norm.ppf(q) if not self.df_resid else stats.t.ppf(q, self.df_resid)
        coef = self.coefficients[name]
        return (coef - crit * se, coef + crit * se)

    def with_standard_errors(self, standard_errors, se_kind, se_detail=None, conf_int=None,
                             df_resid=None):
        return RegressionResult(
            coefficients=dict(self.coefficients),
            standard_errors=dict(standard_errors),
            se_kind=se_kind,
            r_squared=self.r_squared,
            n_used=self.n_used,
            residuals=self.residuals,
            se_detail=se_detail,
            df_resid=df_resid,
            n_clusters=self.n_clusters,
            conf_int=conf_int,
        )

    def to_dict(self):
        return {
            'coefficients': {k: float(v) for k, v in self.coefficients.items()},
            'standard_errors': {k: float(v) for k, v in self.standard_errors.items()},
            'p_values': {k: self.p_value(k) for k in self.coefficients},
            'se_kind': self.se_kind,
            'se_detail': self.se_detail,
            'r_squared': float(self.r_squared),
            'n_used': int(self.n_used),
            'n_clusters': self.n_clusters,
            'df_resid': self.df_resid,
            'conf_int': {k: [float(a), float(b)] for k, (a, b) in (self.conf_int or {}).items()},
        }


@dataclass(frozen=True)
class FESpec:
    """Fixed-effects regression of ``outcome`` on one ``regressor``."""
    outcome: str
    regressor: str
    fixed_effects: tuple
    cluster_key: str

    def __post_init__(self):
        object.__setattr__(self, 'fixed_effects', tuple(self.fixed_effects))
        names = [self.outcome, self.regressor, *self.fixed_effects]
        if len(set(names)) != len(names):
            raise InvalidParameterError(f"FESpec column names must be distinct: {names}")
        if not self.fixed_effects:
            raise InvalidParameterError("FESpec needs at least one fixed effect")

    def to_dict(self):
        return {'outcome': self.outcome, 'regressor': self.regressor,
                'fixed_effects': list(self.fixed_effects), 'cluster_key': self.cluster_key}


@dataclass(frozen=True, eq=False)
class BootstrapResult:
    """Full-pipeline bootstrap of the subset slope."""
    estimate: float
    standard_error: float
    interval: tuple
    replicates: int
    estimates: np.ndarray = field(repr=False)
    failures: dict = field(default_factory=dict)
    seed: int = 0

    @property
    def n_failed(self):
        return int(sum(self.failures.values()))

    @property
    def n_succeeded(self):
        return int(np.isfinite(self.estimates).sum())

    def covers(self, value):
        return self.interval[0] <= value <= self.interval[1]

    def to_dict(self):
        return {
            'estimate': float(self.estimate),
            'standard_error': float(self.standard_error),
            'interval': [float(v) for v in self.interval],
            'replicates': int(self.replicates),
            'n_succeeded': self.n_succeeded,
            'n_failed': self.n_failed,
            'failures': dict(self.failures),
            'seed': int(self.seed),
        }


@dataclass(frozen=True)
class BootstrapConfig:
    """Settings for the full-pipeline bootstrap (fit, label, select, regress).

    With ``warm_start`` each replicate starts npEM from the point fit's
    posteriors of its resampled rows, runs a single restart and evaluates
    the kernel step on the binned grid.
    """
    m: int
    fit_options: object
    rule: object
    target: str
    p: float
    replicates: int = None
    seed: int = 0
    regressor: object = 0
    intercept: bool = True
    threads: int = None
    warm_start: bool = True

    def __post_init__(self):
        cfg = get_config()
        if self.replicates is None:
            object.__setattr__(self, 'replicates', cfg.BOOTSTRAP_REPLICATES)
        if int(self.replicates) < cfg.MIN_BOOTSTRAP_REPLICATES:
            raise InvalidParameterError(
                f"Bootstrap needs at least {cfg.MIN_BOOTSTRAP_REPLICATES} replicates, got {self.replicates}"
            )
        if not 0.0 <= float(self.p) <= 1.0:
            raise InvalidParameterError(f"Threshold p must lie in [0, 1], got {self.p}")

    def to_dict(self):
        return {
            'm': int(self.m),
            'fit_options': self.fit_options.to_dict(),
            'rule': self.rule.to_dict(),
            'target': self.target,
            'p': float(self.p),
            'replicates': int(self.replicates),
            'seed': int(self.seed),
            'regressor': self.regressor,
            'intercept': bool(self.intercept),
            'warm_start': bool(self.warm_start),
        }
