# app/services/regression_service.py
"""Second-stage estimators: OLS, OLS on a selected subset, fixed-effects regression with clustered errors."""

import logging
import warnings

import numpy as np
import pandas as pd
import statsmodels.api as sm
from scipy import stats

from ..exceptions import (
    CollinearFixedEffectsError, DegenerateRegressorError, EmptySelectionError,
    InsufficientDataError, InvalidParameterError, LengthMismatchError, SchemaMismatchError,
)
from ..extensions import get_config
from ..models.regression import SE_CLASSICAL, SE_CLUSTER, RegressionResult

logger = logging.getLogger(__name__)


class RegressionService:
    """Least-squares estimators used after subset selection."""

    @staticmethod
    def ols(y, x, intercept=True):
        """
        Simple regression of y on x.

        Args:
            y, x: equal-length real vectors
            intercept: include alpha

        Returns:
            RegressionResult with classical standard errors. With zero
            residual degrees of freedom the standard errors are NaN.
        """
        y = np.asarray(y, dtype=float).ravel()
        x = np.asarray(x, dtype=float).ravel()
        if y.size != x.size:
            raise LengthMismatchError(f"y ({y.size}) and x ({x.size}) differ in length")
        k = 2 if intercept else 1
        if y.size < k or y.size == 0:
            raise InsufficientDataError(f"Need at least {k} observations, got {y.size}")
        if intercept and not np.var(x) > 0:
            raise DegenerateRegressorError("Regressor has zero variance")
        if not intercept and not np.any(x != 0):
            raise DegenerateRegressorError("Regressor is identically zero")

        names = ['alpha', 'beta'] if intercept else ['beta']
        design = np.column_stack([np.ones_like(x), x]) if intercept else x[:, None]
        with warnings.catch_warnings(), np.errstate(divide='ignore', invalid='ignore'):
            warnings.simplefilter('ignore')
            res = sm.OLS(y, design).fit()
            bse = np.asarray(res.bse, dtype=float) if res.df_resid > 0 else np.full(k, np.nan)
            r2 = float(res.rsquared)

        params = np.asarray(res.params, dtype=float)
        return RegressionResult(
            coefficients=dict(zip(names, params.tolist())),
            standard_errors=dict(zip(names, bse.tolist())),
            se_kind=SE_CLASSICAL,
            r_squared=float(np.clip(r2, 0.0, 1.0)) if np.isfinite(r2) else float('nan'),
            n_used=int(y.size),
            residuals=np.asarray(res.resid, dtype=float),
            df_resid=float(res.df_resid),
        )

    @classmethod
    def ols_on_subset(cls, y, x, selection, intercept=True):
        """ols restricted to the rows of a SelectionResult."""
        if selection is None or selection.size == 0:
            raise EmptySelectionError("Selection is empty")
        y = np.asarray(y, dtype=float).ravel()
        x = np.asarray(x, dtype=float).ravel()
        idx = np.asarray(selection.indices)
        if idx.max() >= y.size:
            raise LengthMismatchError("Selection indices exceed the data length")
        return cls.ols(y[idx], x[idx], intercept=intercept)

    @staticmethod
    def demean(frame, columns, fixed_effects, tolerance=None, max_iterations=None):
        """
        Sweep out every fixed-effect dimension by alternating projections.

        Each pass subtracts group means for one dimension after another until
        the demeaned columns change by less than ``tolerance``.

        Returns:
            (DataFrame of demeaned columns, iterations)
        """
        cfg = get_config()
        tolerance = cfg.DEMEAN_TOLERANCE if tolerance is None else tolerance
        max_iterations = cfg.DEMEAN_MAX_ITERATIONS if max_iterations is None else max_iterations

        codes = [pd.factorize(frame[fe], sort=True)[0] for fe in fixed_effects]
        counts = [np.bincount(c) for c in codes]
        values = frame[list(columns)].to_numpy(dtype=float).copy()

        for iteration in range(1, max_iterations + 1):
            previous = values.copy()
            for code, count in zip(codes, counts):
                for col in range(values.shape[1]):
                    sums = np.bincount(code, weights=values[:, col], minlength=count.size)
                    values[:, col] -= (sums / count)[code]
            if np.max(np.abs(values - previous)) < tolerance:
                break
        else:
            logger.warning(f"Demeaning stopped after {max_iterations} passes without converging")
        return pd.DataFrame(values, columns=list(columns), index=frame.index), iteration

    @classmethod
    def fe_regression(cls, panel, spec):
        """
        Regression of outcome on regressor with multi-way fixed effects.

        Args:
            panel: DataFrame (or PanelTable) containing every column named in spec
            spec: FESpec

        Returns:
            RegressionResult with cluster-robust standard errors
            (correction G/(G-1) * (n-1)/(n-k))
        """
        frame = getattr(panel, 'frame', panel)
        for col in (spec.outcome, spec.regressor, *spec.fixed_effects, spec.cluster_key):
            if col not in frame.columns:
                raise SchemaMismatchError(col, frame.columns)
        for fe in spec.fixed_effects:
            if frame[fe].nunique() < 2:
                raise InvalidParameterError(f"Fixed effect '{fe}' needs at least 2 levels")

        demeaned, passes = cls.demean(frame, [spec.outcome, spec.regressor], spec.fixed_effects)
        y = demeaned[spec.outcome].to_numpy()
        x = demeaned[spec.regressor].to_numpy()
        scale = max(1.0, float(np.sum(frame[spec.regressor].to_numpy(dtype=float) ** 2)))
        if np.sum(x ** 2) <= 1e-20 * scale:
            raise CollinearFixedEffectsError(
                f"Fixed effects {list(spec.fixed_effects)} absorb all variation in '{spec.regressor}'"
            )

        groups = pd.factorize(frame[spec.cluster_key], sort=True)[0]
        n_clusters = int(groups.max()) + 1
        if n_clusters < 2:
            raise InvalidParameterError(f"Clustering on '{spec.cluster_key}' needs at least 2 clusters")

        with warnings.catch_warnings():
            warnings.simplefilter('ignore')
            res = sm.OLS(y, x[:, None]).fit(
                cov_type='cluster', cov_kwds={'groups': groups, 'use_correction': True}
            )
        beta = float(np.asarray(res.params)[0])
        se = float(np.asarray(res.bse)[0])
        crit = stats.t.ppf(0.975, n_clusters - 1)
        ssr = float(np.sum(np.asarray(res.resid) ** 2))
        tss = float(np.sum(y ** 2))
        logger.info(
            f"FE regression: beta={beta:.4f} (se {se:.4f}), n={y.size}, clusters={n_clusters}, "
            f"demeaning passes={passes}"
        )
        return RegressionResult(
            coefficients={'beta': beta},
            standard_errors={'beta': se},
            se_kind=SE_CLUSTER,
            se_detail=spec.cluster_key,
            r_squared=float(np.clip(1.0 - ssr / tss, 0.0, 1.0)) if tss > 0 else float('nan'),
            n_used=int(y.size),
            residuals=np.asarray(res.resid, dtype=float),
            df_resid=float(n_clusters - 1),
            n_clusters=n_clusters,
            conf_int={'beta': (beta - crit * se, beta + crit * se)},
        )
