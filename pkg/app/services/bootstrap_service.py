# app/services/bootstrap_service.py
"""Full-pipeline bootstrap: resample rows, re-fit, re-label, re-select, re-regress."""

import logging
import time
from collections import Counter
from dataclasses import dataclass, replace

import numpy as np

from ..exceptions import RECOVERABLE_REPLICATE_ERRORS, TooManyFailedReplicatesError
from ..extensions import STREAM_BOOTSTRAP, derive_seed, get_config, seed_stream, worker_pool
from ..models.regression import SE_BOOTSTRAP, BootstrapResult
from .labeling_service import LabelingService
from .npem_service import NPEMService
from .regression_service import RegressionService

logger = logging.getLogger(__name__)


@dataclass
class SubsetEstimate:
    """Everything one pass of the pipeline produces."""
    fit: object
    labels: object
    selection: object
    result: object


def estimate_subset_slope(data, y, m, options, rule, target, p, regressor=0, intercept=True,
                          initial_posteriors=None):
    """fit -> label -> select -> OLS on the selected rows."""
    fit = NPEMService.fit(data, m, options, initial_posteriors=initial_posteriors)
    labels = LabelingService.label_components(fit, rule)
    selection = LabelingService.select_subset(fit, labels, target, p)
    x = data.column(data.column_index(regressor))
    result = RegressionService.ols_on_subset(y, x, selection, intercept=intercept)
    return SubsetEstimate(fit, labels, selection, result)


class BootstrapService:
    """
    Bootstrap over the entire procedure

    Replicate i draws its rows and its npEM seed from the stream
    (seed, bootstrap, i), so its result depends neither on the number of
    replicates nor on scheduling order.
    """

    @classmethod
    def replicate(cls, data, y, config, index, warm=None):
        """
        Run one bootstrap replicate.

        Args:
            warm: n x m posteriors of the point fit (warm start), or None

        Returns:
            tuple: (beta or nan, failure reason or None)
        """
        rng = seed_stream(config.seed, STREAM_BOOTSTRAP, index)
        rows = rng.integers(0, data.n, size=data.n)
        options = replace(config.fit_options, seed=derive_seed(config.seed, STREAM_BOOTSTRAP, index),
                          threads=1)
        initial = None
        if warm is not None:
            options = replace(options, binned=True)
            initial = warm[rows]
        try:
            est = estimate_subset_slope(
                data.take(rows), np.asarray(y, dtype=float)[rows], config.m, options, config.rule,
                config.target, config.p, regressor=config.regressor, intercept=config.intercept,
                initial_posteriors=initial,
            )
        except RECOVERABLE_REPLICATE_ERRORS as e:
            logger.debug(f"Bootstrap replicate {index} dropped: {type(e).__name__}: {e}")
            return float('nan'), type(e).__name__
        return float(est.result.coef('beta')), None

    @classmethod
    def bootstrap_pipeline(cls, data, y, config, point_estimate=None):
        """
        Bootstrap standard error and percentile interval of the subset slope.

        Args:
            data: DataMatrix of mixture coordinates
            y: outcome vector
            config: BootstrapConfig
            point_estimate: SubsetEstimate on the original sample (computed when None)

        Returns:
            BootstrapResult
        """
        cfg = get_config()
        start_time = time.perf_counter()
        if point_estimate is None:
            point_estimate = estimate_subset_slope(
                data, y, config.m, config.fit_options, config.rule, config.target, config.p,
                regressor=config.regressor, intercept=config.intercept,
            )

        warm = None
        if config.warm_start:
            fit = getattr(point_estimate, 'fit', None)
            warm = getattr(fit, 'density_weights', None)

        logger.info(f"Starting bootstrap: B={config.replicates}, n={data.n}, p={config.p}, "
                    f"warm_start={warm is not None}")
        indices = range(int(config.replicates))
        with worker_pool(config.threads) as pool:
            outcomes = list(pool.map(lambda i: cls.replicate(data, y, config, i, warm), indices))

        estimates = np.array([beta for beta, _ in outcomes])
        failures = Counter(reason for _, reason in outcomes if reason is not None)
        n_failed = sum(failures.values())
        if n_failed > cfg.MAX_FAILED_SHARE * config.replicates:
            raise TooManyFailedReplicatesError(n_failed, config.replicates, cfg.MAX_FAILED_SHARE)
        if n_failed:
            logger.warning(f"{n_failed} of {config.replicates} replicates dropped: {dict(failures)}")

        ok = estimates[np.isfinite(estimates)]
        se = float(np.std(ok, ddof=1))
        low, high = np.percentile(ok, [2.5, 97.5])

        elapsed = time.perf_counter() - start_time
        logger.info(f"Bootstrap completed in {elapsed:.2f}s: se={se:.4f}, interval=({low:.4f}, {high:.4f})")
        return BootstrapResult(
            estimate=float(point_estimate.result.coef('beta')),
            standard_error=se,
            interval=(float(low), float(high)),
            replicates=int(config.replicates),
            estimates=estimates,
            failures=dict(sorted(failures.items())),
            seed=int(config.seed),
        )

    @staticmethod
    def attach(result, boot):
        """The subset regression with its beta SE replaced by the bootstrap SE."""
        standard_errors = dict(result.standard_errors)
        standard_errors['beta'] = boot.standard_error
        return result.with_standard_errors(
            standard_errors, SE_BOOTSTRAP, se_detail=boot.replicates,
            conf_int={'beta': boot.interval},
        )
