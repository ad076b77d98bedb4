# app/jobs/monte_carlo_job.py
"""Monte Carlo experiments on the two-component uniform design and the pricing panel."""

import logging
import time

import numpy as np
from scipy import stats

from ..exceptions import RECOVERABLE_REPLICATE_ERRORS
from ..models.density import BandwidthRule
from ..models.labels import ENDOGENOUS, EXOGENOUS
from ..models.mixture import FitOptions
from ..models.simulation import PricingSimConfig, UniformMixtureConfig
from ..services.labeling_service import LabelingService
from ..services.npem_service import NPEMService
from ..services.regression_service import RegressionService
from ..services.simulation_service import ORACLE_LABELS, SimulationService
from .pipeline_job import UNIFORM_RULE, published_shifts, run_panel_pipeline, run_subset_pipeline

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLDS = (0.5, 0.7, 0.9)
DENSITY_RANGE = (-0.5, 2.5)
# Silverman's normal reference oversmooths the uniform edges at T=2000
DENSITY_BANDWIDTH = 0.04


def naive_bias(T=100_000, seed=0, beta=2.0, pi=0.6):
    """Full-sample OLS slope against its probability limit."""
    data = SimulationService.simulate_uniform_mixture(UniformMixtureConfig(T=T, pi=pi, beta=beta, seed=seed))
    result = RegressionService.ols(data.outcome, data.data.column('X'))
    plim = SimulationService.uniform_plim(beta, pi)
    return {'beta': result.coef(), 'plim': plim, 'gap': result.coef() - plim}


def subset_consistency(seeds, T=2000, p=0.9, replicates=200, options=None, threads=None):
    """
    Pipeline slope and bootstrap interval coverage of the true slope, over seeds.

    Returns:
        dict: betas, covered, mean_beta, coverage
    """
    options = options or FitOptions()
    start_time = time.perf_counter()
    betas, covered = [], []
    for seed in seeds:
        data = SimulationService.simulate_uniform_mixture(UniformMixtureConfig(T=T, seed=seed))
        run = run_subset_pipeline(data.data, data.outcome, p=p, options=options.with_seed(seed),
                                  bootstrap=replicates, threads=threads)
        beta = run['subset'].coef()
        betas.append(beta)
        covered.append(run['bootstrap'].covers(data.config.beta) if run['bootstrap'] else False)
        logger.debug(f"seed {seed}: beta={beta:.4f}")
    betas = np.asarray(betas)
    elapsed = time.perf_counter() - start_time
    logger.info(f"Subset consistency over {len(betas)} seeds in {elapsed:.1f}s: mean beta={betas.mean():.4f}")
    return {
        'betas': betas,
        'covered': np.asarray(covered, dtype=bool),
        'mean_beta': float(betas.mean()),
        'coverage': float(np.mean(covered)),
    }


def weight_recovery(seeds, T=2000, options=None, tolerance=0.05):
    """Estimated exogenous weight per seed and how many land within ``tolerance`` of pi."""
    options = options or FitOptions()
    weights = []
    for seed in seeds:
        data = SimulationService.simulate_uniform_mixture(UniformMixtureConfig(T=T, seed=seed))
        fit = NPEMService.fit(data.data, 2, options.with_seed(seed))
        labels = LabelingService.label_components(fit, UNIFORM_RULE)
        weights.append(float(fit.weights[labels.index_of(EXOGENOUS)]))
    weights = np.asarray(weights)
    pi = UniformMixtureConfig().pi
    return {'weights': weights, 'n_within': int(np.sum(np.abs(weights - pi) <= tolerance))}


def oracle_selection(T=2000, seed=0, p=0.9):
    """Selected rows under the true densities and the rows lying outside the unit cube."""
    data = SimulationService.simulate_uniform_mixture(UniformMixtureConfig(T=T, seed=seed))
    fit = SimulationService.uniform_oracle_fit(data.data, data.config.pi)
    selection = LabelingService.select_subset(fit, ORACLE_LABELS, EXOGENOUS, p)
    outside = np.flatnonzero(data.data.values.max(axis=1) > 1.0)
    return {
        'selection': selection,
        'outside': outside,
        'identical': bool(np.array_equal(selection.indices, outside)),
        'fraction': selection.fraction,
    }


def bias_decay(seeds, T=2000, thresholds=DEFAULT_THRESHOLDS):
    """Mean |subset beta - beta| per threshold with oracle posteriors."""
    errors = {p: [] for p in thresholds}
    for seed in seeds:
        data = SimulationService.simulate_uniform_mixture(UniformMixtureConfig(T=T, seed=seed))
        fit = SimulationService.uniform_oracle_fit(data.data, data.config.pi)
        x = data.data.column('X')
        for p in thresholds:
            try:
                selection = LabelingService.select_subset(fit, ORACLE_LABELS, EXOGENOUS, p)
                result = RegressionService.ols_on_subset(data.outcome, x, selection)
            except RECOVERABLE_REPLICATE_ERRORS as e:
                logger.debug(f"seed {seed}, p={p}: {e}")
                continue
            errors[p].append(abs(result.coef() - data.config.beta))
    return {p: float(np.mean(v)) if v else float('nan') for p, v in errors.items()}


def density_recovery(T=2000, seed=0, options=None, grid_points=None):
    """
    Integrated absolute error of every estimated coordinate density.

    Returns:
        dict: {(label, coordinate): error} plus 'mean'
    """
    options = options or FitOptions(bandwidth_rule=BandwidthRule.fixed(DENSITY_BANDWIDTH))
    data = SimulationService.simulate_uniform_mixture(UniformMixtureConfig(T=T, seed=seed))
    fit = NPEMService.fit(data.data, 2, options.with_seed(seed))
    labels = LabelingService.label_components(fit, UNIFORM_RULE)
    truth = {ENDOGENOUS: stats.uniform(0.0, 1.0).pdf, EXOGENOUS: stats.uniform(0.0, 2.0).pdf}
    errors = {}
    for label, pdf in truth.items():
        j = labels.index_of(label)
        for k, name in enumerate(data.data.columns):
            errors[(label, name)] = NPEMService.integrated_absolute_error(
                fit, j, k, pdf, *DENSITY_RANGE, grid_points=grid_points)
    errors['mean'] = float(np.mean(list(errors.values())))
    return errors


def pricing_recovery(config=None, options=None):
    """Panel pipeline on a simulated panel, scored against the generator's regimes."""
    config = config or PricingSimConfig()
    dataset = SimulationService.simulate_pricing(config)
    run = run_panel_pipeline(dataset.panel, truth=dataset.truth, options=options,
                             published=published_shifts(config))
    run['elasticity'] = float(config.elasticity)
    return run
