# app/services/npem_service.py
"""Nonparametric EM for finite mixtures with conditionally independent coordinates."""

import logging
import time
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy.integrate import trapezoid
from scipy.special import logsumexp
from sklearn.cluster import KMeans

from ..exceptions import InsufficientDataError, InvalidOptionsError, InvalidParameterError
from ..extensions import STREAM_NPEM, derive_seed, get_config, seed_stream, worker_pool
from ..models.density import WeightedSample
from ..models.mixture import DataMatrix, FitOptions, MixtureFit
from .kde_service import (
    binned_grid, kde_eval, kernel_matrix, pooled_bandwidths, weighted_silverman_bandwidth,
)

logger = logging.getLogger(__name__)

SATISFIED = 'satisfied'
VIOLATED = 'violated'


@dataclass
class _EMRun:
    posteriors: np.ndarray
    iterations: int
    converged: bool
    trace: list
    init: str

    @property
    def score(self):
        return self.trace[-1] if np.isfinite(self.trace[-1]) else -np.inf


class NPEMService:
    """
    npEM estimator

    The EM iterations alternate an E-step (posteriors from weights and
    per-coordinate densities), a weight update (column means of the
    posteriors) and a density update (posterior-weighted histogram per
    coordinate and component, on bins fixed from the pooled sample). Once
    the best restart has converged, one posterior-weighted Gaussian KDE
    update gives the reported densities and the final E-step gives the
    reported posteriors.

    A histogram puts no mass in bins its rows do not occupy, so a component
    with bounded support keeps that support across iterations and the loop
    is plain EM on the binned likelihood.
    """

    @staticmethod
    def check_identifiability(m, r):
        """Necessary condition 2^r - 1 >= m*r + 1 for nonparametric identification."""
        if int(m) < 1 or int(r) < 1:
            raise InvalidParameterError(f"m and r must be >= 1, got m={m}, r={r}")
        return SATISFIED if 2 ** int(r) - 1 >= int(m) * int(r) + 1 else VIOLATED

    @classmethod
    def fit(cls, data, m, options=None, initial_posteriors=None):
        """
        Fit an m-component mixture.

        Args:
            data: DataMatrix (n x r)
            m: number of components
            options: FitOptions (config defaults when None)
            initial_posteriors: optional n x m starting posteriors; when given
                a single run starts from them and ``options.restarts`` is ignored

        Returns:
            MixtureFit with components ordered by ascending weight
        """
        options = options or FitOptions()
        if not isinstance(options, FitOptions):
            raise InvalidOptionsError("options must be a FitOptions")
        if not isinstance(data, DataMatrix):
            data = DataMatrix(data)
        m = int(m)
        if m < 1:
            raise InvalidParameterError(f"m must be >= 1, got {m}")
        if data.n < m * data.r:
            raise InsufficientDataError(
                f"npEM needs n >= m*r rows (n={data.n}, m={m}, r={data.r})"
            )
        if cls.check_identifiability(m, data.r) == VIOLATED:
            logger.warning(
                f"Identifiability condition 2^r-1 >= m*r+1 violated for m={m}, r={data.r}; "
                f"proceeding anyway"
            )
        if initial_posteriors is not None:
            initial_posteriors = _check_posteriors(initial_posteriors, data.n, m)

        cfg = get_config()
        histograms = _HistogramEngine(data.values, options.histogram_bins, cfg.MAX_HISTOGRAM_BINS)
        bandwidths = pooled_bandwidths(data.values, options.bandwidth_rule)
        engine = _DensityEngine(data.values, bandwidths, options.adaptive_bandwidth, cfg, options.binned)

        n_runs = 1 if initial_posteriors is not None else int(options.restarts)
        logger.info(
            f"npEM fit: n={data.n}, r={data.r}, m={m}, restarts={n_runs}, "
            f"bins={histograms.sizes}, engine={engine.mode}"
        )
        start_time = time.perf_counter()

        if n_runs == 1:
            runs = [cls._run_restart(data, m, histograms, options, 0, initial_posteriors)]
        else:
            with worker_pool(options.threads) as pool:
                runs = list(pool.map(lambda i: cls._run_restart(data, m, histograms, options, i),
                                     range(n_runs)))

        scores = [run.score for run in runs]
        best = int(np.argmax(scores))
        chosen = runs[best]
        for i, run in enumerate(runs):
            logger.debug(
                f"  restart {i} ({run.init}): loglik={run.trace[-1]:.6f}, "
                f"iterations={run.iterations}, converged={run.converged}"
            )
        if not chosen.converged:
            logger.warning(
                f"npEM did not converge within {options.max_iterations} iterations "
                f"(best restart {best})"
            )

        result = cls._smooth(data, chosen, engine, options)
        order = np.argsort(result.weights, kind='stable')
        result = result.permuted(order)
        result.restart_scores = tuple(float(s) for s in scores)

        elapsed = time.perf_counter() - start_time
        logger.info(
            f"npEM finished in {elapsed:.2f}s: weights={np.round(result.weights, 4).tolist()}, "
            f"loglik={result.loglik:.4f}"
        )
        return result

    @classmethod
    def _run_restart(cls, data, m, histograms, options, restart_index, initial=None):
        init = 'given' if initial is not None else cls._restart_init(options, restart_index)
        if initial is not None:
            posteriors = initial
        else:
            posteriors = cls._initial_posteriors(data.values, m, options, restart_index, init)
        prev_weights = None
        trace = []
        converged = False
        iterations = 0

        for iterations in range(1, int(options.max_iterations) + 1):
            weights = posteriors.mean(axis=0)
            weights = weights / weights.sum()
            log_dens = histograms.log_densities(posteriors)
            with np.errstate(divide='ignore'):
                log_weights = np.log(weights)
            new_post, loglik = _e_step(log_weights, log_dens)
            trace.append(loglik)

            change = np.mean(np.abs(new_post - posteriors))
            if prev_weights is not None:
                change += np.max(np.abs(weights - prev_weights))
            posteriors = new_post
            prev_weights = weights
            if change < options.tolerance:
                converged = True
                break

        return _EMRun(posteriors=posteriors, iterations=iterations, converged=converged,
                      trace=trace, init=init)

    @staticmethod
    def _smooth(data, run, engine, options):
        """One kernel density update from the converged posteriors, then the final E-step."""
        density_weights = run.posteriors
        weights = density_weights.mean(axis=0)
        weights = weights / weights.sum()
        log_dens = engine.log_densities(density_weights)
        with np.errstate(divide='ignore'):
            log_weights = np.log(weights)
        posteriors, _ = _e_step(log_weights, log_dens)
        return MixtureFit(
            data=data,
            weights=weights,
            posteriors=posteriors,
            bandwidths=engine.current_bandwidths(density_weights),
            density_weights=density_weights,
            iterations_run=run.iterations,
            converged=run.converged,
            loglik=run.trace[-1],
            loglik_trace=run.trace,
            options=options,
        )

    @staticmethod
    def _restart_init(options, restart_index):
        # with k-means, odd restarts start from random posteriors instead
        if options.init == FitOptions.INIT_KMEANS and restart_index % 2 == 1:
            return FitOptions.INIT_RANDOM
        return options.init

    @staticmethod
    def _initial_posteriors(values, m, options, restart_index, init):
        n = values.shape[0]
        if m == 1:
            return np.ones((n, 1))
        if init == FitOptions.INIT_KMEANS:
            smoothing = get_config().INIT_SMOOTHING
            seed = derive_seed(options.seed, STREAM_NPEM, restart_index) % (2 ** 32)
            labels = KMeans(n_clusters=m, n_init=1, random_state=seed).fit(values).labels_
            post = np.full((n, m), smoothing / m)
            post[np.arange(n), labels] += 1.0 - smoothing
            return post
        rng = seed_stream(options.seed, STREAM_NPEM, restart_index)
        return rng.dirichlet(np.ones(m), size=n)

    @staticmethod
    def posterior_of(fit, row):
        """Posterior over components for one new r-vector under a frozen fit."""
        row = np.asarray(row, dtype=float).ravel()
        if row.size != fit.r:
            raise InvalidParameterError(f"Row has {row.size} coordinates, fit has {fit.r}")
        return NPEMService.posteriors_at(fit, row[None, :])[0]

    @staticmethod
    def posteriors_at(fit, rows):
        """Posterior matrix for several rows (one E-step, no update)."""
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        log_dens = np.zeros((rows.shape[0], fit.m))
        with np.errstate(divide='ignore'):
            for j in range(fit.m):
                for k in range(fit.r):
                    log_dens[:, j] += np.log(fit.density(j, k, rows[:, k]))
            log_w = np.log(fit.weights)
        post, _ = _e_step(log_w, log_dens)
        return post

    @classmethod
    def fit_from_densities(cls, data, weights, densities):
        """
        Build a MixtureFit from known weights and density callables.

        Args:
            data: DataMatrix
            weights: m component weights
            densities: m x r grid of FrozenDensity (or anything with .evaluate)

        Returns:
            MixtureFit whose posteriors are the exact Bayes posteriors
        """
        weights = np.asarray(weights, dtype=float)
        weights = weights / weights.sum()
        oracle = MixtureFit(
            data=data,
            weights=weights,
            posteriors=np.full((data.n, weights.size), 1.0 / weights.size),
            bandwidths=np.full(data.r, np.nan),
            frozen_densities=densities,
        )
        posteriors = cls.posteriors_at(oracle, data.values)
        return MixtureFit(
            data=data,
            weights=weights,
            posteriors=posteriors,
            bandwidths=oracle.bandwidths,
            frozen_densities=densities,
        )

    @staticmethod
    def density_curves(fit, grid_points=None, padding=3.0):
        """
        Evaluate every component density on a regular grid per coordinate.

        Returns:
            DataFrame with columns coordinate, x, component, density
        """
        grid_points = int(grid_points or get_config().DENSITY_GRID_POINTS)
        frames = []
        for k, name in enumerate(fit.data.columns):
            col = fit.data.values[:, k]
            h = np.nanmax([fit.bandwidth(j, k) for j in range(fit.m)])
            pad = padding * h if np.isfinite(h) else 0.0
            grid = np.linspace(col.min() - pad, col.max() + pad, grid_points)
            for j in range(fit.m):
                frames.append(pd.DataFrame({
                    'coordinate': name,
                    'x': grid,
                    'component': j,
                    'density': fit.density(j, k, grid),
                }))
        return pd.concat(frames, ignore_index=True)

    @staticmethod
    def integrated_absolute_error(fit, component, coordinate, true_pdf, lower, upper, grid_points=None):
        """Trapezoid integral of |f_hat - f_true| over [lower, upper]."""
        grid_points = int(grid_points or get_config().DENSITY_GRID_POINTS)
        grid = np.linspace(lower, upper, grid_points)
        diff = np.abs(fit.density(component, coordinate, grid) - true_pdf(grid))
        return float(trapezoid(diff, grid))


def _e_step(log_weights, log_dens):
    """Row-normalized posteriors and the log-likelihood under the given densities."""
    log_joint = log_weights[None, :] + log_dens
    log_norm = logsumexp(log_joint, axis=1)
    assert np.all(np.isfinite(log_norm)), "observation with zero density under every component"
    post = np.exp(log_joint - log_norm[:, None])
    post /= post.sum(axis=1, keepdims=True)
    return post, float(log_norm.sum())


class _DensityEngine:
    """Evaluates log f_jk(x_ik) at the training points for given density weights.

    kernel: cached n x n kernel matrix per coordinate, density = K @ w.
    binned: linear-binned KDE per component and coordinate (large n, or on request).
    adaptive: per-component weighted Silverman bandwidths, exact evaluation.
    """

    def __init__(self, values, bandwidths, adaptive, cfg, binned=False):
        self.values = values
        self.bandwidths = bandwidths
        self.adaptive = adaptive
        self.grid_size = cfg.BINNED_GRID_SIZE
        n, r = values.shape
        if adaptive:
            self.mode = 'adaptive'
            self.kernels = None
        elif not binned and n * n * r <= cfg.KERNEL_MATRIX_CELLS:
            self.mode = 'kernel'
            self.kernels = [kernel_matrix(values[:, k], bandwidths[k]) for k in range(r)]
        else:
            self.mode = 'binned'
            self.kernels = None

    def current_bandwidths(self, density_weights):
        if not self.adaptive:
            return self.bandwidths
        return self._adaptive_bandwidths(density_weights)

    def _adaptive_bandwidths(self, density_weights):
        n, r = self.values.shape
        m = density_weights.shape[1]
        out = np.empty((m, r))
        for j in range(m):
            for k in range(r):
                if density_weights[:, j].sum() > 0:
                    out[j, k] = weighted_silverman_bandwidth(self.values[:, k], density_weights[:, j])
                else:
                    out[j, k] = self.bandwidths[k]
        return out

    def log_densities(self, density_weights):
        n, r = self.values.shape
        m = density_weights.shape[1]
        col_sums = density_weights.sum(axis=0)
        log_dens = np.zeros((n, m))
        bandwidths = self._adaptive_bandwidths(density_weights) if self.adaptive else None

        with np.errstate(divide='ignore'):
            for j in range(m):
                if not col_sums[j] > 0:
                    # empty component: weight is zero, so its density never matters
                    continue
                w = density_weights[:, j]
                for k in range(r):
                    if self.mode == 'kernel':
                        dens = self.kernels[k] @ (w / col_sums[j])
                    elif self.mode == 'binned':
                        grid, curve = binned_grid(
                            WeightedSample(self.values[:, k], w), self.bandwidths[k], self.grid_size
                        )
                        dens = np.interp(self.values[:, k], grid, curve)
                    else:
                        dens = kde_eval(WeightedSample(self.values[:, k], w), bandwidths[j, k],
                                        self.values[:, k])
                    log_dens[:, j] += np.log(dens)
        return log_dens


class _HistogramEngine:
    """Per-coordinate histogram densities on bins fixed from the pooled column."""

    def __init__(self, values, rule, max_bins):
        n, r = values.shape
        self.bins = np.empty((n, r), dtype=np.intp)
        self.log_widths = []
        self.sizes = []
        for k in range(r):
            column = values[:, k]
            edges = np.histogram_bin_edges(column, bins=rule)
            if edges.size - 1 > max_bins:
                edges = np.histogram_bin_edges(column, bins=max_bins)
            index = np.searchsorted(edges, column, side='right') - 1
            self.bins[:, k] = np.clip(index, 0, edges.size - 2)
            self.log_widths.append(np.log(np.diff(edges)))
            self.sizes.append(edges.size - 1)

    def log_densities(self, density_weights):
        n, r = self.bins.shape
        m = density_weights.shape[1]
        col_sums = density_weights.sum(axis=0)
        log_dens = np.zeros((n, m))
        with np.errstate(divide='ignore'):
            for j in range(m):
                if not col_sums[j] > 0:
                    continue
                for k in range(r):
                    mass = np.bincount(self.bins[:, k], weights=density_weights[:, j],
                                       minlength=self.sizes[k])
                    log_bin = np.log(mass / col_sums[j]) - self.log_widths[k]
                    log_dens[:, j] += log_bin[self.bins[:, k]]
        return log_dens


def _check_posteriors(posteriors, n, m):
    post = np.asarray(posteriors, dtype=float)
    if post.shape != (n, m):
        raise InvalidParameterError(f"initial_posteriors must be {n} x {m}, got {post.shape}")
    if not np.all(np.isfinite(post)) or np.any(post < 0):
        raise InvalidParameterError("initial_posteriors must be finite and non-negative")
    sums = post.sum(axis=1, keepdims=True)
    if np.any(sums <= 0):
        raise InvalidParameterError("Every initial posterior row needs positive mass")
    return post / sums
