# app/jobs/pipeline_job.py
"""Pipeline jobs: mixture-based subset regression and the pricing-panel analysis."""

import logging
import time

import numpy as np
import pandas as pd

from ..exceptions import (
    AmbiguousLabelingError, EmptyResultError, ExcessiveMissingnessError, NoQualifyingWindowError,
)
from ..models.labels import ENDOGENOUS, EXOGENOUS, PRICING_ORDERING, LabelRule
from ..models.mixture import FitOptions
from ..models.panel import DROP_UNIT, WideMatrixSpec
from ..models.regression import BootstrapConfig
from ..services import experiment_service, panel_service
from ..services.bootstrap_service import BootstrapService, estimate_subset_slope
from ..services.labeling_service import LabelingService
from ..services.npem_service import NPEMService
from ..services.regression_service import RegressionService
from ..utils.helpers import regression_table

logger = logging.getLogger(__name__)


def moment_rule(column):
    """The component with the higher posterior mean of ``column`` is the exogenous one."""
    return LabelRule.moment_order(coordinates=(column,), ordering=(EXOGENOUS, ENDOGENOUS))


UNIFORM_RULE = moment_rule('X')


def run_subset_pipeline(data, y, m=2, p=0.9, rule=None, target=EXOGENOUS, options=None,
                        regressor=0, bootstrap=None, threads=None):
    """
    Fit, label, keep the high-posterior rows and regress, with the full-sample OLS alongside.

    Args:
        data: DataMatrix of mixture coordinates
        y: outcome vector
        bootstrap: number of full-pipeline bootstrap replicates (None = skip)

    Returns:
        dict: fit, labels, selection, full, subset, bootstrap, table
    """
    options = options or FitOptions()
    if rule is None:
        rule = moment_rule(data.columns[data.column_index(regressor)])
    logger.info(f"Starting subset pipeline: n={data.n}, m={m}, p={p}, target={target}")
    start_time = time.perf_counter()

    try:
        x = data.column(data.column_index(regressor))
        full = RegressionService.ols(y, x)
        estimate = estimate_subset_slope(data, y, m, options, rule, target, p, regressor=regressor)
        subset = estimate.result

        boot = None
        if bootstrap:
            config = BootstrapConfig(m=m, fit_options=options, rule=rule, target=target, p=p,
                                     replicates=bootstrap, seed=options.seed, regressor=regressor,
                                     threads=threads)
            boot = BootstrapService.bootstrap_pipeline(data, y, config, point_estimate=estimate)
            subset = BootstrapService.attach(subset, boot)

        table = regression_table({'Full sample': full, f"p >= {p:g}": subset})
        elapsed = time.perf_counter() - start_time
        logger.info(
            f"Subset pipeline completed in {elapsed:.2f}s: full beta={full.coef():.4f}, "
            f"subset beta={subset.coef():.4f} on {estimate.selection.size} rows"
        )
        return {
            'fit': estimate.fit,
            'labels': estimate.labels,
            'selection': estimate.selection,
            'full': full,
            'subset': subset,
            'bootstrap': boot,
            'table': table,
        }

    except Exception as e:
        logger.error(f"Subset pipeline failed: {e}", exc_info=True)
        raise


def label_matrix(matrix, options):
    """Fit the three-regime mixture to a wide matrix and label it by the summed log prices."""
    values = matrix.data.values
    if np.all(np.ptp(values, axis=0) == 0.0):
        raise AmbiguousLabelingError(
            f"All {matrix.data.r} coordinates are constant; the pricing regimes cannot be told apart"
        )
    fit = NPEMService.fit(matrix.data, len(PRICING_ORDERING), options)
    rule = LabelRule.moment_order(coordinates=matrix.products, ordering=PRICING_ORDERING)
    return fit, LabelingService.label_components(fit, rule)


def label_group(
demeaned, zone, category, options, threshold=None, cap=None,
                missing_policy=DROP_UNIT):
    """
    Estimate the three-regime mixture for one (zone, category).

    Returns:
        dict: coordinates, matrix, fit, labels, frame (per store-week labels)
    """
    group = demeaned.subset(zone=zone, category=category)
    coordinates = panel_service.select_coordinates(group, threshold, cap)
    spec = WideMatrixSpec(zone=zone, category=category, coordinates=coordinates)
    matrix = panel_service.to_matrix(demeaned, spec, missing_policy)
    fit, labels = label_matrix(matrix, options)
    predicted = LabelingService.assign_argmax_labels(fit, labels)
    return {
        'coordinates': matrix.products,
        'matrix': matrix,
        'fit': fit,
        'labels': labels,
        'frame': experiment_service.labels_frame(matrix.units, predicted, zone, category),
    }


def _did_or_none(panel, labels, window, name):
    try:
        return experiment_service.did_elasticity(panel, labels, window)
    except (NoQualifyingWindowError, EmptyResultError) as e:
        logger.warning(f"No {name} DiD estimate: {e}")
        return None


def run_panel_pipeline(panel, truth=None, options=None, threshold=None, cap=None, window=None,
                       missing_policy=DROP_UNIT, published=None):
    """
    Store-week regime labels and the reports built on them.

    Args:
        panel: PanelTable
        truth: optional documented regimes (category, zone, store, week, regime)
        published: optional {regime: percent} reference price changes

    Returns:
        dict: groups, labels, accuracy, price_change, did, did_documented, notes
    """
    options = options or FitOptions()
    logger.info(f"Starting panel pipeline: {len(panel)} rows")
    start_time = time.perf_counter()

    try:
        demeaned = panel_service.log_demean(panel)
        zones = panel_service.eligible_zones(panel)
        skipped = sorted(set(panel.zones) - set(zones))
        notes = [f"Zone {z} excluded: fewer stores than required" for z in skipped]

        groups, frames = {}, []
        for zone, category in panel.groups():
            if zone not in zones:
                continue
            try:
                result = label_group(demeaned, zone, category, options, threshold, cap, missing_policy)
            except (EmptyResultError, ExcessiveMissingnessError) as e:
                logger.warning(f"Skipping zone {zone}, category {category}: {e}")
                notes.append(f"Zone {zone}, category {category} skipped: {e}")
                continue
            groups[(zone, category)] = result
            frames.append(result['frame'])
            notes.extend(result['matrix'].notes)
            logger.info(f"Labeled zone {zone}, category {category}: {result['labels'].assignment}")

        if not frames:
            raise EmptyResultError("No (zone, category) group could be estimated")
        labels = pd.concat(frames, ignore_index=True)

        accuracy, documented = None, None
        if truth is not None:
            documented = truth.rename(columns={'regime': 'label'})
            merged = labels.merge(documented, on=['category', 'zone', 'store', 'week'],
                                  how='left', suffixes=('', '_true'))
            matched = merged['label_true'].notna()
            accuracy = LabelingService.accuracy_report(
                merged.loc[matched, 'label'].to_numpy(),
                merged.loc[matched, 'label_true'].to_numpy(),
                groups=merged.loc[matched, 'category'].to_numpy(),
            )
            labels = labels.assign(truth=merged['label_true'].to_numpy())

        recovered = experiment_service.price_change_report(panel, labels, window)
        replicated = (experiment_service.price_change_report(panel, documented, window)
                      if documented is not None else None)
        price_change = experiment_service.compare_price_changes(recovered, replicated, published)

        did = _did_or_none(panel, labels, window, 'predicted-label')
        did_documented = (_did_or_none(panel, documented, window, 'documented-label')
                          if documented is not None else None)

        elapsed = time.perf_counter() - start_time
        overall = accuracy['overall']['accuracy'] if accuracy else float('nan')
        logger.info(f"Panel pipeline completed in {elapsed:.2f}s: {len(groups)} groups, "
                    f"accuracy={overall:.3f}")
        return {
            'groups': groups,
            'labels': labels,
            'accuracy': accuracy,
            'price_change': price_change,
            'did': did,
            'did_documented': did_documented,
            'notes': notes,
        }

    except Exception as e:
        logger.error(f"Panel pipeline failed: {e}", exc_info=True)
        raise


def did_summary(did, did_documented=None):
    """Regression-table text with documented and predicted DiD columns."""
    columns = {}
    if did_documented is not None:
        columns['Documented'] = did_documented['result']
    if did is not None:
        columns['Predicted'] = did['result']
    if not columns:
        return ''
    return regression_table(columns, names=('beta',))


def group_summary(groups):
    """One row per estimated (zone, category)."""
    rows = []
    for (zone, category), result in sorted(groups.items()):
        fit = result['fit']
        rows.append({
            'zone': zone,
            'category': category,
            'n_units': fit.n,
            'n_coordinates': fit.r,
            'identifiability': NPEMService.check_identifiability(fit.m, fit.r),
            'converged': bool(fit.converged),
            'iterations': int(fit.iterations_run),
            **{f'weight {label}': float(fit.weights[result['labels'].index_of(label)])
               for label in PRICING_ORDERING},
        })
    return pd.DataFrame(rows)


def published_shifts(config):
    """Generator shifts in percent, as the reference column of the price-change table."""
    return {
        PRICING_ORDERING[0]: 100.0 * float(config.hilo_shift),
        PRICING_ORDERING[2]: 100.0 * float(config.edlp_shift),
    }
