# app/services/labeling_service.py
"""Component labeling, exogenous-subset selection and label accuracy."""

import logging

import numpy as np
import pandas as pd

from ..exceptions import (
    AmbiguousLabelingError, EmptySelectionError, InvalidParameterError, LengthMismatchError,
)
from ..models.labels import CONTROL, ComponentLabels, LabelRule, SelectionResult

logger = logging.getLogger(__name__)


class LabelingService:
    """
    Label-switching resolution and posterior-threshold selection

    Labels come from either the component weights (the larger component is
    the majority label) or from the posterior-weighted mean of a sum of
    coordinates, matched to a known ordering of the labels.
    """

    TIE_TOLERANCE = 1e-9

    @classmethod
    def label_components(cls, fit, rule):
        """
        Attach semantic labels to the components of a fit.

        Args:
            fit: MixtureFit
            rule: LabelRule (arity must equal fit.m)

        Returns:
            ComponentLabels
        """
        if not isinstance(rule, LabelRule):
            raise InvalidParameterError("rule must be a LabelRule")
        if rule.arity != fit.m:
            raise InvalidParameterError(
                f"Label rule has {rule.arity} labels but the fit has {fit.m} components"
            )

        if rule.variant == LabelRule.WEIGHT_ORDER:
            statistic = np.asarray(fit.weights, dtype=float)
        else:
            statistic = cls.moment_statistic(fit, rule.coordinates)
            empty = ~np.isfinite(statistic)
            if np.any(empty):
                raise AmbiguousLabelingError(
                    f"Component(s) {np.flatnonzero(empty).tolist()} carry no posterior mass; "
                    f"their {rule.variant} statistic is undefined"
                )

        ranking = np.argsort(-statistic, kind='stable')
        gaps = np.abs(np.diff(statistic[ranking]))
        if np.any(gaps <= cls.TIE_TOLERANCE):
            raise AmbiguousLabelingError(
                f"Components tie on the {rule.variant} statistic: {np.round(statistic, 12).tolist()}"
            )

        assignment = [None] * fit.m
        for rank, component in enumerate(ranking):
            assignment[component] = rule.labels[rank]
        labels = ComponentLabels(tuple(assignment))
        logger.debug(f"Labeled components {labels.assignment} by {rule.variant} ({statistic.tolist()})")
        return labels

    @staticmethod
    def moment_statistic(fit, coordinates=()):
        """Posterior-weighted mean of the summed coordinates, per component."""
        if coordinates:
            idx = [fit.data.column_index(c) for c in coordinates]
        else:
            idx = list(range(fit.r))
        summed = fit.data.values[:, idx].sum(axis=1)
        mass = fit.posteriors.sum(axis=0)
        with np.errstate(invalid='ignore', divide='ignore'):
            return (fit.posteriors * summed[:, None]).sum(axis=0) / mass

    @staticmethod
    def select_subset(fit, labels, target, p):
        """
        Rows whose posterior for ``target`` is at least ``p``.

        Raises:
            EmptySelectionError: when no row qualifies
        """
        p = float(p)
        if not 0.0 <= p <= 1.0:
            raise InvalidParameterError(f"Threshold p must lie in [0, 1], got {p}")
        component = labels.index_of(target)
        target_post = np.array(fit.posteriors[:, component], dtype=float)
        indices = np.flatnonzero(target_post >= p)
        if indices.size == 0:
            raise EmptySelectionError(
                f"No observation has posterior >= {p} for '{target}' "
                f"(max {target_post.max():.4f})"
            )
        return SelectionResult(indices=indices, threshold=p, target=target,
                               target_posteriors=target_post)

    @staticmethod
    def assign_argmax_labels(posteriors, labels):
        """
        Label each row with its highest-posterior component.

        Exact ties go to Control when Control is among the tied components,
        else to the lowest component index.

        Args:
            posteriors: MixtureFit or n x m array
            labels: ComponentLabels

        Returns:
            numpy array of labels (object dtype)
        """
        post = np.asarray(getattr(posteriors, 'posteriors', posteriors), dtype=float)
        if post.ndim != 2 or post.shape[1] != len(labels):
            raise InvalidParameterError(
                f"Posterior matrix of shape {post.shape} does not match {len(labels)} labels"
            )
        control = labels.assignment.index(CONTROL) if CONTROL in labels.assignment else None
        winners = post.argmax(axis=1)
        if control is not None:
            tied_control = post[:, control] == post.max(axis=1)
            winners = np.where(tied_control, control, winners)
        names = np.asarray(labels.assignment, dtype=object)
        return names[winners]

    @staticmethod
    def accuracy_report(predicted, truth, groups=None):
        """
        Exact-match accuracy, overall and per group.

        Returns:
            dict: {'overall': {...}, 'groups': {group: {'n_rows', 'n_correct', 'accuracy'}}}
        """
        predicted = np.asarray(predicted, dtype=object)
        truth = np.asarray(truth, dtype=object)
        if predicted.shape != truth.shape:
            raise LengthMismatchError(
                f"predicted ({predicted.size}) and truth ({truth.size}) differ in length"
            )
        correct = predicted == truth

        def _row(mask):
            n_rows = int(mask.sum())
            n_correct = int(correct[mask].sum())
            return {
                'n_rows': n_rows,
                'n_correct': n_correct,
                'accuracy': n_correct / n_rows if n_rows else float('nan'),
            }

        report = {'overall': _row(np.ones(correct.shape, dtype=bool)), 'groups': {}}
        if groups is not None:
            groups = np.asarray(groups, dtype=object)
            if groups.shape != correct.shape:
                raise LengthMismatchError("groups must align with predicted labels")
            for group in sorted(set(groups.tolist()), key=str):
                report['groups'][str(group)] = _row(groups == group)
        return report

    @staticmethod
    def accuracy_table(report):
        """Report as a DataFrame with one row per group plus an 'All' row."""
        rows = [{'group': g, **vals} for g, vals in report['groups'].items()]
        rows.append({'group': 'All', **report['overall']})
        return pd.DataFrame(rows, columns=['group', 'n_rows', 'n_correct', 'accuracy'])
