import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from app.exceptions import AmbiguousLabelingError, EmptySelectionError, InvalidParameterError, LengthMismatchError
from app.models import (
    CONTROL, EDLP, ENDOGENOUS, EXOGENOUS, HILO, ComponentLabels, DataMatrix, LabelRule, MixtureFit,
)
from app.services import LabelingService, NPEMService, SimulationService
from app.services.simulation_service import ORACLE_LABELS


def make_fit(posteriors, values=None):
    posteriors = np.asarray(posteriors, dtype=float)
    n, m = posteriors.shape
    values = np.arange(n * 3, dtype=float).reshape(n, 3) if values is None else values
    return MixtureFit(
        data=DataMatrix(values),
        weights=posteriors.mean(axis=0),
        posteriors=posteriors,
        bandwidths=np.ones(values.shape[1]),
        density_weights=posteriors,
    )


WEIGHT_RULE = LabelRule.weight_order(EXOGENOUS, ENDOGENOUS)


class TestLabelComponents:
    def test_majority_gets_larger_weight(self):
        fit = make_fit([[0.2, 0.8], [0.4, 0.6], [0.3, 0.7]])
        labels = LabelingService.label_components(fit, WEIGHT_RULE)
        assert labels.assignment == (ENDOGENOUS, EXOGENOUS)

    def test_majority_first_component(self):
        fit = make_fit([[0.9, 0.1], [0.6, 0.4]])
        assert LabelingService.label_components(fit, WEIGHT_RULE).label_of(0) == EXOGENOUS

    def test_moment_rule_on_uniform_data(self, uniform_data, options):
        fit = NPEMService.fit(uniform_data.data, 2, options)
        rule = LabelRule.moment_order(('X',), (EXOGENOUS, ENDOGENOUS))
        labels = LabelingService.label_components(fit, rule)
        means = LabelingService.moment_statistic(fit, ('X',))
        assert labels.label_of(int(np.argmax(means))) == EXOGENOUS
        assert labels.index_of(EXOGENOUS) == 1

    def test_three_regime_ordering(self):
        values = np.array([[0.05, 0.05], [0.0, 0.01], [-0.04, -0.05], [0.04, 0.06], [-0.05, -0.03]])
        post = np.array([[0.1, 0.8, 0.1], [0.2, 0.1, 0.7], [0.8, 0.1, 0.1], [0.1, 0.8, 0.1], [0.7, 0.2, 0.1]])
        fit = make_fit(post, values)
        rule = LabelRule.moment_order((), (HILO, CONTROL, EDLP))
        labels = LabelingService.label_components(fit, rule)
        assert labels.assignment == (EDLP, HILO, CONTROL)

    def test_exact_tie_is_ambiguous(self):
        fit = make_fit([[0.5, 0.5], [0.5, 0.5]])
        with pytest.raises(AmbiguousLabelingError):
            LabelingService.label_components(fit, WEIGHT_RULE)

    def test_component_without_mass_is_ambiguous(self):
        fit = make_fit([[1.0, 0.0], [1.0, 0.0], [1.0, 0.0]])
        rule = LabelRule.moment_order((), (EXOGENOUS, ENDOGENOUS))
        with pytest.raises(AmbiguousLabelingError, match='no posterior mass'):
            LabelingService.label_components(fit, rule)

    @pytest.mark.parametrize('rule', [
        WEIGHT_RULE,
        LabelRule.moment_order(('x1',), (EXOGENOUS, ENDOGENOUS)),
        LabelRule.moment_order((), (HILO, CONTROL, EDLP)),
    ])
    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 10_000))
    def test_relabeling_follows_component_order(self, rule, seed):
        rng = np.random.default_rng(seed)
        fit = make_fit(rng.dirichlet(np.ones(rule.arity), size=30), rng.normal(size=(30, 3)))
        order = rng.permutation(rule.arity)
        labels = LabelingService.label_components(fit, rule)
        relabeled = LabelingService.label_components(fit.permuted(order), rule)
        assert relabeled.assignment == tuple(labels.assignment[j] for j in order)

    def test_arity_mismatch(self):
        fit = make_fit([[0.2, 0.3, 0.5]])
        with pytest.raises(InvalidParameterError):
            LabelingService.label_components(fit, WEIGHT_RULE)

    def test_labels_must_be_distinct(self):
        with pytest.raises(InvalidParameterError):
            LabelRule.weight_order(EXOGENOUS, EXOGENOUS)
        with pytest.raises(InvalidParameterError):
            ComponentLabels((HILO, HILO))


class TestSelectSubset:
    labels = ComponentLabels((ENDOGENOUS, EXOGENOUS))

    def test_zero_threshold_selects_everything(self):
        fit = make_fit([[0.9, 0.1], [0.5, 0.5], [0.0, 1.0]])
        selection = LabelingService.select_subset(fit, self.labels, EXOGENOUS, 0.0)
        assert selection.indices.tolist() == [0, 1, 2]
        assert selection.fraction == 1.0

    def test_threshold_is_inclusive(self):
        fit = make_fit([[0.1, 0.9], [0.5, 0.5], [0.0, 1.0]])
        selection = LabelingService.select_subset(fit, self.labels, EXOGENOUS, 0.9)
        assert selection.indices.tolist() == [0, 2]

    def test_empty_selection(self):
        fit = make_fit([[0.9, 0.1], [0.6, 0.4]])
        with pytest.raises(EmptySelectionError):
            LabelingService.select_subset(fit, self.labels, EXOGENOUS, 0.95)

    @pytest.mark.parametrize('p', [-0.1, 1.5])
    def test_threshold_range(self, p):
        fit = make_fit([[0.9, 0.1]])
        with pytest.raises(InvalidParameterError):
            LabelingService.select_subset(fit, self.labels, EXOGENOUS, p)

    def test_unknown_target(self):
        fit = make_fit([[0.9, 0.1]])
        with pytest.raises(InvalidParameterError):
            LabelingService.select_subset(fit, self.labels, 'other', 0.5)

    def test_oracle_selection(self, uniform_data):
        fit = SimulationService.uniform_oracle_fit(uniform_data.data)
        selection = LabelingService.select_subset(fit, ORACLE_LABELS, EXOGENOUS, 0.9)
        outside = np.flatnonzero(uniform_data.data.values.max(axis=1) > 1.0)
        assert np.array_equal(selection.indices, outside)
        assert selection.fraction == pytest.approx(0.525, abs=0.03)

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 10_000), p1=st.floats(0, 1), p2=st.floats(0, 1))
    def test_antitone_in_threshold(self, seed, p1, p2):
        low, high = sorted((p1, p2))
        post = np.random.default_rng(seed).dirichlet([1, 1], size=50)
        post[0] = [0.0, 1.0]
        fit = make_fit(post)
        wide = LabelingService.select_subset(fit, self.labels, EXOGENOUS, low)
        narrow = LabelingService.select_subset(fit, self.labels, EXOGENOUS, high)
        assert set(narrow.indices) <= set(wide.indices)


class TestArgmax:
    def test_clear_winner(self):
        labels = ComponentLabels((ENDOGENOUS, EXOGENOUS))
        assert LabelingService.assign_argmax_labels(np.array([[0.1, 0.9]]), labels).tolist() == [EXOGENOUS]

    def test_tie_goes_to_control(self):
        labels = ComponentLabels((HILO, CONTROL))
        assert LabelingService.assign_argmax_labels(np.array([[0.5, 0.5]]), labels).tolist() == [CONTROL]

    def test_tie_without_control_goes_to_lowest_index(self):
        labels = ComponentLabels((ENDOGENOUS, EXOGENOUS))
        assert LabelingService.assign_argmax_labels(np.array([[0.5, 0.5]]), labels).tolist() == [ENDOGENOUS]

    def test_shape_mismatch(self):
        with pytest.raises(InvalidParameterError):
            LabelingService.assign_argmax_labels(np.ones((2, 3)) / 3, ComponentLabels((HILO, CONTROL)))

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 10_000), power=st.sampled_from([0.5, 2.0, 3.0]))
    def test_invariant_to_increasing_transform(self, seed, power):
        post = np.random.default_rng(seed).dirichlet([1, 1, 1], size=30)
        post[0] = [0.25, 0.25, 0.5]
        post[1] = [0.4, 0.4, 0.2]
        labels = ComponentLabels((HILO, CONTROL, EDLP))
        base = LabelingService.assign_argmax_labels(post, labels)
        transformed = LabelingService.assign_argmax_labels(post ** power, labels)
        logged = LabelingService.assign_argmax_labels(np.log(post), labels)
        assert base.tolist() == transformed.tolist() == logged.tolist()


class TestAccuracy:
    def test_identical(self):
        report = LabelingService.accuracy_report([HILO, CONTROL], [HILO, CONTROL])
        assert report['overall'] == {'n_rows': 2, 'n_correct': 2, 'accuracy': 1.0}

    def test_disjoint(self):
        report = LabelingService.accuracy_report([HILO, HILO], [EDLP, CONTROL])
        assert report['overall']['accuracy'] == 0.0

    def test_groups_and_table(self):
        report = LabelingService.accuracy_report(
            [HILO, CONTROL, EDLP, CONTROL], [HILO, EDLP, EDLP, CONTROL], groups=['C1', 'C1', 'C2', 'C2'])
        assert report['groups']['C1'] == {'n_rows': 2, 'n_correct': 1, 'accuracy': 0.5}
        table = LabelingService.accuracy_table(report)
        assert table['group'].tolist() == ['C1', 'C2', 'All']
        assert (table['accuracy'] == table['n_correct'] / table['n_rows']).all()

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatchError):
            LabelingService.accuracy_report([HILO], [HILO, CONTROL])
