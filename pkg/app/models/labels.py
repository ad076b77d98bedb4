# app/models/labels.py
"""Component labeling and subset-selection types."""

from dataclasses import dataclass

import numpy as np

from ..exceptions import InvalidParameterError


ENDOGENOUS = 'endogenous'
EXOGENOUS = 'exogenous'

CONTROL = 'Control'
HILO = 'Hi-Lo'
EDLP = 'EDLP'

# Pricing regimes ordered by the mean of summed log-demeaned prices, highest first.
PRICING_ORDERING = (HILO, CONTROL, EDLP)


@dataclass(frozen=True)
class LabelRule:
    """How to turn unlabeled mixture components into named ones.

    weight_order: the larger-weight component gets ``majority_label``.
    moment_order: components sorted by the posterior-weighted mean of the
    summed ``coordinates``, matched to ``ordering`` (highest first).
    """
    variant: str
    majority_label: str = None
    minority_label: str = None
    coordinates: tuple = ()
    moment: str = 'mean'
    ordering: tuple = ()

    WEIGHT_ORDER = 'weight_order'
    MOMENT_ORDER = 'moment_order'

    def __post_init__(self):
        object.__setattr__(self, 'coordinates', tuple(self.coordinates))
        object.__setattr__(self, 'ordering', tuple(self.ordering))
        if self.variant == self.WEIGHT_ORDER:
            if not self.majority_label or not self.minority_label:
                raise InvalidParameterError("weight_order needs majority and minority labels")
            if self.majority_label == self.minority_label:
                raise InvalidParameterError("Labels must be distinct")
        elif self.variant == self.MOMENT_ORDER:
            if self.moment != 'mean':
                raise InvalidParameterError(f"Unsupported moment '{self.moment}'")
            if not self.ordering:
                raise InvalidParameterError("moment_order needs an ordering")
            if len(set(self.ordering)) != len(self.ordering):
                raise InvalidParameterError("Labels must be distinct")
        else:
            raise InvalidParameterError(f"Unknown label rule '{self.variant}'")

    @classmethod
    def weight_order(cls, majority_label, minority_label):
        return cls(cls.WEIGHT_ORDER, majority_label=majority_label, minority_label=minority_label)

    @classmethod
    def moment_order(cls, coordinates, ordering, moment='mean'):
        return cls(cls.MOMENT_ORDER, coordinates=coordinates, ordering=ordering, moment=moment)

    @property
    def labels(self):
        if self.variant == self.WEIGHT_ORDER:
            return (self.majority_label, self.minority_label)
        return self.ordering

    @property
    def arity(self):
        return len(self.labels)

    def to_dict(self):
        if self.variant == self.WEIGHT_ORDER:
            return {'variant': self.variant, 'majority_label': self.majority_label,
                    'minority_label': self.minority_label}
        return {'variant': self.variant, 'coordinates': list(self.coordinates),
                'moment': self.moment, 'ordering': list(self.ordering)}

    @classmethod
    def from_dict(cls, payload):
        payload = dict(payload)
        variant = payload.pop('variant')
        return cls(variant, **payload)


@dataclass(frozen=True)
class ComponentLabels:
    """Bijection component index -> label; ``assignment[j]`` labels component j."""
    assignment: tuple

    def __post_init__(self):
        object.__setattr__(self, 'assignment', tuple(self.assignment))
        if len(set(self.assignment)) != len(self.assignment):
            raise InvalidParameterError(f"Labels are not a bijection: {self.assignment}")

    def __len__(self):
        return len(self.assignment)

    def label_of(self, component):
        return self.assignment[component]

    def index_of(self, label):
        try:
            return self.assignment.index(label)
        except ValueError:
            raise InvalidParameterError(
                f"Unknown label '{label}' (known: {', '.join(self.assignment)})"
            )

    def to_dict(self):
        return {'assignment': list(self.assignment)}

    @classmethod
    def from_dict(cls, payload):
        return cls(tuple(payload['assignment']))


@dataclass(frozen=True, eq=False)
class SelectionResult:
    """Rows whose posterior for ``target`` is at least ``threshold``."""
    indices: np.ndarray
    threshold: float
    target: str
    target_posteriors: np.ndarray

    @property
    def size(self):
        return int(self.indices.size)

    @property
    def n_total(self):
        return int(self.target_posteriors.size)

    @property
    def fraction(self):
        return self.size / self.n_total if self.n_total else 0.0

    def to_dict(self):
        return {
            'target': self.target,
            'threshold': float(self.threshold),
            'n_selected': self.size,
            'n_total': self.n_total,
            'indices': [int(i) for i in self.indices],
            'target_posteriors': self.target_posteriors.tolist(),
        }

    @classmethod
    def from_dict(cls, payload):
        return cls(
            indices=np.asarray(payload['indices'], dtype=int),
            threshold=float(payload['threshold']),
            target=payload['target'],
            target_posteriors=np.asarray(payload['target_posteriors'], dtype=float),
        )
