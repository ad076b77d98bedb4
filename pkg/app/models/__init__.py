"""
Exo-Mix - Domain Models
"""
from .density import BandwidthRule, WeightedSample, KernelDensity, FrozenDensity
from .mixture import DataMatrix, FitOptions, MixtureFit
from .labels import (
    LabelRule, ComponentLabels, SelectionResult,
    ENDOGENOUS, EXOGENOUS, CONTROL, HILO, EDLP, PRICING_ORDERING,
)
from .regression import RegressionResult, FESpec, BootstrapResult, BootstrapConfig
from .simulation import UniformMixtureConfig, PricingSimConfig, LabeledDataset, PricingDataset
from .panel import PanelTable, WideMatrixSpec, WideMatrix, DROP_UNIT, DROP_PRODUCT

__all__ = [
    'BandwidthRule',
    'WeightedSample',
    'KernelDensity',
    'FrozenDensity',
    'DataMatrix',
    'FitOptions',
    'MixtureFit',
    'LabelRule',
    'ComponentLabels',
    'SelectionResult',
    'ENDOGENOUS',
    'EXOGENOUS',
    'CONTROL',
    'HILO',
    'EDLP',
    'PRICING_ORDERING',
    'RegressionResult',
    'FESpec',
    'BootstrapResult',
    'BootstrapConfig',
    'UniformMixtureConfig',
    'PricingSimConfig',
    'LabeledDataset',
    'PricingDataset',
    'PanelTable',
    'WideMatrixSpec',
    'WideMatrix',
    'DROP_UNIT',
    'DROP_PRODUCT',
]
