# app/jobs/__init__.py
"""Exo-Mix batch jobs"""

from .pipeline_job import run_subset_pipeline, run_panel_pipeline, label_group
from .monte_carlo_job import (
    naive_bias, subset_consistency, weight_recovery, oracle_selection,
    bias_decay, density_recovery, pricing_recovery,
)

__all__ = [
    'run_subset_pipeline',
    'run_panel_pipeline',
    'label_group',
    'naive_bias',
    'subset_consistency',
    'weight_recovery',
    'oracle_selection',
    'bias_decay',
    'density_recovery',
    'pricing_recovery',
]
