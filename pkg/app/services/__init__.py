"""
Exo-Mix - Services
"""
from .kde_service import kde_eval, kde_eval_binned, silverman_bandwidth
from .npem_service import NPEMService
from .labeling_service import LabelingService
from .regression_service import RegressionService
from .bootstrap_service import BootstrapService, estimate_subset_slope
from .simulation_service import SimulationService
from . import panel_service, experiment_service

__all__ = [
    'kde_eval',
    'kde_eval_binned',
    'silverman_bandwidth',
    'NPEMService',
    'LabelingService',
    'RegressionService',
    'BootstrapService',
    'estimate_subset_slope',
    'SimulationService',
    'panel_service',
    'experiment_service',
]
