from .collocation import CollocationRule, ControlMean, collocation_mean, collocation_from_values
from .estimators import (
    RandomNodeSet,
    QoISampleSet,
    CvEstimate,
    mc_estimate,
    mc_report,
    optimal_lambda_hat,
    cv_estimate,
    correlation,
    control_mean_from_samples,
    budget_max_mmf,
)

__all__ = [
    'CollocationRule', 'ControlMean', 'collocation_mean', 'collocation_from_values',
    'RandomNodeSet', 'QoISampleSet', 'CvEstimate', 'mc_estimate', 'mc_report', 'optimal_lambda_hat',
    'cv_estimate', 'correlation', 'control_mean_from_samples', 'budget_max_mmf',
]
