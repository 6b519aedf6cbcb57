from .scenario import ScenarioSpec, parse_scenario, load_scenario
from .norms import field_error_norm
from .references import ReferenceSystem
from .experiment import ExperimentReport, run_experiment
from .verify import run_verification

__all__ = [
    'ScenarioSpec', 'parse_scenario', 'load_scenario', 'field_error_norm', 'ReferenceSystem',
    'ExperimentReport', 'run_experiment', 'run_verification',
]
