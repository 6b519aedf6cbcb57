from .spec import (
    ModelSpec,
    UncertaintyLaw,
    InteractionCoefficients,
    DiffusionSpec,
    NoiseSpec,
    UniformInitial,
    DensityInitial,
)
from .interaction import drift_kernel, apply_interaction, admissible_noise_bound, sample_noise
from .catalog import build_model, get_model_entry, list_models, model_defaults

__all__ = [
    'ModelSpec', 'UncertaintyLaw', 'InteractionCoefficients', 'DiffusionSpec', 'NoiseSpec',
    'UniformInitial', 'DensityInitial',
    'drift_kernel', 'apply_interaction', 'admissible_noise_bound', 'sample_noise',
    'build_model', 'get_model_entry', 'list_models', 'model_defaults',
]
