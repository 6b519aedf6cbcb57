from .grid import Grid1D
from .dsmc import DSMCSolver, ParticleEnsemble, RngStreamSpec, sround, sample_initial, dsmc_step, run_dsmc
from .meanfield import (
    GridDensity,
    MeanFieldSolver,
    assemble_drift,
    fp_step,
    run_fp,
    project_initial,
    stable_timestep,
    default_timestep,
    fp_grid,
)
from .steady_state import SteadyStateParams, steady_state_density, steady_state_on_grid, steady_state_params

__all__ = [
    'Grid1D',
    'DSMCSolver', 'ParticleEnsemble', 'RngStreamSpec', 'sround', 'sample_initial', 'dsmc_step', 'run_dsmc',
    'GridDensity', 'MeanFieldSolver', 'assemble_drift', 'fp_step', 'run_fp', 'project_initial',
    'stable_timestep', 'default_timestep', 'fp_grid',
    'SteadyStateParams', 'steady_state_density', 'steady_state_on_grid', 'steady_state_params',
]
