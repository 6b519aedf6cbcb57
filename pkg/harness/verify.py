"""
Desk-scale invariant suite behind `kinetic-uq verify`
Each check returns (name, passed, detail); nothing here needs more than a few seconds.
"""
from typing import Callable, List, Tuple
import logging

import numpy as np
from scipy import integrate

import sys
import os

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from errors import ConfigurationError, KineticUQError
from harness.scenario import parse_scenario
from models.catalog import build_model
from solvers.meanfield import GridDensity, fp_step, fp_grid, project_initial
from solvers.steady_state import SteadyStateParams, steady_state_density, steady_state_on_grid, steady_state_params
from tools.qoi_tools import gini, lorenz_curve
from uq.collocation import CollocationRule, collocation_mean
from uq.estimators import QoISampleSet, budget_max_mmf, optimal_lambda_hat
from models.spec import UncertaintyLaw

logger = logging.getLogger(__name__)

CheckResult = Tuple[str, bool, str]

BUDGET_SCENARIO = """
[model]
key = opinion-A

[solver]
N = 2e4
N_MF = 20
k = 1
t_final = 0.1

[uq]
kinds = MFCV
M = 10
M_MF = {m_mf}
"""


def _structure_preservation() -> CheckResult:
    worst_change, worst_mass, worst_moment = 0.0, 0.0, 0.0
    for key, z in (("opinion-A", 0.5), ("opinion-B", 0.0), ("wealth-B", 0.0)):
        model = build_model(key)
        grid = fp_grid(model, 40)
        params = steady_state_params(model, z)
        start = steady_state_on_grid(params, grid, how="cell")
        density = GridDensity(grid=grid, values=start.copy(), z=z, mean=params.mean)
        moving = project_initial(model, grid, z)
        for _ in range(100):
            density = fp_step(density, 0.01, model)
            moving = fp_step(moving, 0.01, model)
        worst_change = max(worst_change, np.linalg.norm(density.values - start) / np.linalg.norm(start))
        worst_mass = max(worst_mass, abs(density.mass - grid.dw * start.sum()))
        worst_moment = max(worst_moment, abs(moving.first_moment - project_initial(model, grid, z).first_moment))
    passed = worst_change <= 1e-8 and worst_mass <= 1e-12 and worst_moment <= 1e-8
    detail = f"relative change {worst_change:.2e}, mass drift {worst_mass:.2e}, first-moment drift {worst_moment:.2e}"
    return "FP steady-state preservation", passed, detail


def _steady_analytics() -> CheckResult:
    masses = []
    for params in (
        SteadyStateParams("beta", 0.2, 0.2, 1.0),
        SteadyStateParams("maxwellian-like", 0.0, 0.2, 0.75),
        SteadyStateParams("inverse-gamma", 1.0, 1.0, 1.0),
    ):
        lo, hi = params.domain
        mass, _ = integrate.quad(lambda w: float(steady_state_density(params, w)), lo, hi, epsrel=1e-10, limit=500)
        masses.append(mass)
    invgamma = SteadyStateParams("inverse-gamma", 1.0, 1.0, 1.0)
    mean, _ = integrate.quad(lambda w: w * float(steady_state_density(invgamma, w)), 0.0, np.inf, epsrel=1e-10, limit=500)
    flat = steady_state_density(SteadyStateParams("beta", 0.0, 1.0, 1.0), np.linspace(-0.99, 0.99, 11))
    passed = max(abs(m - 1.0) for m in masses) <= 1e-8 and abs(mean - 1.0) <= 1e-6 and np.all(np.abs(flat - 0.5) <= 1e-12)
    return "steady-state analytics", passed, f"masses {[f'{m:.10f}' for m in masses]}, inverse-gamma mean {mean:.8f}"


def _estimator_algebra() -> CheckResult:
    rng = np.random.default_rng(7)
    q = QoISampleSet(rng.normal(size=(50, 3)))
    lam = optimal_lambda_hat(q, q, q.values.mean(axis=0))
    rule = CollocationRule.for_law(UncertaintyLaw((0.0,), (1.0,)), 20)
    z39 = float(collocation_mean(lambda z: z ** 39, rule).value)
    passed = np.all(lam == 1.0) and abs(z39 - 1.0 / 40.0) <= 1e-10
    return "estimator algebra", passed, f"lambda on identical samples {lam.tolist()}, z^39 rule {z39:.12f}"


def _qoi_oracles() -> CheckResult:
    equal = gini(lorenz_curve([1.0, 1.0, 1.0, 1.0]))
    two = gini(lorenz_curve([0.0, 1.0]))
    scaled = lorenz_curve(np.array([0.5, 1.0, 3.0]) * 4.0).wealth
    base = lorenz_curve(np.array([0.5, 1.0, 3.0])).wealth
    passed = equal == 0.0 and two == 0.5 and np.array_equal(scaled, base)
    return "QoI oracles", passed, f"gini equal={equal}, gini {{0,1}}={two}"


def _budget_gate() -> CheckResult:
    bound = budget_max_mmf(20000, 10, 20, 1)
    accepted = parse_scenario(BUDGET_SCENARIO.format(m_mf=bound)).M_MF == bound
    try:
        parse_scenario(BUDGET_SCENARIO.format(m_mf=bound + 1))
        rejected = False
    except ConfigurationError:
        rejected = True
    return "budget gate", accepted and rejected, f"bound {bound}: at bound accepted={accepted}, above rejected={rejected}"


CHECKS: List[Callable[[], CheckResult]] = [
    _structure_preservation,
    _steady_analytics,
    _estimator_algebra,
    _qoi_oracles,
    _budget_gate,
]


def run_verification() -> List[CheckResult]:
    results = []
    for check in CHECKS:
        try:
            results.append(check())
        except KineticUQError as e:
            results.append((check.__name__.strip("_").replace("_", " "), False, f"{type(e).__name__}: {e}"))
    return results
