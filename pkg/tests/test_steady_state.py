"""
Closed-form steady states
"""
import numpy as np
import pytest
from scipy import integrate

from errors import ConfigurationError, DomainError
from solvers.grid import Grid1D
from solvers.steady_state import (
    SteadyStateParams,
    steady_state_density,
    steady_state_log_cells,
    steady_state_on_grid,
    steady_state_params,
    steady_state_tail,
)


def test_symmetric_beta_is_uniform():
    params = SteadyStateParams("beta", 0.0, 1.0, 1.0)
    np.testing.assert_allclose(steady_state_density(params, np.linspace(-0.9, 0.9, 7)), 0.5, atol=1e-12)


@pytest.mark.parametrize(
    "params",
    [
        SteadyStateParams("beta", 0.3, 0.2, 1.0),
        SteadyStateParams("maxwellian-like", -0.2, 0.2, 0.8),
        SteadyStateParams("inverse-gamma", 1.0, 0.5, 0.5),
    ],
    ids=["beta", "maxwellian-like", "inverse-gamma"],
)
def test_unit_mass(params):
    lo, hi = params.domain
    mass, _ = integrate.quad(lambda w: float(steady_state_density(params, w)), lo, hi, limit=500)
    assert mass == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize(
    "params",
    [SteadyStateParams("beta", 0.3, 0.2, 1.0), SteadyStateParams("maxwellian-like", -0.2, 0.2, 0.8)],
    ids=["beta", "maxwellian-like"],
)
def test_opinion_steady_state_keeps_the_mean(params):
    mean, _ = integrate.quad(lambda w: w * float(steady_state_density(params, w)), -1.0, 1.0, limit=500)
    assert mean == pytest.approx(params.mean, abs=1e-8)


def test_inverse_gamma_mean_and_exponent():
    params = SteadyStateParams("inverse-gamma", 1.0, 0.5, 0.5)
    assert params.mu == pytest.approx(3.0)
    mean, _ = integrate.quad(lambda w: w * float(steady_state_density(params, w)), 0.0, np.inf, limit=500)
    assert mean == pytest.approx(1.0, abs=1e-6)


def test_inverse_gamma_tail_matches_quadrature():
    params = SteadyStateParams("inverse-gamma", 1.0, 0.5, 0.5)
    tail, _ = integrate.quad(lambda w: float(steady_state_density(params, w)), 2.0, np.inf, limit=500)
    assert steady_state_tail(params, 2.0) == pytest.approx(tail, abs=1e-8)
    assert steady_state_tail(params, 0.0) == 1.0


def test_maxwellian_tail_bounds():
    params = SteadyStateParams("maxwellian-like", 0.0, 0.2, 1.0)
    assert steady_state_tail(params, -1.0) == 1.0
    assert steady_state_tail(params, 1.0) == 0.0
    assert steady_state_tail(params, 0.0) == pytest.approx(0.5, abs=1e-8)


@pytest.mark.parametrize(
    "family,mean,sigma2,strength",
    [("beta", 1.0, 0.2, 1.0), ("inverse-gamma", -1.0, 0.5, 0.5), ("beta", 0.0, 0.0, 1.0), ("unknown", 0.0, 0.2, 1.0)],
)
def test_invalid_parameters_rejected(family, mean, sigma2, strength):
    with pytest.raises(DomainError):
        SteadyStateParams(family, mean, sigma2, strength)


def test_evaluation_outside_domain_rejected():
    with pytest.raises(DomainError):
        steady_state_density(SteadyStateParams("beta", 0.0, 0.2, 1.0), 1.5)


def test_catalog_parameters(opinion_a, opinion_b, wealth_b):
    a = steady_state_params(opinion_a, 1.0)
    assert (a.family, a.mean, a.strength) == ("beta", pytest.approx(0.25), pytest.approx(1.0))
    b = steady_state_params(opinion_b, 1.0)
    assert b.strength == pytest.approx(1.0)
    w = steady_state_params(wealth_b, 1.0)
    assert w.mu == pytest.approx(1.0 + 2.0 * 0.75 / 0.5)


def test_model_without_steady_state_rejected(bounded_confidence):
    with pytest.raises(ConfigurationError):
        steady_state_params(bounded_confidence, 1.5)


def test_grid_representations_have_unit_mass():
    params = SteadyStateParams("beta", 0.1, 0.2, 1.0)
    grid = Grid1D(-1.0, 1.0, 100)
    cells = steady_state_on_grid(params, grid, how="cell")
    points = steady_state_on_grid(params, grid, how="point")
    assert grid.dw * cells.sum() == pytest.approx(1.0, abs=1e-6)
    assert grid.dw * points.sum() == pytest.approx(1.0, abs=1e-13)


@pytest.mark.parametrize(
    "params",
    [SteadyStateParams("beta", 0.3, 0.2, 1.0), SteadyStateParams("maxwellian-like", -0.2, 0.2, 0.75)],
)
def test_log_cell_averages_match_gauss_cell_averages(params):
    grid = Grid1D(-1.0, 1.0, 40)
    direct = grid.cell_average(lambda w: steady_state_density(params, w))
    np.testing.assert_allclose(np.exp(steady_state_log_cells(params, grid)), direct, rtol=1e-12)


def test_log_cell_averages_stay_finite_where_density_underflows():
    params = SteadyStateParams("inverse-gamma", 1.0, 0.5, 0.5)
    grid = Grid1D(1e-6, 10.0, 4000)
    logs = steady_state_log_cells(params, grid)
    assert np.all(np.isfinite(logs))
    assert steady_state_on_grid(params, grid, how="cell")[0] == 0.0
    # exp(-2 / w) dominates near the origin
    assert logs[0] < -700.0
    assert np.all(np.diff(logs[:50]) > 0)
