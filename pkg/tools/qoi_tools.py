"""
QoI Tools - reconstruction and quantities of interest for particle ensembles and grid densities
"""
from dataclasses import dataclass
from typing import Optional
import logging
import math

import numpy as np
from scipy import integrate

import sys
import os

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from errors import ArgumentError, ConfigurationError
from models.spec import ModelSpec
from solvers.dsmc import ParticleEnsemble
from solvers.grid import Grid1D
from solvers.steady_state import SteadyStateParams, steady_state_density, steady_state_on_grid, steady_state_tail

logger = logging.getLogger(__name__)

# population fractions on which the Lorenz curve is compared across samples
POPULATION_GRID = np.linspace(0.0, 1.0, 101)
HILL_FRACTION = 0.05
STEADY_LORENZ_CELLS = 4000


def _states(obj) -> np.ndarray:
    if isinstance(obj, ParticleEnsemble):
        return obj.values
    return np.asarray(obj, dtype=float)


@dataclass(frozen=True)
class Histogram:
    grid: Grid1D
    values: np.ndarray
    outside: int = 0

    @property
    def mass(self) -> float:
        return float(self.grid.dw * self.values.sum())


@dataclass(frozen=True)
class LorenzCurveData:
    population: np.ndarray
    wealth: np.ndarray

    def on_grid(self, fractions: np.ndarray = POPULATION_GRID) -> np.ndarray:
        """Piecewise-linear curve sampled at fixed population fractions"""
        return np.interp(fractions, self.population, self.wealth)


def reconstruct(ens, grid: Grid1D) -> Histogram:
    """First-order histogram: each particle adds 1 / (N dw) to its cell

    Args:
        ens: ParticleEnsemble or array of states
        grid: reconstruction grid

    Returns:
        Histogram: cell values plus the number of particles outside the grid
    """
    values = _states(ens)
    N = values.shape[0]
    if N == 0:
        raise ArgumentError("cannot reconstruct an empty ensemble")
    counts, _ = np.histogram(values, bins=grid.edges)
    outside = int(N - counts.sum())
    if outside:
        logger.debug("%d of %d particles outside the reconstruction window [%g, %g]", outside, N, grid.a, grid.b)
    return Histogram(grid=grid, values=counts / (N * grid.dw), outside=outside)


def kernel_variance(ens, grid: Grid1D) -> np.ndarray:
    """Per-cell variance of the histogram kernel under the empirical law, p (1 - p) / dw^2"""
    values = _states(ens)
    counts, _ = np.histogram(values, bins=grid.edges)
    p = counts / values.shape[0]
    return p * (1.0 - p) / grid.dw ** 2


def moment(ens, order: int = 1) -> float:
    if int(order) != order or order < 1:
        raise ArgumentError(f"moment order must be a positive integer, got {order}")
    values = _states(ens)
    if values.shape[0] == 0:
        raise ArgumentError("moment of an empty ensemble")
    return float(np.mean(values ** int(order)))


def tail_distribution(obj, threshold: float) -> float:
    """Mass strictly above the threshold

    Args:
        obj: ensemble / state array, Histogram, (values, grid) tuple or SteadyStateParams
        threshold: state value w

    Returns:
        float: 1 - F(w)
    """
    if isinstance(obj, SteadyStateParams):
        return steady_state_tail(obj, threshold)
    if isinstance(obj, Histogram):
        return _grid_tail(obj.values, obj.grid, threshold)
    if isinstance(obj, tuple) and len(obj) == 2 and isinstance(obj[1], Grid1D):
        return _grid_tail(np.asarray(obj[0], dtype=float), obj[1], threshold)
    values = _states(obj)
    return float(np.count_nonzero(values > threshold) / values.shape[0])


def _grid_tail(values: np.ndarray, grid: Grid1D, threshold: float) -> float:
    cumulative = np.concatenate(([0.0], np.cumsum(values * grid.dw)))
    below = np.interp(threshold, grid.edges, cumulative, left=0.0, right=cumulative[-1])
    return float(cumulative[-1] - below)


def lorenz_curve(ens) -> LorenzCurveData:
    values = _states(ens)
    if values.shape[0] == 0:
        raise ArgumentError("Lorenz curve of an empty ensemble")
    if np.any(values < 0):
        raise ArgumentError("Lorenz curve needs nonnegative states")
    ordered = np.sort(values)
    total = ordered.sum()
    if not total > 0:
        raise ArgumentError("Lorenz curve needs positive total wealth")
    N = ordered.shape[0]
    population = np.arange(N + 1) / N
    wealth = np.concatenate(([0.0], np.cumsum(ordered))) / total
    wealth[-1] = 1.0
    return LorenzCurveData(population=population, wealth=wealth)


def lorenz_from_density(values: np.ndarray, grid: Grid1D) -> LorenzCurveData:
    """Lorenz curve of a piecewise-constant density, wealth taken at the cell centres"""
    if grid.a < 0:
        raise ArgumentError("Lorenz curve needs a nonnegative state grid")
    mass = np.asarray(values, dtype=float) * grid.dw
    wealth = mass * grid.centres
    if not mass.sum() > 0 or not wealth.sum() > 0:
        raise ArgumentError("Lorenz curve needs positive mass and wealth")
    population = np.concatenate(([0.0], np.cumsum(mass))) / mass.sum()
    share = np.concatenate(([0.0], np.cumsum(wealth))) / wealth.sum()
    population[-1] = share[-1] = 1.0
    return LorenzCurveData(population=population, wealth=share)


def gini(curve: LorenzCurveData) -> float:
    """1 - 2 * trapezoidal area under the Lorenz points"""
    return float(1.0 - 2.0 * integrate.trapezoid(curve.wealth, curve.population))


def hill_tail_index(ens, fraction: float = HILL_FRACTION) -> float:
    """Hill estimator of the Pareto exponent from the largest `fraction` of states"""
    values = np.sort(_states(ens))[::-1]
    k = max(2, int(fraction * values.shape[0]))
    if k >= values.shape[0] or values[k] <= 0:
        raise ArgumentError("Hill estimator needs more positive states than the tail fraction")
    logs = np.log(values[:k] / values[k])
    total = logs.sum()
    return float(k / total) if total > 0 else math.inf


def parametric_tail_index(model: ModelSpec, z) -> float:
    """mu(z) = 1 + 2 lambda(z) / sigma2 for the wealth exchange models"""
    if model.family != "wealth":
        raise ArgumentError(f"tail index is defined for wealth models, not '{model.family}'")
    strength = float(np.asarray(model.coefficients.weight(z, 0.0)).ravel()[0])
    return 1.0 + 2.0 * strength / model.noise.sigma2


# ---------------------------------------------------------------------------
# QoI descriptors shared by primary, control and reference evaluations
# ---------------------------------------------------------------------------

QOI_NAMES = ("density", "moment", "tail", "gini", "lorenz")


@dataclass(frozen=True)
class QoISpec:
    """density | moment<k> | tail@<w> | gini | lorenz"""

    name: str
    order: int = 1
    threshold: Optional[float] = None

    @classmethod
    def parse(cls, token: str) -> "QoISpec":
        token = token.strip().lower()
        try:
            if token.startswith("moment"):
                return cls("moment", order=int(token[len("moment"):] or 1))
            if token.startswith("tail@"):
                return cls("tail", threshold=float(token[len("tail@"):]))
        except ValueError as e:
            raise ConfigurationError(f"malformed QoI '{token}'", "qoi") from e
        if token in ("density", "gini", "lorenz"):
            return cls(token)
        raise ConfigurationError(f"unknown QoI '{token}', expected one of density, momentK, tail@W, gini, lorenz", "qoi")

    @property
    def label(self) -> str:
        if self.name == "moment":
            return f"moment{self.order}"
        if self.name == "tail":
            return f"tail@{self.threshold:g}"
        return self.name

    @property
    def is_field(self) -> bool:
        return self.name in ("density", "lorenz")

    def check_model(self, model: ModelSpec):
        if self.name in ("gini", "lorenz") and model.window[0] < 0:
            raise ConfigurationError(f"{self.name} needs nonnegative states; model {model.key} is not", "qoi")


def qoi_from_ensemble(spec: QoISpec, ens, recon_grid: Grid1D):
    if spec.name == "density":
        return reconstruct(ens, recon_grid).values
    if spec.name == "moment":
        return moment(ens, spec.order)
    if spec.name == "tail":
        return tail_distribution(ens, spec.threshold)
    curve = lorenz_curve(ens)
    return gini(curve) if spec.name == "gini" else curve.on_grid()


def qoi_from_density(spec: QoISpec, values: np.ndarray, grid: Grid1D, recon_grid: Grid1D):
    """Same QoI for a piecewise-constant density on `grid`"""
    values = np.asarray(values, dtype=float)
    if spec.name == "density":
        return grid.project(values, recon_grid)
    if spec.name == "moment":
        return float(grid.dw * np.dot(grid.centres ** spec.order, values))
    if spec.name == "tail":
        return _grid_tail(values, grid, spec.threshold)
    curve = lorenz_from_density(values, grid)
    return gini(curve) if spec.name == "gini" else curve.on_grid()


def qoi_from_steady(spec: QoISpec, params: SteadyStateParams, recon_grid: Grid1D):
    """QoI of the analytic steady state; density as cell averages on the reconstruction grid"""
    if spec.name == "density":
        return steady_state_on_grid(params, recon_grid, how="cell")
    if spec.name == "moment":
        if spec.order == 1:
            return float(params.mean)
        lo, hi = params.domain
        hi = recon_grid.b if math.isinf(hi) else hi
        value, _ = integrate.quad(
            lambda w: w ** spec.order * float(steady_state_density(params, w)), lo, hi, epsrel=1e-10, limit=500
        )
        return value
    if spec.name == "tail":
        return steady_state_tail(params, spec.threshold)
    fine = Grid1D(recon_grid.a, recon_grid.b, STEADY_LORENZ_CELLS)
    return qoi_from_density(spec, steady_state_on_grid(params, fine, how="cell"), fine, recon_grid)
