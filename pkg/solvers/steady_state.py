"""
Closed-form steady states of the mean-field Fokker-Planck models
- beta family            D = sqrt(1 - w^2), opinion
- maxwellian-like family D = 1 - w^2, opinion
- inverse-gamma family   D = w, wealth
"""
from dataclasses import dataclass
from functools import lru_cache
import logging
import math
import warnings

import numpy as np
from scipy import integrate, special, stats

import sys
import os

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from errors import ConfigurationError, DomainError, NumericError
from models.spec import ModelSpec
from solvers.grid import Grid1D

logger = logging.getLogger(__name__)

QUAD_EPSREL = 1e-10
CELL_GAUSS_ORDER = 8

FAMILY_DIFFUSION = {
    "beta": "sqrt-parabola",
    "maxwellian-like": "parabola",
    "inverse-gamma": "linear",
}


@dataclass(frozen=True)
class SteadyStateParams:
    """Parameters of f_inf(w, z) at one node z"""

    family: str
    mean: float
    sigma2: float
    strength: float

    def __post_init__(self):
        if self.family not in FAMILY_DIFFUSION:
            raise DomainError(f"unknown steady-state family '{self.family}'")
        if self.sigma2 <= 0 or self.strength <= 0:
            raise DomainError(f"steady state needs sigma2 > 0 and strength > 0, got {self.sigma2}, {self.strength}")
        if self.family in ("beta", "maxwellian-like") and not abs(self.mean) < 1.0:
            raise DomainError(f"opinion steady state needs |m| < 1, got m={self.mean}")
        if self.family == "inverse-gamma" and not (self.mean > 0 and self.mu > 1):
            raise DomainError(f"inverse-gamma steady state needs m > 0 and mu > 1, got m={self.mean}, mu={self.mu}")

    @property
    def mu(self) -> float:
        """Pareto exponent 1 + 2 lambda / sigma2"""
        return 1.0 + 2.0 * self.strength / self.sigma2

    @property
    def domain(self):
        return (0.0, math.inf) if self.family == "inverse-gamma" else (-1.0, 1.0)

    def frozen(self):
        """scipy.stats distribution for the closed-form families"""
        if self.family == "beta":
            alpha = self.strength * (1.0 + self.mean) / self.sigma2
            beta = self.strength * (1.0 - self.mean) / self.sigma2
            return stats.beta(alpha, beta, loc=-1.0, scale=2.0)
        if self.family == "inverse-gamma":
            return stats.invgamma(self.mu, scale=(self.mu - 1.0) * self.mean)
        return None


def steady_state_params(model: ModelSpec, z) -> SteadyStateParams:
    """Steady-state parameters of a catalog model at node z"""
    if not model.steady_state:
        raise ConfigurationError(f"model {model.key} has no closed-form steady state", "steady_state")
    expected = FAMILY_DIFFUSION.get(model.steady_state)
    if expected != model.diffusion.tag or model.coefficients.pair_dependent:
        raise ConfigurationError(
            f"steady state '{model.steady_state}' does not match diffusion '{model.diffusion.tag}'", "steady_state"
        )
    strength = float(np.asarray(model.coefficients.weight(z, 0.0)).ravel()[0])
    return SteadyStateParams(model.steady_state, model.initial_mean(z), model.noise.sigma2, strength)


def _maxwellian_log_shape(w, mean, sigma2, strength):
    a = strength * mean / (2.0 * sigma2)
    return (
        (a - 2.0) * np.log1p(w)
        - (a + 2.0) * np.log1p(-w)
        - strength * (1.0 - mean * w) / (sigma2 * (1.0 - w * w))
    )


@lru_cache(maxsize=1024)
def _maxwellian_normaliser(mean: float, sigma2: float, strength: float) -> float:
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            mass, err = integrate.quad(
                lambda w: math.exp(_maxwellian_log_shape(w, mean, sigma2, strength)),
                -1.0, 1.0, epsrel=QUAD_EPSREL, limit=500,
            )
        except integrate.IntegrationWarning as e:
            raise NumericError(f"steady-state normalisation did not converge: {e}") from e
    if not mass > 0 or err > 1e-8 * mass:
        raise NumericError(f"steady-state normalisation failed (mass={mass}, err={err})")
    return mass


def _check_domain(params: SteadyStateParams, w) -> np.ndarray:
    lo, hi = params.domain
    w = np.asarray(w, dtype=float)
    if np.any((w < lo) | (w > hi)):
        raise DomainError(f"steady state evaluated outside V=[{lo}, {hi}]")
    return w


def steady_state_density(params: SteadyStateParams, w):
    w = _check_domain(params, w)
    dist = params.frozen()
    if dist is not None:
        return dist.pdf(w)

    norm = _maxwellian_normaliser(params.mean, params.sigma2, params.strength)
    inside = np.abs(w) < 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        log_f = _maxwellian_log_shape(np.where(inside, w, 0.0), params.mean, params.sigma2, params.strength)
    return np.where(inside, np.exp(log_f) / norm, 0.0)


def steady_state_log_density(params: SteadyStateParams, w):
    """log f_inf(w); -inf on the boundary of V"""
    w = _check_domain(params, w)
    dist = params.frozen()
    if dist is not None:
        with np.errstate(divide="ignore"):
            return dist.logpdf(w)

    norm = _maxwellian_normaliser(params.mean, params.sigma2, params.strength)
    inside = np.abs(w) < 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        log_f = _maxwellian_log_shape(np.where(inside, w, 0.0), params.mean, params.sigma2, params.strength)
    return np.where(inside, log_f - math.log(norm), -np.inf)


def steady_state_log_cells(params: SteadyStateParams, grid: Grid1D, order: int = CELL_GAUSS_ORDER) -> np.ndarray:
    """log of the cell averages of f_inf, Gauss-Legendre per cell summed in log space

    Finite wherever the Gauss points lie inside V, so ratios of neighbouring cells
    stay exact in the far tails where the averages themselves underflow.
    """
    x, wts = np.polynomial.legendre.leggauss(order)
    points = grid.centres[:, None] + 0.5 * grid.dw * x[None, :]
    log_f = steady_state_log_density(params, points)
    return special.logsumexp(log_f + np.log(0.5 * wts)[None, :], axis=1)


def steady_state_tail(params: SteadyStateParams, threshold: float) -> float:
    """Mass strictly above the threshold"""
    lo, hi = params.domain
    if threshold <= lo:
        return 1.0
    if threshold >= hi:
        return 0.0
    dist = params.frozen()
    if dist is not None:
        return float(dist.sf(threshold))
    tail, _ = integrate.quad(lambda w: float(steady_state_density(params, w)), threshold, 1.0, epsrel=QUAD_EPSREL, limit=500)
    return tail


def steady_state_on_grid(params: SteadyStateParams, grid: Grid1D, how: str = "cell") -> np.ndarray:
    """Grid representation of f_inf

    how="cell": cell averages (Gauss per cell), the comparison target for histograms and
               the discrete steady state of the flux scheme
    how="point": centre values rescaled to unit discrete mass
    """
    if how == "point":
        values = steady_state_density(params, grid.centres)
        return values / (grid.dw * values.sum())
    if how == "cell":
        return np.exp(steady_state_log_cells(params, grid))
    raise ValueError(f"unknown projection '{how}'")
