"""
Mean-field Fokker-Planck solver
- Chang-Cooper type exponential fitting flux, zero flux at both ends
- Exponents from the closed-form steady state when the model has one, so its cell averages are a discrete equilibrium
- Nonlocal drift frozen at the old density, linear system solved implicitly
- Upwind flux correction keeping the discrete first moment for mean-conserving models
- Positivity and mass conservation checked every step
"""
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import List, Optional, Sequence
import logging
import math

import numpy as np
import pandas as pd
from scipy import linalg, special

import sys
import os

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from errors import ArgumentError, ConfigurationError, DomainError, InvariantViolation, NumericError, ReportIOError
from models.spec import ModelSpec
from solvers.grid import Grid1D
from solvers.steady_state import SteadyStateParams, steady_state_log_cells, steady_state_params

logger = logging.getLogger(__name__)

NEGATIVITY_TOL = 1e-13
INTERFACE_GAUSS_ORDER = 16
PAIR_DEPENDENT_GAUSS_ORDER = 8
STEP_TOL = 1e-9

# 2-point Gauss rule per cell for the nonlocal drift integral
_CELL_NODES, _CELL_WEIGHTS = np.polynomial.legendre.leggauss(2)


@dataclass
class GridDensity:
    """Piecewise-constant FP density

    `mean` is the exact mean m(z) of f0 when the model conserves it; the linear drift and the
    closed-form exponents use it. The solver keeps `first_moment`, the discrete mean on the grid.
    """

    grid: Grid1D
    values: np.ndarray
    z: float
    t: float = 0.0
    mean: Optional[float] = None

    @property
    def mass(self) -> float:
        return float(self.grid.dw * self.values.sum())

    @property
    def first_moment(self) -> float:
        return float(self.grid.dw * np.dot(self.grid.centres, self.values))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"w": self.grid.centres, "density": self.values})

    def to_csv(self, path: str):
        try:
            self.to_frame().to_csv(path, index=False, float_format="%.17g")
        except OSError as e:
            raise ReportIOError(f"could not write density ({e.strerror})", path) from e


def project_initial(model: ModelSpec, grid: Grid1D, z) -> GridDensity:
    """Cell averages of f0(., z), rescaled to unit discrete mass"""
    mass = np.asarray(model.initial.cell_mass(grid.edges, z), dtype=float)
    total = mass.sum()
    if not total > 0:
        raise NumericError(f"initial data has no mass on the grid [{grid.a}, {grid.b}] at z={z}")
    if abs(total - 1.0) > 1e-8:
        logger.debug("initial projection captured mass %.10f on [%g, %g]; rescaled", total, grid.a, grid.b)
    values = mass / (total * grid.dw)
    mean = model.initial_mean(z) if model.mean_conserving else None
    return GridDensity(grid=grid, values=values, z=z, t=0.0, mean=mean)


def project_density(density: GridDensity, target: Grid1D) -> np.ndarray:
    return density.grid.project(density.values, target)


def drift_at(density: GridDensity, model: ModelSpec, w) -> np.ndarray:
    """B(w) = integral of P(v, w, z) f(v) dv"""
    w = np.asarray(w, dtype=float)
    coeffs = model.coefficients
    if not coeffs.pair_dependent:
        p1, p2, q1, q2 = coeffs.evaluate(density.z, 0.0)
        m = density.mean if density.mean is not None else density.first_moment
        return 0.5 * ((p1 + q2 - 2.0) * w + (p2 + q1) * m)

    grid = density.grid
    v = grid.centres[:, None] + 0.5 * grid.dw * _CELL_NODES[None, :]
    v_weights = (0.5 * grid.dw * _CELL_WEIGHTS)[None, :] * density.values[:, None]
    v = v.ravel()
    v_weights = v_weights.ravel()
    flat = w.ravel()
    p1, p2, q1, q2 = coeffs.evaluate(density.z, np.abs(v[None, :] - flat[:, None]))
    kernel = 0.5 * ((p1 + q2 - 2.0) * flat[:, None] + (p2 + q1) * v[None, :])
    return (kernel @ v_weights).reshape(w.shape)


def assemble_drift(density: GridDensity, model: ModelSpec) -> np.ndarray:
    """Drift at the N_MF + 1 cell interfaces"""
    return drift_at(density, model, density.grid.edges)


def closed_form_equilibrium(density: GridDensity, model: ModelSpec) -> Optional[SteadyStateParams]:
    """Steady-state parameters with the density's mean, or None when there is no closed form"""
    if not model.steady_state or density.mean is None or model.coefficients.pair_dependent:
        return None
    try:
        return replace(steady_state_params(model, density.z), mean=density.mean)
    except (ConfigurationError, DomainError) as e:
        logger.debug("no closed-form equilibrium for %s at z=%s (%s); using quadrature exponents", model.key, density.z, e)
        return None


def conserves_first_moment(model: ModelSpec, z=None) -> bool:
    """Mean-conserving interaction and a diffusion vanishing at every finite end of V"""
    if not model.mean_conserving:
        return False
    ends = np.array([e for e in model.domain if math.isfinite(e)])
    return bool(np.all(model.diffusion.squared(ends, z) == 0.0))


@lru_cache(maxsize=4096)
def _closed_form_exponents(params: SteadyStateParams, grid: Grid1D) -> Optional[np.ndarray]:
    """-ln(fbar_{i+1} / fbar_i) from the log cell averages; constant in time for one node"""
    log_cells = steady_state_log_cells(params, grid)
    if not np.all(np.isfinite(log_cells)):
        return None
    exponents = log_cells[:-1] - log_cells[1:]
    exponents.flags.writeable = False
    return exponents


def interface_exponents(density: GridDensity, model: ModelSpec):
    """Exponent lambda and diffusion coefficient at the interior interfaces

    The discrete steady state satisfies f_{i+1} / f_i = exp(-lambda) exactly. With a closed-form
    steady state lambda is the log ratio of its neighbouring cell averages; otherwise
    lambda = ln(D^2(w_{i+1}) / D^2(w_i)) - (2 / sigma2) * integral of B / D^2 between the centres.
    """
    grid = density.grid
    sigma2 = model.noise.sigma2
    if sigma2 <= 0:
        raise NumericError("Fokker-Planck scheme needs a positive noise variance")
    centres = grid.centres
    d2 = model.diffusion.squared(centres, density.z)
    if np.any(d2 <= 0):
        raise NumericError("diffusion vanishes at a cell centre; shrink the grid inside V")
    d_half = 0.5 * sigma2 * model.diffusion.squared(grid.edges[1:-1], density.z)

    params = closed_form_equilibrium(density, model)
    if params is not None:
        exponents = _closed_form_exponents(params, grid)
        if exponents is not None:
            return exponents, d_half
        logger.debug("steady state underflows in log space on [%g, %g]; using quadrature exponents", grid.a, grid.b)

    order = PAIR_DEPENDENT_GAUSS_ORDER if model.coefficients.pair_dependent else INTERFACE_GAUSS_ORDER
    x, wts = np.polynomial.legendre.leggauss(order)
    mid = 0.5 * (centres[1:] + centres[:-1])
    half = 0.5 * grid.dw
    points = mid[:, None] + half * x[None, :]
    integrand = drift_at(density, model, points) / model.diffusion.squared(points, density.z)
    integral = half * (integrand * wts[None, :]).sum(axis=1)

    exponents = np.log(d2[1:] / d2[:-1]) - (2.0 / sigma2) * integral
    return exponents, d_half


def _bernoulli(x):
    """x / (exp(x) - 1)"""
    return 1.0 / special.exprel(x)


def flux_coefficients(density: GridDensity, model: ModelSpec):
    """F_{i+1/2} = a_i f_{i+1} - b_i f_i"""
    exponents, d_half = interface_exponents(density, model)
    scale = d_half / density.grid.dw
    return scale * _bernoulli(-exponents), scale * _bernoulli(exponents), exponents, d_half


def stable_timestep(density: GridDensity, model: ModelSpec) -> float:
    """Step bound for freezing the nonlocal coefficients: dw / (2 max |C|)"""
    _, _, exponents, d_half = flux_coefficients(density, model)
    speed = np.abs(exponents) * d_half / density.grid.dw
    top = float(speed.max()) if speed.size else 0.0
    return math.inf if top == 0.0 else density.grid.dw / (2.0 * top)


def _solve(banded: np.ndarray, rhs: np.ndarray, t: float) -> np.ndarray:
    try:
        values = linalg.solve_banded((1, 1), banded, rhs)
    except (linalg.LinAlgError, ValueError) as e:
        raise NumericError(f"tridiagonal solve failed at t={t:.6g}: {e}") from e
    if not np.all(np.isfinite(values)):
        raise NumericError(f"non-finite density after step at t={t:.6g}")
    return values


def _flux_sum(a: np.ndarray, b: np.ndarray, values: np.ndarray) -> float:
    """Sum of the interior interface fluxes a_i f_{i+1} - b_i f_i"""
    return float(np.dot(a, values[1:]) - np.dot(b, values[:-1]))


def _moment_correction(banded, a, b, old: np.ndarray, r: float, t: float) -> np.ndarray:
    """Step with an extra donor-cell flux c * g_i chosen so the interface fluxes sum to zero

    The first moment changes by -dt * dw * (sum of fluxes), so the corrected step keeps it.
    g is the upwind old density, which keeps the right-hand side nonnegative while r |c| <= 1.
    """
    plain = _solve(banded, old, t)
    deficit = _flux_sum(a, b, plain)
    if deficit == 0.0:
        return plain

    # positive c moves mass towards lower w: donor is the right neighbour
    candidates = [(old[1:], True), (old[:-1], False)]
    if deficit > 0:
        candidates.reverse()
    for upwind, leftward in candidates:
        g = np.concatenate(([0.0], upwind, [0.0]))
        response = _solve(banded, r * np.diff(g), t)
        denominator = _flux_sum(a, b, response) + float(upwind.sum())
        if denominator == 0.0:
            continue
        c = -deficit / denominator
        if (c > 0) == leftward:
            break
    else:
        raise NumericError(f"first-moment correction has no admissible flux at t={t:.6g}")

    if r * abs(c) > 1.0:
        raise NumericError(f"first-moment correction {c:.3e} too large for dt / dw = {r:.3e} at t={t:.6g}")
    return plain + c * response


def fp_step(density: GridDensity, dt: float, model: ModelSpec) -> GridDensity:
    """One semi-implicit step (I - dt A) f_new = f_old, plus the first-moment correction"""
    if dt <= 0:
        raise ArgumentError(f"time step must be positive, got {dt}")
    a, b, _, _ = flux_coefficients(density, model)
    grid = density.grid
    r = dt / grid.dw

    n = grid.n_cells
    banded = np.zeros((3, n))
    banded[0, 1:] = -r * a
    banded[2, :-1] = -r * b
    diagonal = np.ones(n)
    diagonal[:-1] += r * b
    diagonal[1:] += r * a
    banded[1] = diagonal

    if conserves_first_moment(model, density.z):
        values = _moment_correction(banded, a, b, density.values, r, density.t)
    else:
        values = _solve(banded, density.values, density.t)

    lowest = float(values.min())
    if lowest < -NEGATIVITY_TOL:
        raise InvariantViolation(f"density went negative ({lowest:.3e}) at t={density.t + dt:.6g}")
    if lowest < 0:
        before = density.mass
        values = np.clip(values, 0.0, None)
        after = grid.dw * values.sum()
        values *= before / after
        logger.debug("clipped negative round-off %.3e; mass correction %.3e", lowest, before - after)

    return replace(density, values=values, t=density.t + dt)


def default_timestep(model: ModelSpec, grid: Grid1D, z, epsilon: float):
    """Largest k * eps within the stability bound of the projected initial data; returns (dt, k)"""
    bound = stable_timestep(project_initial(model, grid, z), model)
    k = 1 if not math.isfinite(bound) else max(1, int(math.floor(bound / epsilon)))
    return k * epsilon, k


def run_fp(
    model: ModelSpec,
    grid: Grid1D,
    z,
    t_final: float,
    dt: float,
    snapshot_times: Optional[Sequence[float]] = None,
    initial: Optional[GridDensity] = None,
) -> List[GridDensity]:
    """March fp_step with uniform dt; each snapshot is the latest step at or before the requested time"""
    if t_final < 0:
        raise ArgumentError(f"final time must be nonnegative, got {t_final}")
    times = [t_final] if not snapshot_times else list(snapshot_times)
    if any(b < a for a, b in zip(times, times[1:])) or times[-1] > t_final + STEP_TOL:
        raise ArgumentError(f"snapshot times {times} must be sorted and within [0, {t_final}]")

    density = initial if initial is not None else project_initial(model, grid, z)
    bound = stable_timestep(density, model)
    if dt > bound:
        logger.warning("FP step %.3e exceeds the coefficient-freezing bound %.3e for z=%s", dt, bound, z)

    snapshots: List[GridDensity] = []
    step = 0
    for t in times:
        target = int(math.floor(t / dt + STEP_TOL))
        while step < target:
            density = fp_step(density, dt, model)
            step += 1
        snap = replace(density, values=density.values.copy(), t=step * dt)
        offset = t - step * dt
        if abs(offset) > 1e-12:
            logger.debug("FP snapshot for t=%.6g taken at t=%.6g (offset %.3e)", t, step * dt, offset)
        snapshots.append(snap)
    return snapshots


class MeanFieldSolver:
    """FP solver bound to one model, grid and time step"""

    def __init__(self, model: ModelSpec, grid: Grid1D, dt: float, k: int = 1):
        if dt <= 0:
            raise ArgumentError(f"time step must be positive, got {dt}")
        self.model = model
        self.grid = grid
        self.dt = float(dt)
        self.k = int(k)

    @classmethod
    def for_model(cls, model: ModelSpec, n_cells: int, epsilon: float, z_ref=None, k: Optional[int] = None):
        """Solver on the model window (wealth grids start at 1e-6), dt = k * eps"""
        grid = fp_grid(model, n_cells)
        if k is None:
            z = z_ref if z_ref is not None else model.uncertainty.lower[0]
            dt, k = default_timestep(model, grid, z, epsilon)
        else:
            dt = int(k) * epsilon
        return cls(model, grid, dt, k)

    def solve(self, z, t_final: float, snapshot_times=None) -> List[GridDensity]:
        return run_fp(self.model, self.grid, z, t_final, self.dt, snapshot_times)


WEALTH_GRID_START = 1e-6


def fp_grid(model: ModelSpec, n_cells: int) -> Grid1D:
    lo, hi = model.window
    if model.family == "wealth":
        lo = max(lo, WEALTH_GRID_START)
    return Grid1D(lo, hi, int(n_cells))
