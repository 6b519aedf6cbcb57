"""
Model description types
- Uncertainty law of the random input z
- Interaction coefficients p1, p2, q1, q2 and the diffusion D(w, z)
- Noise scaling and initial data
Every callable here is a small dataclass so a ModelSpec can be pickled into worker processes.
"""
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple
import logging
import math

import numpy as np
from scipy import integrate

import sys
import os

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from errors import ConfigurationError, DomainError

logger = logging.getLogger(__name__)

INVERSE_CDF_NODES = 2 ** 12
MEAN_CONSERVATION_TOL = 1e-12
INITIAL_MASS_TOL = 1e-8


@dataclass(frozen=True)
class UncertaintyLaw:
    """Uniform law of z on a box; every catalog scenario uses d_z = 1"""

    lower: Tuple[float, ...]
    upper: Tuple[float, ...]
    distribution: str = "uniform"

    def __post_init__(self):
        if len(self.lower) != len(self.upper) or not self.lower:
            raise ConfigurationError("support bounds must have matching positive length", "uncertainty")
        for lo, hi in zip(self.lower, self.upper):
            if not lo < hi:
                raise ConfigurationError(f"support lower bound {lo} must be below upper bound {hi}", "uncertainty")
        if self.distribution != "uniform":
            raise ConfigurationError(f"unsupported distribution '{self.distribution}'", "uncertainty")

    @property
    def dimension(self) -> int:
        return len(self.lower)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw `size` nodes; shape (size,) for d_z = 1, else (size, d_z)"""
        draws = rng.uniform(self.lower, self.upper, size=(size, self.dimension))
        return draws[:, 0] if self.dimension == 1 else draws

    def contains(self, z) -> bool:
        z = np.atleast_1d(np.asarray(z, dtype=float))
        return bool(np.all(z >= np.asarray(self.lower)) and np.all(z <= np.asarray(self.upper)))


# ---------------------------------------------------------------------------
# Interaction weights, evaluated as weight(z, r) with r = |v - w|
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AffineWeight:
    """c0 + c1 * z, independent of the pair distance"""

    c0: float
    c1: float = 0.0

    def __call__(self, z, r=0.0):
        return self.c0 + self.c1 * np.asarray(z, dtype=float) + np.zeros_like(np.asarray(r, dtype=float))

    def maximum(self, law: UncertaintyLaw) -> float:
        return max(self.c0 + self.c1 * law.lower[0], self.c0 + self.c1 * law.upper[0])


@dataclass(frozen=True)
class BoundedConfidenceWeight:
    """chi(r < z): agents interact only below the confidence radius z (ties excluded)"""

    def __call__(self, z, r=0.0):
        return (np.asarray(r, dtype=float) < np.asarray(z, dtype=float)).astype(float)

    def maximum(self, law: UncertaintyLaw) -> float:
        return 1.0


@dataclass(frozen=True)
class Complement:
    """1 - weight(z, r)"""

    weight: Callable

    def __call__(self, z, r=0.0):
        return 1.0 - self.weight(z, r)


@dataclass(frozen=True)
class InteractionCoefficients:
    """Coefficients of the binary rule v' = v + eps[(p1 - 1)v + q1 w], w' = w + eps[p2 v + (q2 - 1)w]"""

    p1: Callable
    p2: Callable
    q1: Callable
    q2: Callable
    pair_dependent: bool = False
    weight: Optional[Callable] = None

    @classmethod
    def symmetric(cls, weight, pair_dependent: bool = False) -> "InteractionCoefficients":
        """p1 = q2 = 1 - weight, p2 = q1 = weight (opinion and wealth instances)"""
        return cls(
            p1=Complement(weight),
            p2=weight,
            q1=weight,
            q2=Complement(weight),
            pair_dependent=pair_dependent,
            weight=weight,
        )

    def evaluate(self, z, r=0.0):
        return self.p1(z, r), self.p2(z, r), self.q1(z, r), self.q2(z, r)

    def is_mean_conserving(self, z_samples, r_samples=(0.0,)) -> bool:
        for z in np.atleast_1d(z_samples):
            for r in np.atleast_1d(r_samples):
                p1, p2, q1, q2 = self.evaluate(z, r)
                if abs(p1 + p2 - 1.0) > MEAN_CONSERVATION_TOL or abs(q1 + q2 - 1.0) > MEAN_CONSERVATION_TOL:
                    return False
        return True

    def weight_maximum(self, law: UncertaintyLaw) -> float:
        if self.weight is None or not hasattr(self.weight, "maximum"):
            return 1.0
        return float(self.weight.maximum(law))


# ---------------------------------------------------------------------------
# Diffusion D(w, z)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiffusionSpec:
    """Local relevance of the diffusion; tag selects the closed form, "custom" evaluates func(w, z)

    func must be a module-level function when the model is sent to worker processes.
    """

    tag: str
    value: float = 1.0
    func: Optional[Callable] = None

    TAGS = ("sqrt-parabola", "parabola", "linear", "constant", "custom")

    def __post_init__(self):
        if self.tag not in self.TAGS:
            raise ConfigurationError(f"unknown diffusion '{self.tag}', expected one of {self.TAGS}", "diffusion")
        if self.tag == "custom" and not callable(self.func):
            raise ConfigurationError("custom diffusion needs a callable D(w, z)", "diffusion")

    def __call__(self, w, z=None):
        w = np.asarray(w, dtype=float)
        if self.tag == "sqrt-parabola":
            return np.sqrt(np.clip(1.0 - w * w, 0.0, None))
        if self.tag == "parabola":
            return np.clip(1.0 - w * w, 0.0, None)
        if self.tag == "linear":
            return np.abs(w)
        if self.tag == "custom":
            return np.broadcast_to(np.asarray(self.func(w, z), dtype=float), w.shape).copy()
        return np.full_like(w, self.value)

    def squared(self, w, z=None):
        d = self(w, z)
        return d * d


@dataclass(frozen=True)
class NoiseSpec:
    """eta_eps with variance eps * sigma2, realised uniform on a symmetric interval"""

    sigma2: float
    support: str = "symmetric-bounded"

    def __post_init__(self):
        if self.sigma2 < 0:
            raise ConfigurationError("noise variance must be nonnegative", "sigma2")

    def scaled_variance(self, epsilon: float) -> float:
        return epsilon * self.sigma2

    def half_width(self, epsilon: float) -> float:
        return math.sqrt(3.0 * epsilon * self.sigma2)


# ---------------------------------------------------------------------------
# Initial data f0(w, z)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UniformInitial:
    """Uniform density on [a0 + a1 z, b0 + b1 z]"""

    lower: Tuple[float, float]
    upper: Tuple[float, float]

    def endpoints(self, z) -> Tuple[float, float]:
        z = float(np.asarray(z).ravel()[0])
        return self.lower[0] + self.lower[1] * z, self.upper[0] + self.upper[1] * z

    def density(self, w, z):
        a, b = self.endpoints(z)
        w = np.asarray(w, dtype=float)
        return np.where((w >= a) & (w <= b), 1.0 / (b - a), 0.0)

    def sample(self, rng: np.random.Generator, n: int, z, domain) -> np.ndarray:
        a, b = self.endpoints(z)
        return rng.uniform(a, b, size=n)

    def mean(self, z, domain) -> float:
        a, b = self.endpoints(z)
        return 0.5 * (a + b)

    def cell_mass(self, edges: np.ndarray, z) -> np.ndarray:
        a, b = self.endpoints(z)
        overlap = np.clip(np.minimum(edges[1:], b) - np.maximum(edges[:-1], a), 0.0, None)
        return overlap / (b - a)


@dataclass(frozen=True)
class DensityInitial:
    """Initial data given by a (possibly unnormalised) density, sampled by inverse CDF"""

    shape: Callable
    label: str = "custom"

    def _normaliser(self, z, domain) -> float:
        mass, _ = integrate.quad(lambda w: float(self.shape(w, z)), domain[0], domain[1], limit=200, epsrel=1e-12)
        if mass <= 0:
            raise ConfigurationError("initial density has no mass on the domain", "initial")
        return mass

    def density(self, w, z, domain=None):
        if domain is None:
            raise ConfigurationError("density initial data needs the model domain", "initial")
        w = np.asarray(w, dtype=float)
        inside = (w >= domain[0]) & (w <= domain[1])
        return np.where(inside, self.shape(w, z) / self._normaliser(z, domain), 0.0)

    def sample(self, rng: np.random.Generator, n: int, z, domain) -> np.ndarray:
        nodes = np.linspace(domain[0], domain[1], INVERSE_CDF_NODES)
        cdf = integrate.cumulative_trapezoid(np.asarray(self.shape(nodes, z), dtype=float), nodes, initial=0.0)
        return np.interp(rng.uniform(0.0, cdf[-1], size=n), cdf, nodes)

    def mean(self, z, domain) -> float:
        first, _ = integrate.quad(lambda w: w * float(self.shape(w, z)), domain[0], domain[1], limit=200, epsrel=1e-12)
        return first / self._normaliser(z, domain)

    def cell_mass(self, edges: np.ndarray, z) -> np.ndarray:
        # 8-point Gauss-Legendre per cell, normalised on the grid
        x, wts = np.polynomial.legendre.leggauss(8)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        points = mid[:, None] + half[:, None] * x[None, :]
        mass = (np.asarray(self.shape(points, z), dtype=float) * wts[None, :]).sum(axis=1) * half
        return mass / mass.sum()


@dataclass(frozen=True)
class DoubleGaussianShape:
    """exp(-k (w + c)^2) + exp(-k (w - c)^2)"""

    centre: float = 0.5
    stiffness: float = 30.0

    def __call__(self, w, z=None):
        w = np.asarray(w, dtype=float)
        return np.exp(-self.stiffness * (w + self.centre) ** 2) + np.exp(-self.stiffness * (w - self.centre) ** 2)


@dataclass(frozen=True)
class GaussianShape:
    """Single bump exp(-(w - centre)^2 / (2 width^2))"""

    centre: float = 0.0
    width: float = 0.2

    def __call__(self, w, z=None):
        w = np.asarray(w, dtype=float)
        return np.exp(-0.5 * ((w - self.centre) / self.width) ** 2)


# ---------------------------------------------------------------------------
# ModelSpec
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModelSpec:
    """Uncertain binary-interaction kinetic model"""

    key: str
    family: str  # "opinion" | "wealth" | "general"
    domain: Tuple[float, float]
    coefficients: InteractionCoefficients
    diffusion: DiffusionSpec
    noise: NoiseSpec
    uncertainty: UncertaintyLaw
    initial: object
    w_max: Optional[float] = None
    steady_state: Optional[str] = None
    description: str = ""
    mean_conserving: bool = field(default=False)

    def __post_init__(self):
        lo, hi = self.domain
        if not lo < hi:
            raise ConfigurationError(f"domain {self.domain} is empty", "domain")
        if math.isinf(hi) and self.w_max is None:
            raise ConfigurationError("half-line domains need a truncation bound w_max", "w_max")
        nodes = np.linspace(self.uncertainty.lower[0], self.uncertainty.upper[0], 7)
        distances = (0.0,) if not self.coefficients.pair_dependent else np.linspace(0.0, self.window_width, 9)
        object.__setattr__(self, "mean_conserving", self.coefficients.is_mean_conserving(nodes, distances))

    @property
    def window(self) -> Tuple[float, float]:
        """Bounded interval used for grids and inverse-CDF tables"""
        lo, hi = self.domain
        return lo, (self.w_max if math.isinf(hi) else hi)

    @property
    def window_width(self) -> float:
        lo, hi = self.window
        return hi - lo

    def contains(self, w, tol: float = 0.0) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        lo, hi = self.domain
        return (w >= lo - tol) & (w <= hi + tol)

    def check_states(self, w, name: str = "state"):
        if not np.all(self.contains(w)):
            bad = np.asarray(w, dtype=float)[~self.contains(w)]
            raise DomainError(f"{name} {bad[:3].tolist()} outside V={list(self.domain)} for model {self.key}")

    def initial_density(self, w, z):
        if isinstance(self.initial, DensityInitial):
            return self.initial.density(w, z, self.window)
        return self.initial.density(w, z)

    def initial_mean(self, z) -> float:
        return float(self.initial.mean(z, self.window))

    def check_initial_mass(self, z) -> float:
        """Quadrature mass of f0(., z) over the window"""
        lo, hi = self.window
        if isinstance(self.initial, UniformInitial):
            a, b = self.initial.endpoints(z)
            mass = (min(b, hi) - max(a, lo)) / (b - a)
        else:
            scale = self.initial._normaliser(z, self.window)
            mass, _ = integrate.quad(lambda w: float(self.initial.shape(w, z)) / scale, lo, hi, limit=200, epsrel=1e-12)
        if abs(mass - 1.0) > INITIAL_MASS_TOL:
            raise ConfigurationError(f"initial density has mass {mass:.10f} at z={z}", "initial")
        return mass
