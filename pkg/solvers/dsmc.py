"""
Symmetric Nanbu DSMC solver
- Stochastic rounding of the collision count
- Disjoint uniform pairing from a random permutation
- Reproducible per-node random streams
"""
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple
import logging
import math

import numpy as np
import pandas as pd

import sys
import os

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from errors import ArgumentError, ConfigurationError, InvariantViolation, NumericError, ReportIOError
from models.spec import ModelSpec
from models.interaction import admissible_noise_bound, apply_interaction, noise_variance_deficit, sample_noise

logger = logging.getLogger(__name__)

# stream purposes; the integer code enters the SeedSequence spawn key
PURPOSES = {"nodes": 0, "dsmc": 1, "control-nodes": 2, "fp": 3, "synthetic": 4}

STEP_TOL = 1e-9


@dataclass(frozen=True)
class RngStreamSpec:
    """Master seed plus stream key (index, purpose); maps onto numpy SeedSequence spawn keys"""

    master_seed: int
    index: int = 0
    purpose: str = "dsmc"
    prefix: Tuple[int, ...] = ()

    def __post_init__(self):
        if not 0 <= int(self.master_seed) < 2 ** 64:
            raise ConfigurationError(f"master seed {self.master_seed} is not a 64-bit unsigned integer", "seed")
        if self.purpose not in PURPOSES:
            raise ConfigurationError(f"unknown stream purpose '{self.purpose}'", "seed")

    @property
    def key(self) -> Tuple[int, ...]:
        return tuple(self.prefix) + (int(self.index), PURPOSES[self.purpose])

    def with_key(self, index: int, purpose: str) -> "RngStreamSpec":
        return replace(self, index=int(index), purpose=purpose)

    def child(self, *keys: int) -> "RngStreamSpec":
        """Independent family of streams, e.g. one per replication"""
        return replace(self, prefix=tuple(self.prefix) + tuple(int(k) for k in keys))

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence(int(self.master_seed), spawn_key=self.key))


@dataclass
class ParticleEnsemble:
    """N agent states for one realisation z at time t"""

    values: np.ndarray
    z: float
    t: float
    rng: np.random.Generator = field(repr=False)
    last_pair_count: int = 0
    noise_deficit: float = 0.0

    @property
    def N(self) -> int:
        return int(self.values.shape[0])

    def copy(self) -> "ParticleEnsemble":
        return replace(self, values=self.values.copy())

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"w": self.values})

    def to_csv(self, path: str):
        """One state per row; debugging format only"""
        try:
            self.to_frame().to_csv(path, index=False, float_format="%.17g")
        except OSError as e:
            raise ReportIOError(f"could not write ensemble snapshot ({e.strerror})", path) from e

    def to_binary(self, path: str):
        """Flat little-endian float64 array"""
        try:
            self.values.astype("<f8").tofile(path)
        except OSError as e:
            raise ReportIOError(f"could not write ensemble snapshot ({e.strerror})", path) from e

    @staticmethod
    def read_binary(path: str) -> np.ndarray:
        return np.fromfile(path, dtype="<f8")


def sround(x: float, rng: np.random.Generator) -> int:
    """Stochastic rounding: floor(x) + 1 with probability frac(x)"""
    if x < 0 or not math.isfinite(x):
        raise ArgumentError(f"sround needs a finite nonnegative argument, got {x}")
    base = math.floor(x)
    frac = x - base
    if frac == 0.0:
        return int(base)
    return int(base) + int(rng.random() < frac)


def sample_initial(model: ModelSpec, N: int, z, rng: np.random.Generator) -> ParticleEnsemble:
    if N < 2:
        raise ArgumentError(f"an ensemble needs at least two particles, got N={N}")
    sampler = getattr(model.initial, "sample", None)
    if sampler is None:
        raise ConfigurationError(f"unsupported initial-condition descriptor {type(model.initial).__name__}", "initial")
    values = np.asarray(sampler(rng, N, z, model.window), dtype=float)
    model.check_states(values, "initial sample")
    return ParticleEnsemble(values=values, z=z, t=0.0, rng=rng)


def select_pairs(N: int, n_pairs: int, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """n_pairs disjoint pairs: first block of a permutation against the second"""
    if n_pairs > N // 2:
        raise InvariantViolation(f"cannot form {n_pairs} disjoint pairs from {N} particles")
    perm = rng.permutation(N)
    return perm[:n_pairs], perm[n_pairs:2 * n_pairs]


def dsmc_step(ens: ParticleEnsemble, model: ModelSpec, dt: float, epsilon: float) -> ParticleEnsemble:
    """One Nanbu step; the returned ensemble shares the rng stream of `ens`"""
    if dt <= 0:
        raise ArgumentError(f"time step must be positive, got {dt}")
    if dt > epsilon * (1.0 + STEP_TOL):
        raise NumericError(f"DSMC step dt={dt} exceeds the collision time scale eps={epsilon}")

    N = ens.N
    n_pairs = sround(N * (dt / epsilon) / 2.0, ens.rng)
    if n_pairs > N // 2 and N % 2 == 1:
        # odd N at full interaction: one particle stays unpaired
        n_pairs = N // 2
    first, second = select_pairs(N, n_pairs, ens.rng)

    v = ens.values[first]
    w = ens.values[second]
    bound = admissible_noise_bound(v, w, ens.z, epsilon, model)
    eta_v = sample_noise(bound, epsilon, model, ens.rng)
    eta_w = sample_noise(bound, epsilon, model, ens.rng)
    v_new, w_new = apply_interaction(v, w, ens.z, eta_v, eta_w, epsilon, model)

    values = ens.values.copy()
    values[first] = v_new
    values[second] = w_new

    deficit = float(np.mean(noise_variance_deficit(bound, epsilon, model))) if n_pairs else 0.0
    if deficit > 0:
        logger.debug("noise variance deficit %.3e at t=%.4f (z=%s)", deficit, ens.t + dt, ens.z)
    return ParticleEnsemble(
        values=values, z=ens.z, t=ens.t + dt, rng=ens.rng, last_pair_count=n_pairs, noise_deficit=deficit
    )


def step_count(t_final: float, epsilon: float) -> int:
    """n_t = ceil(t_final / eps), robust to representation error in the ratio"""
    return int(math.ceil(t_final / epsilon - STEP_TOL))


def snap_to_steps(times: Sequence[float], dt: float, n_steps: int) -> List[int]:
    """Nearest step index for every requested time; mismatches are logged"""
    indices = []
    for t in times:
        n = min(int(round(t / dt)), n_steps)
        if abs(n * dt - t) > 1e-12:
            logger.info("snapshot t=%.6g snapped to step %d (t=%.6g, mismatch %.3e)", t, n, n * dt, n * dt - t)
        indices.append(n)
    return indices


def run_dsmc(
    model: ModelSpec,
    N: int,
    z,
    epsilon: float,
    t_final: float,
    seed_spec: RngStreamSpec,
    snapshot_times: Optional[Sequence[float]] = None,
) -> List[ParticleEnsemble]:
    """Advance with dt = eps for ceil(t_final / eps) steps and return the requested snapshots"""
    if t_final < 0:
        raise ArgumentError(f"final time must be nonnegative, got {t_final}")
    times = [t_final] if not snapshot_times else list(snapshot_times)
    if any(b < a for a, b in zip(times, times[1:])):
        raise ArgumentError(f"snapshot times must be sorted, got {times}")
    if times[-1] > t_final + STEP_TOL or times[0] < 0:
        raise ArgumentError(f"snapshot times {times} must lie in [0, {t_final}]")

    rng = seed_spec.generator()
    ens = sample_initial(model, N, z, rng)
    n_steps = step_count(t_final, epsilon) if t_final > 0 else 0
    targets = snap_to_steps(times, epsilon, n_steps)

    snapshots: List[ParticleEnsemble] = []
    pending = list(targets)
    for n in range(n_steps + 1):
        while pending and pending[0] == n:
            snap = ens.copy()
            snap.t = n * epsilon
            snapshots.append(snap)
            pending.pop(0)
        if not pending:
            break
        ens = dsmc_step(ens, model, epsilon, epsilon)
    return snapshots


class DSMCSolver:
    """Particle solver bound to one model, sample size and collision scale"""

    def __init__(self, model: ModelSpec, N: int, epsilon: float, seed_spec: RngStreamSpec):
        if not 0.0 < epsilon <= 1.0:
            raise ConfigurationError(f"epsilon must lie in (0, 1], got {epsilon}", "epsilon")
        self.model = model
        self.N = int(N)
        self.epsilon = float(epsilon)
        self.seed_spec = seed_spec

    def simulate(self, z, index: int, t_final: float, snapshot_times=None) -> List[ParticleEnsemble]:
        """Snapshots for node z_index; the stream key is (index, 'dsmc')"""
        stream = self.seed_spec.with_key(index, "dsmc")
        return run_dsmc(self.model, self.N, z, self.epsilon, t_final, stream, snapshot_times)
