"""
Binary interaction rule, admissible noise and mean-field drift kernel.
All functions are vectorised over pairs: v, w, eta may be scalars or equally shaped arrays.
"""
from typing import Tuple
import logging

import numpy as np

import sys
import os

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from errors import ArgumentError, InvariantViolation
from models.spec import ModelSpec

logger = logging.getLogger(__name__)

# post-interaction states may miss V by this much through rounding alone
ROUNDING_SLACK = 1e-12


def drift_kernel(v, w, z, model: ModelSpec):
    """P(v, w, z) = 1/2 [(p1 + q2 - 2) w + (p2 + q1) v], coefficients taken at r = |v - w|"""
    model.check_states(v, "v")
    model.check_states(w, "w")
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    p1, p2, q1, q2 = model.coefficients.evaluate(z, np.abs(v - w))
    return 0.5 * ((p1 + q2 - 2.0) * w + (p2 + q1) * v)


def deterministic_update(v, w, z, epsilon: float, model: ModelSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Noise-free part of the binary rule"""
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    p1, p2, q1, q2 = model.coefficients.evaluate(z, np.abs(v - w))
    v_det = v + epsilon * ((p1 - 1.0) * v + q1 * w)
    w_det = w + epsilon * (p2 * v + (q2 - 1.0) * w)
    return v_det, w_det


def apply_interaction(v, w, z, eta_v, eta_w, epsilon: float, model: ModelSpec):
    """One binary interaction (v, w) -> (v', w'); never clamps beyond rounding slack"""
    if not 0.0 < epsilon <= 1.0:
        raise ArgumentError(f"epsilon must lie in (0, 1], got {epsilon}")
    v_det, w_det = deterministic_update(v, w, z, epsilon, model)
    v_new = v_det + model.diffusion(v, z) * np.asarray(eta_v, dtype=float)
    w_new = w_det + model.diffusion(w, z) * np.asarray(eta_w, dtype=float)

    lo, hi = model.domain
    for name, states in (("v'", v_new), ("w'", w_new)):
        if not np.all(model.contains(states, tol=ROUNDING_SLACK)):
            bad = np.asarray(states)[~model.contains(states, tol=ROUNDING_SLACK)]
            raise InvariantViolation(
                f"{name} {bad[:3].tolist()} left V={list(model.domain)} for model {model.key}; noise bound is wrong"
            )
    return np.clip(v_new, lo, hi), np.clip(w_new, lo, hi)


def _generic_bound(states, deterministic, z, model: ModelSpec):
    """Largest b with lo <= a + D(s) eta <= hi for |eta| <= b"""
    lo, hi = model.domain
    room = np.minimum(hi - deterministic, deterministic - lo)
    room = np.clip(room, 0.0, None)
    d = model.diffusion(states, z)
    with np.errstate(divide="ignore", invalid="ignore"):
        bound = np.where(d > 0, room / np.where(d > 0, d, 1.0), np.inf)
    return bound


def admissible_noise_bound(v, w, z, epsilon: float, model: ModelSpec):
    """Symmetric bound b such that both post-interaction states stay in V for |eta| <= b"""
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)

    if model.family == "wealth":
        return np.full(np.broadcast(v, w).shape, 1.0 - epsilon) if np.ndim(v) else 1.0 - epsilon

    if model.family == "opinion" and model.domain == (-1.0, 1.0):
        p_max = model.coefficients.weight_maximum(model.uncertainty)
        slack = max(1.0 - epsilon * p_max, 0.0)
        if model.diffusion.tag == "parabola":
            # |eta| (1 + |s|) <= 1 - eps max p
            bound = np.minimum(slack / (1.0 + np.abs(v)), slack / (1.0 + np.abs(w)))
            return bound
        if model.diffusion.tag == "sqrt-parabola":
            # |eta| sqrt(1 - s^2) <= (1 - eps max p)(1 - |s|)
            bound_v = slack * np.sqrt(np.clip((1.0 - np.abs(v)) / (1.0 + np.abs(v)), 0.0, None))
            bound_w = slack * np.sqrt(np.clip((1.0 - np.abs(w)) / (1.0 + np.abs(w)), 0.0, None))
            return np.minimum(bound_v, bound_w)

    v_det, w_det = deterministic_update(v, w, z, epsilon, model)
    bound = np.minimum(_generic_bound(v, v_det, z, model), _generic_bound(w, w_det, z, model))
    return np.where(np.isfinite(bound), bound, model.noise.half_width(epsilon))


def sample_noise(bound, epsilon: float, model: ModelSpec, rng: np.random.Generator):
    """eta ~ U[-b, b] with b = min(sqrt(3 eps sigma2), bound); one draw per entry of `bound`"""
    bound = np.asarray(bound, dtype=float)
    if np.any(bound < 0):
        raise ArgumentError("noise bound must be nonnegative")
    half = np.minimum(model.noise.half_width(epsilon), bound)
    eta = rng.uniform(-1.0, 1.0, size=half.shape) * half
    return eta if eta.ndim else float(eta)


def noise_variance_deficit(bound, epsilon: float, model: ModelSpec):
    """eps sigma2 - b^2 / 3, zero where the admissible bound does not truncate"""
    half = np.minimum(model.noise.half_width(epsilon), np.asarray(bound, dtype=float))
    return model.noise.scaled_variance(epsilon) - half * half / 3.0
