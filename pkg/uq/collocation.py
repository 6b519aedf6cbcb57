"""
Gauss-Legendre stochastic collocation for exact control-variate means
"""
from dataclasses import dataclass, field
from typing import Callable
import logging

import numpy as np

import sys
import os

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from errors import ArgumentError, NumericError
from models.spec import UncertaintyLaw

logger = logging.getLogger(__name__)

DEFAULT_COLLOCATION_NODES = 20


@dataclass(frozen=True)
class ControlMean:
    """Expectation of the control QoI, tagged with how it was obtained"""

    value: np.ndarray
    method: str  # "collocation" | "monte-carlo"
    stderr: np.ndarray = 0.0
    n_samples: int = 0

    @property
    def negligible_error(self) -> bool:
        return self.method == "collocation"


@dataclass(frozen=True)
class CollocationRule:
    """Gauss-Legendre nodes mapped to the support, weights normalised to the uniform law"""

    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @classmethod
    def for_law(cls, law: UncertaintyLaw, n_nodes: int = DEFAULT_COLLOCATION_NODES) -> "CollocationRule":
        if law.dimension != 1:
            raise ArgumentError("collocation is implemented for one-dimensional uncertainty")
        if n_nodes < 1:
            raise ArgumentError(f"collocation needs at least one node, got {n_nodes}")
        x, w = np.polynomial.legendre.leggauss(n_nodes)
        lo, hi = law.lower[0], law.upper[0]
        return cls(nodes=0.5 * (hi - lo) * x + 0.5 * (hi + lo), weights=0.5 * w)

    @property
    def size(self) -> int:
        return int(self.nodes.shape[0])


def _reduce(values: np.ndarray, rule: CollocationRule) -> ControlMean:
    if not np.all(np.isfinite(values)):
        bad = rule.nodes[~np.all(np.isfinite(values.reshape(rule.size, -1)), axis=1)]
        raise NumericError(f"collocation integrand is not finite at nodes {bad.tolist()}")
    value = np.tensordot(rule.weights, values, axes=1)
    return ControlMean(value=value, method="collocation", stderr=np.zeros_like(value), n_samples=rule.size)


def collocation_mean(integrand: Callable, rule: CollocationRule) -> ControlMean:
    """sum_i weight_i * integrand(node_i); integrand may be scalar or array valued"""
    return _reduce(np.stack([np.asarray(integrand(z), dtype=float) for z in rule.nodes]), rule)


def collocation_from_values(values: np.ndarray, rule: CollocationRule) -> ControlMean:
    """Same reduction when the node evaluations were computed elsewhere (e.g. in a worker pool)"""
    values = np.asarray(values, dtype=float)
    if values.shape[0] != rule.size:
        raise ArgumentError(f"expected {rule.size} node values, got {values.shape[0]}")
    return _reduce(values, rule)
