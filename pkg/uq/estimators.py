"""
Monte Carlo and control-variate estimators over the random input
"""
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence
import logging

import numpy as np

import sys
import os

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from errors import ArgumentError
from models.spec import UncertaintyLaw
from solvers.dsmc import RngStreamSpec
from uq.collocation import ControlMean

logger = logging.getLogger(__name__)

VARIANCE_GUARD = 1e-14


@dataclass(frozen=True)
class RandomNodeSet:
    """M i.i.d. nodes z_k; node k owns the stream keys (k, purpose)"""

    nodes: np.ndarray
    stream: RngStreamSpec

    @classmethod
    def draw(cls, law: UncertaintyLaw, M: int, stream: RngStreamSpec, purpose: str = "nodes") -> "RandomNodeSet":
        if M < 1:
            raise ArgumentError(f"need at least one node, got M={M}")
        spec = stream.with_key(0, purpose)
        nodes = law.sample(spec.generator(), M)
        return cls(nodes=nodes, stream=spec)

    @property
    def M(self) -> int:
        return int(self.nodes.shape[0])

    def __iter__(self):
        return iter(enumerate(self.nodes))


@dataclass(frozen=True)
class QoISampleSet:
    """M evaluations of one QoI, scalar or grid valued, stacked along axis 0"""

    values: np.ndarray
    name: str = "density"
    nodes: Optional[RandomNodeSet] = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim == 0 or values.shape[0] == 0:
            raise ArgumentError(f"QoI sample set '{self.name}' is empty")
        if not np.all(np.isfinite(values)):
            raise ArgumentError(f"QoI sample set '{self.name}' contains non-finite values")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_list(cls, entries: Sequence, name: str = "density", nodes: Optional[RandomNodeSet] = None):
        if not entries:
            raise ArgumentError(f"QoI sample set '{name}' is empty")
        shapes = {np.shape(e) for e in entries}
        if len(shapes) != 1:
            raise ArgumentError(f"QoI samples for '{name}' have mixed shapes {sorted(shapes)}")
        return cls(values=np.stack([np.asarray(e, dtype=float) for e in entries]), name=name, nodes=nodes)

    @property
    def M(self) -> int:
        return int(self.values.shape[0])

    @property
    def entry_shape(self):
        return self.values.shape[1:]


@dataclass
class CvEstimate:
    kind: str
    qoi: str
    value: np.ndarray
    lam: np.ndarray
    rho: np.ndarray
    var_mc: np.ndarray
    var_cv: np.ndarray
    control_mean: Optional[ControlMean] = None
    ledger: Dict[str, Any] = field(default_factory=dict)

    @property
    def variance_ratio(self) -> np.ndarray:
        """1 - rho^2, the variance factor of the optimal control"""
        return 1.0 - np.asarray(self.rho) ** 2


def _check_pair(primary: QoISampleSet, control: QoISampleSet):
    if primary.values.shape != control.values.shape:
        raise ArgumentError(
            f"primary {primary.values.shape} and control {control.values.shape} sample shapes differ"
        )


def _estimator_variance(values: np.ndarray) -> np.ndarray:
    M = values.shape[0]
    if M < 2:
        return np.zeros(values.shape[1:])
    return values.var(axis=0, ddof=1) / M


def mc_estimate(samples: QoISampleSet) -> np.ndarray:
    if samples is None or samples.M == 0:
        raise ArgumentError("Monte Carlo estimate needs at least one sample")
    return samples.values.mean(axis=0)


def optimal_lambda_hat(primary: QoISampleSet, control: QoISampleSet, control_mean, guard: float = VARIANCE_GUARD):
    """Cov_M / Var_M with control deviations about the exact mean and primary deviations about E_M"""
    _check_pair(primary, control)
    M = primary.M
    if M < 2:
        raise ArgumentError(f"lambda estimate needs M >= 2, got M={M}")
    exact = control_mean.value if isinstance(control_mean, ControlMean) else np.asarray(control_mean, dtype=float)

    dq = primary.values - primary.values.mean(axis=0)
    dc = control.values - exact
    cov = (dq * dc).sum(axis=0) / (M - 1)
    var = (dc * dc).sum(axis=0) / (M - 1)

    degenerate = var < guard
    if np.any(degenerate):
        logger.info("control variance below %.0e in %d entries; lambda set to 0 there", guard, int(np.sum(degenerate)))
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(degenerate, 0.0, cov / np.where(degenerate, 1.0, var))


def correlation(primary: QoISampleSet, control: QoISampleSet) -> np.ndarray:
    """Entrywise Pearson coefficient, 0 where either side has no spread"""
    _check_pair(primary, control)
    if primary.M < 2:
        return np.zeros(primary.entry_shape)
    dq = primary.values - primary.values.mean(axis=0)
    dc = control.values - control.values.mean(axis=0)
    denom = np.sqrt((dq * dq).sum(axis=0) * (dc * dc).sum(axis=0))
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(denom > 0, (dq * dc).sum(axis=0) / np.where(denom > 0, denom, 1.0), 0.0)


def cv_estimate(primary: QoISampleSet, control: QoISampleSet, control_mean, lam, kind: str = "MFCV") -> CvEstimate:
    """E_M[q] - lambda (E_M[q~] - E[q~])"""
    _check_pair(primary, control)
    exact = control_mean.value if isinstance(control_mean, ControlMean) else np.asarray(control_mean, dtype=float)
    lam = np.broadcast_to(np.asarray(lam, dtype=float), primary.entry_shape)

    value = primary.values.mean(axis=0) - lam * (control.values.mean(axis=0) - exact)
    combined = primary.values - lam * control.values
    return CvEstimate(
        kind=kind,
        qoi=primary.name,
        value=value,
        lam=np.array(lam),
        rho=correlation(primary, control),
        var_mc=_estimator_variance(primary.values),
        var_cv=_estimator_variance(combined),
        control_mean=control_mean if isinstance(control_mean, ControlMean) else ControlMean(exact, "given"),
    )


def mc_report(primary: QoISampleSet) -> CvEstimate:
    """Plain MC in the CvEstimate layout (lambda = 0, no control)"""
    zeros = np.zeros(primary.entry_shape)
    var = _estimator_variance(primary.values)
    return CvEstimate(
        kind="MC", qoi=primary.name, value=mc_estimate(primary), lam=zeros, rho=zeros, var_mc=var, var_cv=var
    )


def control_mean_from_samples(samples: QoISampleSet) -> ControlMean:
    """Online estimate of E[q~] over fresh nodes, with its standard error"""
    stderr = np.sqrt(_estimator_variance(samples.values))
    return ControlMean(value=mc_estimate(samples), method="monte-carlo", stderr=stderr, n_samples=samples.M)


def budget_max_mmf(N: int, M: int, N_MF: int, k: int) -> int:
    """floor(k N M / N_MF): control samples affordable at the cost of the primary run"""
    for name, value in (("N", N), ("M", M), ("N_MF", N_MF), ("k", k)):
        if int(value) < 1:
            raise ArgumentError(f"{name} must be a positive integer, got {value}")
    return (int(k) * int(N) * int(M)) // int(N_MF)
