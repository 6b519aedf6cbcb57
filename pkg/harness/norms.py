"""
Error norms over replications of a grid-valued estimate
"""
import numpy as np

import sys
import os

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from errors import ArgumentError

ORDERINGS = ("rms-first", "norm-first")


def field_error_norm(estimates, reference, dw: float = 1.0, p: float = 2.0, ordering: str = "rms-first") -> float:
    """Discrete error of R replications against a reference field

    rms-first:  || sqrt(mean_R g^2) ||_{L^p}
    norm-first: sqrt(mean_R ||g||_{L^p}^2)
    Both coincide for p = 2. Scalars are treated as one-cell fields with dw = 1.
    """
    if ordering not in ORDERINGS:
        raise ArgumentError(f"ordering must be one of {ORDERINGS}, got '{ordering}'")
    if p < 1:
        raise ArgumentError(f"norm order must be >= 1, got {p}")
    estimates = np.asarray(estimates, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if estimates.ndim == reference.ndim:
        estimates = estimates[None, ...]
    if estimates.shape[1:] != reference.shape:
        raise ArgumentError(f"estimates {estimates.shape[1:]} and reference {reference.shape} shapes differ")
    if estimates.shape[0] < 1:
        raise ArgumentError("need at least one replication")

    deviation = (estimates - reference).reshape(estimates.shape[0], -1)
    if ordering == "rms-first":
        rms = np.sqrt(np.mean(deviation ** 2, axis=0))
        return float((dw * np.sum(rms ** p)) ** (1.0 / p))
    per_replication = (dw * np.sum(np.abs(deviation) ** p, axis=1)) ** (1.0 / p)
    return float(np.sqrt(np.mean(per_replication ** 2)))


def replication_errors(estimates, reference, dw: float = 1.0, p: float = 2.0) -> np.ndarray:
    """L^p error of each replication separately"""
    estimates = np.asarray(estimates, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if estimates.ndim == reference.ndim:
        estimates = estimates[None, ...]
    deviation = (estimates - reference).reshape(estimates.shape[0], -1)
    return (dw * np.sum(np.abs(deviation) ** p, axis=1)) ** (1.0 / p)
