"""
Reference values of E[q] for error tables
- steady: collocation of the analytic steady state
- transient: collocation of a fine-grid FP solution
"""
from typing import Dict, List, Optional, Sequence
import logging

import numpy as np

import sys
import os

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from errors import ConfigurationError
from models.spec import ModelSpec
from solvers.grid import Grid1D
from solvers.meanfield import MeanFieldSolver
from tools.qoi_tools import QoISpec
from uq.collocation import CollocationRule, ControlMean, collocation_from_values
from workflow import map_tasks, meanfield_task, steady_control_means

logger = logging.getLogger(__name__)

FINE_GRID_FACTOR = 4
FINE_STEP_FACTOR = 4

LABELS = {
    "steady": "collocation of the analytic steady state",
    "transient": "collocation of a fine-grid Fokker-Planck solution (4x cells, dt/4)",
}


class ReferenceSystem:
    """Reference E[q] per (snapshot index, QoI label), computed once per experiment"""

    def __init__(
        self,
        model: ModelSpec,
        qois: Sequence[QoISpec],
        recon_grid: Grid1D,
        kind: str = "steady",
        n_nodes: int = 20,
        N_MF: int = 20,
        epsilon: float = 0.1,
        k: int = 1,
        executor=None,
    ):
        if kind not in LABELS:
            raise ConfigurationError(f"unknown reference '{kind}'", "reference")
        if kind == "steady" and not model.steady_state:
            raise ConfigurationError(f"model {model.key} has no analytic steady state", "reference")
        self.model = model
        self.qois = list(qois)
        self.recon_grid = recon_grid
        self.kind = kind
        self.rule = CollocationRule.for_law(model.uncertainty, n_nodes)
        self.N_MF = N_MF
        self.epsilon = epsilon
        self.k = k
        self.executor = executor
        self._steady: Optional[Dict[str, ControlMean]] = None

    @property
    def label(self) -> str:
        return LABELS[self.kind]

    def steady_means(self) -> Dict[str, ControlMean]:
        """E[q[f_inf]] per QoI; also the MFCV-S control mean"""
        if self._steady is None:
            self._steady = steady_control_means(
                self.model, self.qois, self.recon_grid, self.rule.size, self.executor
            )
        return self._steady

    def compute(self, t_final: float, times: List[float]) -> Dict[tuple, np.ndarray]:
        if self.kind == "steady":
            means = self.steady_means()
            return {(n, q.label): means[q.label].value for n in range(len(times)) for q in self.qois}

        coarse = MeanFieldSolver.for_model(self.model, self.N_MF, self.epsilon, k=self.k)
        fine_grid = coarse.grid.refine(FINE_GRID_FACTOR)
        fine_dt = coarse.dt / FINE_STEP_FACTOR
        logger.info("transient reference: %d cells, dt=%.3e, %d collocation nodes", fine_grid.n_cells, fine_dt, self.rule.size)
        tasks = [
            (self.model, fine_grid, fine_dt, z, t_final, list(times), self.qois, self.recon_grid)
            for z in self.rule.nodes
        ]
        results = map_tasks(self.executor, meanfield_task, tasks)
        return {
            key: collocation_from_values(np.stack([np.asarray(r["values"][key], dtype=float) for r in results]), self.rule).value
            for key in results[0]["values"]
        }
