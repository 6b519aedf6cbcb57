"""
Experiment runner - sweeps estimator kinds and sample sizes over R replications
and tabulates errors against the reference
"""
from concurrent.futures import ProcessPoolExecutor
from contextlib import nullcontext
from dataclasses import dataclass, field
from itertools import product
from typing import Any, Dict, List, Optional
import logging
import math
import time

import numpy as np

import sys
import os

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from errors import KineticUQError, NumericError
from harness.norms import field_error_norm, replication_errors
from harness.references import ReferenceSystem
from harness.scenario import ScenarioSpec
from solvers.dsmc import RngStreamSpec
from solvers.grid import Grid1D
from tools.qoi_tools import POPULATION_GRID, QoISpec, parametric_tail_index
from uq.collocation import CollocationRule, collocation_mean
from workflow import run_mfcv

logger = logging.getLogger(__name__)

CODE_VERSION = "0.1.0"


@dataclass
class ExperimentReport:
    scenario: Dict[str, Any]
    provenance: Dict[str, Any]
    error_vs_M: List[dict] = field(default_factory=list)
    error_vs_t: List[dict] = field(default_factory=list)
    density: List[dict] = field(default_factory=list)
    lorenz: List[dict] = field(default_factory=list)
    estimators: List[dict] = field(default_factory=list)
    diagnostics: Dict[str, Any] = field(default_factory=dict)
    timings: List[dict] = field(default_factory=list)
    status: str = "running"
    failure: Optional[str] = None

    def ledger(self) -> Dict[str, Any]:
        """Everything that goes into report.json; wall-times live in timings.csv"""
        return {
            "status": self.status,
            "failure": self.failure,
            "scenario": self.scenario,
            "provenance": self.provenance,
            "error_vs_M": self.error_vs_M,
            "error_vs_t": self.error_vs_t,
            "estimators": self.estimators,
            "diagnostics": self.diagnostics,
        }

    def check_finite(self):
        for table in (self.error_vs_M, self.error_vs_t, self.estimators):
            for row in table:
                for key, value in row.items():
                    if isinstance(value, float) and not math.isfinite(value):
                        raise NumericError(f"non-finite {key} in report row {row}")


def reconstruction_grid(model, n_cells: int) -> Grid1D:
    lo, hi = model.window
    return Grid1D(lo, hi, n_cells)


def _cell_width(qoi: QoISpec, recon_grid: Grid1D) -> float:
    if qoi.name == "density":
        return recon_grid.dw
    if qoi.name == "lorenz":
        return float(POPULATION_GRID[1] - POPULATION_GRID[0])
    return 1.0


def run_experiment(spec: ScenarioSpec, threads: int = 1) -> ExperimentReport:
    """Run every (kind, N, M) sweep point for R replications

    Returns:
        ExperimentReport: error tables, estimator summaries and diagnostics.
        On failure the partial report is attached to the raised error as `partial_report`.
    """
    model = spec.model()
    recon_grid = reconstruction_grid(model, spec.N_Z)
    qois = spec.qoi_specs
    times = list(spec.snapshot_times)

    report = ExperimentReport(
        scenario=spec.canonical(),
        provenance={
            "seed": spec.seed,
            "config_hash": spec.config_hash,
            "code_version": CODE_VERSION,
        },
    )

    pool = ProcessPoolExecutor(max_workers=threads) if threads > 1 else nullcontext()
    try:
        with pool as executor:
            references = ReferenceSystem(
                model, qois, recon_grid, spec.reference, spec.collocation_nodes,
                spec.N_MF, spec.epsilon, spec.k, executor,
            )
            report.provenance["reference"] = references.label
            reference_values = references.compute(spec.t_final, times)
            steady_means = references.steady_means() if "MFCV-S" in spec.kinds else None

            kernel_variances, hill_indices = [], []
            base = RngStreamSpec(spec.seed)
            for sweep_index, (N, M) in enumerate(product(spec.N, spec.M)):
                for kind in spec.kinds:
                    logger.info("sweep point %s N=%d M=%d (%d replications)", kind, N, M, spec.replications)
                    runs = []
                    for r in range(spec.replications):
                        started = time.perf_counter()
                        estimates = run_mfcv(
                            model, kind, N, M, spec.N_MF, spec.M_MF, spec.k, spec.epsilon, spec.t_final, qois,
                            base.child(sweep_index, r), recon_grid=recon_grid, snapshot_times=times,
                            executor=executor, collocation_nodes=spec.collocation_nodes,
                            steady_control_means=steady_means if kind == "MFCV-S" else None,
                        )
                        report.timings.append(
                            {"kind": kind, "N": N, "M": M, "replication": r, "wall_time": time.perf_counter() - started}
                        )
                        runs.append(estimates)
                    first = next(iter(runs[0].values()))
                    kernel_variances.append(first.ledger.get("kernel_variance", 0.0))
                    if "hill_tail_index" in first.ledger:
                        hill_indices.append(first.ledger["hill_tail_index"])
                    _tabulate(report, kind, N, M, runs, reference_values, qois, times, recon_grid)

            report.diagnostics = {
                "max_kernel_variance": float(np.max(kernel_variances)) if kernel_variances else 0.0,
                "reference": references.label,
            }
            if model.family == "wealth":
                rule = CollocationRule.for_law(model.uncertainty, spec.collocation_nodes)
                report.diagnostics["tail_index_parametric_expected"] = float(
                    collocation_mean(lambda z: parametric_tail_index(model, z), rule).value
                )
                report.diagnostics["tail_index_hill_mean"] = float(np.mean(hill_indices)) if hill_indices else None
                report.diagnostics["tail_index_note"] = (
                    "parametric: 1 + 2 lambda(z) / sigma2 averaged over z; hill: top 5% of particles at the last snapshot"
                )
        report.check_finite()
        report.status = "complete"
    except KineticUQError as e:
        report.status = "failed"
        report.failure = f"{type(e).__name__}: {e}"
        e.partial_report = report
        raise
    return report


def _tabulate(report, kind, N, M, runs, reference_values, qois, times, recon_grid):
    for n, t in enumerate(times):
        for q in qois:
            key = (n, q.label)
            values = np.stack([np.asarray(run[key].value, dtype=float) for run in runs])
            reference = np.asarray(reference_values[key], dtype=float)
            dw = _cell_width(q, recon_grid)
            error = field_error_norm(values, reference, dw=dw, p=2.0)
            per_run = replication_errors(values, reference, dw=dw, p=2.0)
            stderr = float(per_run.std(ddof=1) / math.sqrt(len(runs))) if len(runs) > 1 else 0.0

            report.error_vs_M.append(
                {"kind": kind, "M": M, "L2_error": error, "stderr": stderr, "N": N, "t": t, "qoi": q.label}
            )
            report.error_vs_t.append(
                {"kind": kind, "t": t, "L2_error": error, "stderr": stderr, "N": N, "M": M, "qoi": q.label}
            )

            estimates = [run[key] for run in runs]
            ledger = estimates[0].ledger
            report.estimators.append({
                "kind": kind, "N": N, "M": M, "t": t, "qoi": q.label,
                "N_MF": ledger["N_MF"], "M_MF": ledger["M_MF"], "k": ledger["k"], "epsilon": ledger["epsilon"],
                "lambda_hat_mean": float(np.mean([np.mean(e.lam) for e in estimates])),
                "rho_hat_mean": float(np.mean([np.mean(e.rho) for e in estimates])),
                "var_mc": float(np.mean([np.mean(e.var_mc) for e in estimates])),
                "var_cv": float(np.mean([np.mean(e.var_cv) for e in estimates])),
                "control_mean_stderr": float(ledger.get("control_mean_stderr", 0.0)),
            })

            mean_estimate = values.mean(axis=0)
            if q.name == "density":
                for w, est, ref in zip(recon_grid.centres, mean_estimate, reference):
                    report.density.append(
                        {"kind": kind, "N": N, "M": M, "t": t, "w": float(w), "estimate": float(est), "reference": float(ref)}
                    )
            elif q.name == "lorenz":
                for F, est, ref in zip(POPULATION_GRID, mean_estimate, reference):
                    report.lorenz.append(
                        {"kind": kind, "N": N, "M": M, "t": t, "F": float(F), "estimate": float(est), "reference": float(ref)}
                    )
