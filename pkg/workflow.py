"""
LangGraph Workflow - MC / MFCV-S / MFCV estimator orchestration
sample_nodes -> primary -> (steady_control | meanfield_control) -> estimate
"""
from concurrent.futures import Executor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, TypedDict
import logging

import numpy as np
from langgraph.graph import StateGraph, END

import sys
import os

sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from errors import ArgumentError, ConfigurationError, InvariantViolation
from models.spec import ModelSpec
from solvers.dsmc import RngStreamSpec, run_dsmc
from solvers.grid import Grid1D
from solvers.meanfield import MeanFieldSolver, run_fp
from solvers.steady_state import steady_state_params
from tools.qoi_tools import (
    QoISpec,
    hill_tail_index,
    kernel_variance,
    qoi_from_density,
    qoi_from_ensemble,
    qoi_from_steady,
)
from uq.collocation import CollocationRule, ControlMean, collocation_from_values
from uq.estimators import (
    CvEstimate,
    QoISampleSet,
    RandomNodeSet,
    budget_max_mmf,
    control_mean_from_samples,
    cv_estimate,
    mc_report,
    optimal_lambda_hat,
)

logger = logging.getLogger(__name__)

KINDS = ("MC", "MFCV-S", "MFCV")

# (time index, QoI label) -> value
Evaluations = Dict[Tuple[int, str], object]


@dataclass
class MFCVRequest:
    """Everything one estimator run needs; the stream fixes nodes and particle noise"""

    model: ModelSpec
    kind: str
    N: int
    M: int
    epsilon: float
    t_final: float
    qois: Sequence[QoISpec]
    recon_grid: Grid1D
    stream: RngStreamSpec
    snapshot_times: Optional[Sequence[float]] = None
    N_MF: int = 20
    M_MF: int = 0
    k: int = 1
    collocation_nodes: int = 20
    force_lambda: Optional[float] = None
    steady_control_means: Optional[Dict[str, ControlMean]] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown estimator kind '{self.kind}', expected one of {KINDS}", "kinds")
        if not self.snapshot_times:
            self.snapshot_times = [self.t_final]

    @property
    def times(self) -> List[float]:
        return list(self.snapshot_times)


class MFCVState(TypedDict, total=False):
    """State carried through the estimator graph"""
    request: MFCVRequest
    nodes: RandomNodeSet
    primary: Evaluations
    primary_nodes: np.ndarray
    diagnostics: Dict[str, float]
    control: Evaluations
    control_nodes: np.ndarray
    control_means: Dict[Tuple[int, str], ControlMean]
    estimates: Dict[Tuple[int, str], CvEstimate]


# ---------------------------------------------------------------------------
# Per-node tasks; module level so a process pool can pickle them
# ---------------------------------------------------------------------------

def primary_task(args) -> dict:
    """DSMC at one node: QoIs per snapshot plus sampling diagnostics"""
    model, N, z, index, epsilon, t_final, times, stream, qois, recon_grid = args
    snapshots = run_dsmc(model, N, z, epsilon, t_final, stream.with_key(index, "dsmc"), times)
    values = {}
    for n, snap in enumerate(snapshots):
        for q in qois:
            values[(n, q.label)] = qoi_from_ensemble(q, snap, recon_grid)
    last = snapshots[-1]
    diagnostics = {"kernel_variance": float(kernel_variance(last, recon_grid).max())}
    if model.family == "wealth":
        diagnostics["hill_tail_index"] = hill_tail_index(last)
    return {"z": z, "values": values, "diagnostics": diagnostics}


def meanfield_task(args) -> dict:
    """FP solution at one node: QoIs at the latest step at or before each snapshot"""
    model, grid, dt, z, t_final, times, qois, recon_grid = args
    densities = run_fp(model, grid, z, t_final, dt, times)
    values = {}
    for n, density in enumerate(densities):
        for q in qois:
            values[(n, q.label)] = qoi_from_density(q, density.values, grid, recon_grid)
    return {"z": z, "values": values}


def steady_task(args) -> dict:
    """Analytic steady-state QoIs at one node"""
    model, z, qois, recon_grid = args
    params = steady_state_params(model, z)
    return {"z": z, "values": {q.label: qoi_from_steady(q, params, recon_grid) for q in qois}}


def steady_control_means(model: ModelSpec, qois, recon_grid: Grid1D, n_nodes: int = 20, executor=None):
    """E[q[f_inf]] by collocation, keyed by QoI label"""
    rule = CollocationRule.for_law(model.uncertainty, n_nodes)
    results = map_tasks(executor, steady_task, [(model, z, qois, recon_grid) for z in rule.nodes])
    return {
        q.label: collocation_from_values(np.stack([np.asarray(r["values"][q.label]) for r in results]), rule)
        for q in qois
    }


def map_tasks(executor: Optional[Executor], fn, tasks: List) -> List:
    if executor is None:
        return [fn(t) for t in tasks]
    return list(executor.map(fn, tasks))


class MFCVWorkflow:
    """LangGraph workflow for one estimator evaluation"""

    def __init__(self, executor: Optional[Executor] = None):
        self.executor = executor
        self.workflow = self._build_workflow()

    def _build_workflow(self):
        workflow = StateGraph(MFCVState)

        workflow.add_node("sample_nodes", self._sample_nodes_node)
        workflow.add_node("primary", self._primary_node)
        workflow.add_node("steady_control", self._steady_control_node)
        workflow.add_node("meanfield_control", self._meanfield_control_node)
        workflow.add_node("estimate", self._estimate_node)

        workflow.set_entry_point("sample_nodes")
        workflow.add_edge("sample_nodes", "primary")
        workflow.add_conditional_edges(
            "primary",
            self._route_from_primary,
            {
                "steady_control": "steady_control",
                "meanfield_control": "meanfield_control",
                "estimate": "estimate",
            },
        )
        workflow.add_edge("steady_control", "estimate")
        workflow.add_edge("meanfield_control", "estimate")
        workflow.add_edge("estimate", END)

        return workflow.compile()

    def _sample_nodes_node(self, state: MFCVState) -> MFCVState:
        request = state["request"]
        if request.kind != "MC" and request.M < 2 and request.force_lambda is None:
            raise ConfigurationError(f"{request.kind} needs M >= 2 to estimate lambda, got M={request.M}", "M")
        if request.kind == "MFCV":
            bound = budget_max_mmf(request.N, request.M, request.N_MF, request.k)
            if request.M_MF > bound:
                raise ConfigurationError(
                    f"M_MF={request.M_MF} exceeds the cost bound floor(k N M / N_MF) = {bound}", "M_MF"
                )
            if request.M_MF < 1:
                raise ConfigurationError("MFCV needs M_MF >= 1 control samples", "M_MF")
            logger.info("MFCV budget: M_MF=%d of at most %d (N=%d, M=%d, N_MF=%d, k=%d)",
                        request.M_MF, bound, request.N, request.M, request.N_MF, request.k)
        state["nodes"] = RandomNodeSet.draw(request.model.uncertainty, request.M, request.stream)
        return state

    def _primary_node(self, state: MFCVState) -> MFCVState:
        request = state["request"]
        tasks = [
            (request.model, request.N, z, k, request.epsilon, request.t_final, request.times,
             request.stream, request.qois, request.recon_grid)
            for k, z in state["nodes"]
        ]
        results = map_tasks(self.executor, primary_task, tasks)
        state["primary"] = _collect(results)
        state["primary_nodes"] = np.array([r["z"] for r in results])
        state["diagnostics"] = {
            key: float(np.mean([r["diagnostics"][key] for r in results])) for key in results[0]["diagnostics"]
        }
        return state

    def _steady_control_node(self, state: MFCVState) -> MFCVState:
        request = state["request"]
        results = map_tasks(
            self.executor, steady_task, [(request.model, z, request.qois, request.recon_grid) for z in state["nodes"].nodes]
        )
        control = {}
        for n in range(len(request.times)):
            for q in request.qois:
                control[(n, q.label)] = np.stack([np.asarray(r["values"][q.label], dtype=float) for r in results])
        state["control"] = control
        state["control_nodes"] = np.array([r["z"] for r in results])

        means = request.steady_control_means or steady_control_means(
            request.model, request.qois, request.recon_grid, request.collocation_nodes, self.executor
        )
        state["control_means"] = {
            (n, q.label): means[q.label] for n in range(len(request.times)) for q in request.qois
        }
        return state

    def _meanfield_control_node(self, state: MFCVState) -> MFCVState:
        request = state["request"]
        solver = MeanFieldSolver.for_model(request.model, request.N_MF, request.epsilon, k=request.k)

        def tasks(nodes):
            return [
                (request.model, solver.grid, solver.dt, z, request.t_final, request.times, request.qois, request.recon_grid)
                for z in nodes
            ]

        results = map_tasks(self.executor, meanfield_task, tasks(state["nodes"].nodes))
        state["control"] = _collect(results)
        state["control_nodes"] = np.array([r["z"] for r in results])

        fresh = RandomNodeSet.draw(request.model.uncertainty, request.M_MF, request.stream, purpose="control-nodes")
        online = _collect(map_tasks(self.executor, meanfield_task, tasks(fresh.nodes)))
        state["control_means"] = {
            key: control_mean_from_samples(QoISampleSet(values, name=key[1]))
            for key, values in online.items()
        }
        return state

    def _estimate_node(self, state: MFCVState) -> MFCVState:
        request = state["request"]
        nodes = state["nodes"]
        estimates = {}
        if request.kind != "MC" and not np.array_equal(state["control_nodes"], state["primary_nodes"]):
            raise InvariantViolation("control samples were not evaluated at the primary nodes")

        for n in range(len(request.times)):
            for q in request.qois:
                key = (n, q.label)
                primary = QoISampleSet(state["primary"][key], name=q.label, nodes=nodes)
                if request.kind == "MC":
                    estimate = mc_report(primary)
                else:
                    control = QoISampleSet(state["control"][key], name=q.label, nodes=nodes)
                    mean = state["control_means"][key]
                    if request.force_lambda is not None:
                        lam = np.full(primary.entry_shape, float(request.force_lambda))
                    else:
                        lam = optimal_lambda_hat(primary, control, mean)
                    estimate = cv_estimate(primary, control, mean, lam, kind=request.kind)
                estimate.ledger = _ledger(request, estimate)
                estimate.ledger.update(state.get("diagnostics", {}))
                estimates[key] = estimate
        state["estimates"] = estimates
        return state

    def _route_from_primary(self, state: MFCVState) -> str:
        kind = state["request"].kind
        if kind == "MFCV-S":
            return "steady_control"
        if kind == "MFCV":
            return "meanfield_control"
        return "estimate"

    def run(self, request: MFCVRequest) -> Dict[Tuple[int, str], CvEstimate]:
        """Run the graph and return estimates keyed by (snapshot index, QoI label)"""
        initial_state: MFCVState = {"request": request}
        final_state = self.workflow.invoke(initial_state)
        return final_state["estimates"]


def _collect(results: List[dict]) -> dict:
    keys = results[0]["values"].keys()
    return {key: np.stack([np.asarray(r["values"][key], dtype=float) for r in results]) for key in keys}


def _ledger(request: MFCVRequest, estimate: CvEstimate) -> dict:
    ledger = {
        "N": request.N,
        "M": request.M,
        "N_MF": request.N_MF if request.kind == "MFCV" else 0,
        "M_MF": request.M_MF if request.kind == "MFCV" else 0,
        "k": request.k,
        "epsilon": request.epsilon,
    }
    if estimate.control_mean is not None:
        ledger["control_mean_method"] = estimate.control_mean.method
        ledger["control_mean_stderr"] = float(np.max(np.asarray(estimate.control_mean.stderr, dtype=float)))
    return ledger


def create_workflow(executor: Optional[Executor] = None) -> MFCVWorkflow:
    """Factory function to create the estimator workflow"""
    return MFCVWorkflow(executor)


def run_mfcv(
    model: ModelSpec,
    kind: str,
    N: int,
    M: int,
    N_MF: int,
    M_MF: int,
    k: int,
    epsilon: float,
    t_final: float,
    qois: Sequence[QoISpec],
    seed,
    recon_grid: Optional[Grid1D] = None,
    snapshot_times: Optional[Sequence[float]] = None,
    executor: Optional[Executor] = None,
    **options,
) -> Dict[Tuple[int, str], CvEstimate]:
    """One MC / MFCV-S / MFCV estimate; `seed` is an int or an RngStreamSpec"""
    if M < 1 or N < 2:
        raise ArgumentError(f"need M >= 1 and N >= 2, got M={M}, N={N}")
    stream = seed if isinstance(seed, RngStreamSpec) else RngStreamSpec(int(seed))
    if recon_grid is None:
        lo, hi = model.window
        recon_grid = Grid1D(lo, hi, 100)
    request = MFCVRequest(
        model=model, kind=kind, N=N, M=M, epsilon=epsilon, t_final=t_final, qois=list(qois),
        recon_grid=recon_grid, stream=stream, snapshot_times=snapshot_times,
        N_MF=N_MF, M_MF=M_MF, k=k, **options,
    )
    return create_workflow(executor).run(request)
