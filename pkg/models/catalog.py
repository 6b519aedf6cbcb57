"""
Model catalog - builds ModelSpec instances from model_catalog.json
Lookups follow the dictionary convention: {"success": True, ...} or {"error": ..., "available_models": [...]}
"""
import json
import os
import math
from typing import Dict, Any, List

import sys

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from errors import ConfigurationError
from models.spec import (
    AffineWeight,
    BoundedConfidenceWeight,
    DensityInitial,
    DiffusionSpec,
    DoubleGaussianShape,
    InteractionCoefficients,
    ModelSpec,
    NoiseSpec,
    UncertaintyLaw,
    UniformInitial,
)

CATALOG_FILE = "model_catalog.json"


def _catalog_path() -> str:
    current_dir = os.path.dirname(os.path.abspath(__file__))
    return os.path.join(current_dir, "..", CATALOG_FILE)


def load_catalog() -> Dict[str, Any]:
    with open(_catalog_path(), "r", encoding="utf-8") as f:
        return json.load(f)


def list_models() -> List[str]:
    return list(load_catalog().keys())


def get_model_entry(key: str) -> dict:
    """Look up a catalog entry by key.

    Args:
        key: Model key such as 'opinion-A' or 'wealth-B'

    Returns:
        dict: {"success": True, "key": ..., "entry": {...}} or an error dictionary
    """
    try:
        catalog = load_catalog()
    except (OSError, json.JSONDecodeError) as e:
        return {"error": f"Error loading model catalog: {str(e)}", "key": key}

    if key not in catalog:
        return {
            "error": f"Unknown model: {key}",
            "available_models": list(catalog.keys()),
        }
    return {"success": True, "key": key, "entry": catalog[key]}


def _interaction(spec: dict) -> InteractionCoefficients:
    kind = spec.get("type")
    if kind == "affine":
        return InteractionCoefficients.symmetric(AffineWeight(float(spec["c0"]), float(spec.get("c1", 0.0))))
    if kind == "bounded-confidence":
        return InteractionCoefficients.symmetric(BoundedConfidenceWeight(), pair_dependent=True)
    raise ConfigurationError(f"unknown interaction type '{kind}'", "interaction")


def _initial(spec: dict):
    kind = spec.get("type")
    if kind == "uniform":
        return UniformInitial(tuple(spec["lower"]), tuple(spec["upper"]))
    if kind == "double-gaussian":
        return DensityInitial(
            DoubleGaussianShape(float(spec.get("centre", 0.5)), float(spec.get("stiffness", 30.0))),
            label="double-gaussian",
        )
    raise ConfigurationError(f"unsupported initial-condition descriptor '{kind}'", "initial")


def _bound(value) -> float:
    return math.inf if value in ("inf", "Infinity") else float(value)


def build_model(key: str, sigma2: float = None) -> ModelSpec:
    """Create the ModelSpec for a catalog key, optionally overriding the noise variance"""
    result = get_model_entry(key)
    if not result.get("success"):
        available = ", ".join(result.get("available_models", []))
        raise ConfigurationError(f"{result['error']} (available: {available})", "model")

    entry = result["entry"]
    try:
        return ModelSpec(
            key=key,
            family=entry["family"],
            domain=(_bound(entry["domain"][0]), _bound(entry["domain"][1])),
            coefficients=_interaction(entry["interaction"]),
            diffusion=DiffusionSpec(entry["diffusion"]),
            noise=NoiseSpec(float(entry["sigma2"] if sigma2 is None else sigma2)),
            uncertainty=UncertaintyLaw((float(entry["uncertainty"]["lower"]),), (float(entry["uncertainty"]["upper"]),)),
            initial=_initial(entry["initial"]),
            w_max=entry.get("w_max"),
            steady_state=entry.get("steady_state"),
            description=entry.get("description", ""),
        )
    except KeyError as e:
        raise ConfigurationError(f"catalog entry is missing field {e}", key) from e


def model_defaults(key: str) -> Dict[str, Any]:
    result = get_model_entry(key)
    if not result.get("success"):
        raise ConfigurationError(result["error"], "model")
    return dict(result["entry"].get("defaults", {}))
