"""
Scenario documents: strict INI text with [model], [solver], [uq] and [output] sections
"""
from configparser import ConfigParser, DuplicateOptionError, DuplicateSectionError, Error as ConfigParserError
from dataclasses import asdict, dataclass, replace
from typing import Dict, Optional, Tuple
import hashlib
import json
import logging

import sys
import os

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from errors import ConfigurationError
from models.catalog import build_model, model_defaults
from tools.qoi_tools import QoISpec
from uq.estimators import budget_max_mmf

logger = logging.getLogger(__name__)

KINDS = ("MC", "MFCV-S", "MFCV")
CONTROL_KINDS = ("MFCV-S", "MFCV")
REFERENCES = ("steady", "transient")
FULL_SCALE_REPLICATIONS = 50

# section -> key -> required
SCHEMA: Dict[str, Dict[str, bool]] = {
    "model": {"key": True, "sigma2": False},
    "solver": {"N": True, "epsilon": False, "t_final": False, "snapshot_times": False, "N_MF": False, "k": False, "N_Z": False},
    "uq": {
        "kinds": True, "M": True, "M_MF": False, "qoi": False, "replications": False, "seed": False,
        "reference": False, "collocation_nodes": False,
    },
    "output": {"directory": False},
}


@dataclass(frozen=True)
class ScenarioSpec:
    model_key: str
    kinds: Tuple[str, ...]
    N: Tuple[int, ...]
    M: Tuple[int, ...]
    N_MF: int
    M_MF: int
    k: int
    N_Z: int
    epsilon: float
    t_final: float
    snapshot_times: Tuple[float, ...]
    qois: Tuple[str, ...]
    replications: int
    seed: int
    reference: str
    collocation_nodes: int = 20
    sigma2: Optional[float] = None
    output_directory: str = "results"

    @property
    def qoi_specs(self):
        return [QoISpec.parse(q) for q in self.qois]

    def model(self):
        return build_model(self.model_key, self.sigma2)

    def canonical(self) -> dict:
        """Resolved fields that determine the results (output location excluded)"""
        data = asdict(self)
        data.pop("output_directory")
        return data

    @property
    def config_hash(self) -> str:
        text = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]

    def with_overrides(self, seed=None, replications=None, output_directory=None) -> "ScenarioSpec":
        updated = replace(
            self,
            seed=self.seed if seed is None else int(seed),
            replications=self.replications if replications is None else int(replications),
            output_directory=self.output_directory if output_directory is None else output_directory,
        )
        validate_scenario(updated)
        return updated

    def at_full_scale(self) -> "ScenarioSpec":
        """Catalog sample sizes and the full-scale replication count"""
        defaults = model_defaults(self.model_key)
        updated = replace(
            self,
            N=(int(defaults.get("N", max(self.N))),),
            M_MF=int(defaults.get("M_MF", self.M_MF)),
            replications=FULL_SCALE_REPLICATIONS,
        )
        validate_scenario(updated)
        return updated


def _number(text: str, key: str, kind=float):
    try:
        value = float(text)
    except ValueError as e:
        raise ConfigurationError(f"expected a number, got '{text}'", key) from e
    if kind is int:
        if value != int(value):
            raise ConfigurationError(f"expected an integer, got '{text}'", key)
        return int(value)
    return value


def _list(text: str, key: str, kind=float) -> Tuple:
    items = [item.strip() for item in text.split(",") if item.strip()]
    if not items:
        raise ConfigurationError("empty list", key)
    return tuple(_number(item, key, kind) for item in items)


def _read(text: str) -> ConfigParser:
    parser = ConfigParser(strict=True, interpolation=None, default_section="__defaults__")
    parser.optionxform = str
    try:
        parser.read_string(text)
    except DuplicateOptionError as e:
        raise ConfigurationError(f"duplicated key in section [{e.section}]", e.option) from e
    except DuplicateSectionError as e:
        raise ConfigurationError("duplicated section", e.section) from e
    except ConfigParserError as e:
        raise ConfigurationError(f"malformed scenario document: {e}", "scenario") from e

    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigurationError(f"unknown section, expected one of {sorted(SCHEMA)}", section)
        for key in parser[section]:
            if key not in SCHEMA[section]:
                raise ConfigurationError(f"unknown key in section [{section}]", key)
    for section, keys in SCHEMA.items():
        for key, required in keys.items():
            if required and not parser.has_option(section, key):
                raise ConfigurationError(f"missing required key in section [{section}]", key)
    return parser


def parse_scenario(text: str, env_seed: Optional[int] = None, env_output: Optional[str] = None) -> ScenarioSpec:
    """Parse and validate a scenario document; catalog defaults fill the optional keys"""
    parser = _read(text)
    model_key = parser.get("model", "key").strip()
    defaults = model_defaults(model_key)

    def get(section, key, fallback):
        if parser.has_option(section, key):
            return parser.get(section, key)
        logger.info("default %s.%s = %s", section, key, fallback)
        return str(fallback)

    t_final = _number(get("solver", "t_final", defaults.get("t_final", 1.0)), "t_final")
    snapshot_raw = get("solver", "snapshot_times", t_final)
    seed_default = env_seed if env_seed is not None else 0
    sigma2 = _number(parser.get("model", "sigma2"), "sigma2") if parser.has_option("model", "sigma2") else None

    kinds = tuple(k.strip() for k in parser.get("uq", "kinds").split(",") if k.strip())
    qois = tuple(q.strip() for q in get("uq", "qoi", "density").split(",") if q.strip())

    spec = ScenarioSpec(
        model_key=model_key,
        kinds=kinds,
        N=_list(parser.get("solver", "N"), "N", int),
        M=_list(parser.get("uq", "M"), "M", int),
        N_MF=_number(get("solver", "N_MF", defaults.get("N_MF", 20)), "N_MF", int),
        M_MF=_number(get("uq", "M_MF", defaults.get("M_MF", 0)), "M_MF", int),
        k=_number(get("solver", "k", defaults.get("k", 1)), "k", int),
        N_Z=_number(get("solver", "N_Z", defaults.get("N_Z", 100)), "N_Z", int),
        epsilon=_number(get("solver", "epsilon", defaults.get("epsilon", 0.1)), "epsilon"),
        t_final=t_final,
        snapshot_times=_list(snapshot_raw, "snapshot_times"),
        qois=qois,
        replications=_number(get("uq", "replications", 1), "replications", int),
        seed=_number(get("uq", "seed", seed_default), "seed", int),
        reference=get("uq", "reference", defaults.get("reference", "steady")).strip(),
        collocation_nodes=_number(get("uq", "collocation_nodes", 20), "collocation_nodes", int),
        sigma2=sigma2,
        output_directory=get("output", "directory", env_output or "results").strip(),
    )
    validate_scenario(spec)
    return spec


def load_scenario(path: str, **env) -> ScenarioSpec:
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise ConfigurationError(f"cannot read scenario file ({e.strerror})", path) from e
    return parse_scenario(text, **env)


def validate_scenario(spec: ScenarioSpec):
    for key in ("N_MF", "k", "N_Z", "replications", "collocation_nodes"):
        if getattr(spec, key) < 1:
            raise ConfigurationError("must be a positive integer", key)
    if any(n < 2 for n in spec.N):
        raise ConfigurationError("every N must be at least 2", "N")
    if any(m < 1 for m in spec.M):
        raise ConfigurationError("every M must be positive", "M")
    if spec.M_MF < 0:
        raise ConfigurationError("must be nonnegative", "M_MF")
    if not 0.0 < spec.epsilon <= 1.0:
        raise ConfigurationError(f"must lie in (0, 1], got {spec.epsilon}", "epsilon")
    if spec.t_final < 0:
        raise ConfigurationError("must be nonnegative", "t_final")
    if list(spec.snapshot_times) != sorted(spec.snapshot_times) or spec.snapshot_times[-1] > spec.t_final:
        raise ConfigurationError(f"must be sorted and not exceed t_final={spec.t_final}", "snapshot_times")
    if spec.snapshot_times[0] < 0:
        raise ConfigurationError("must be nonnegative", "snapshot_times")
    if not 0 <= spec.seed < 2 ** 64:
        raise ConfigurationError("must be a 64-bit unsigned integer", "seed")
    if spec.reference not in REFERENCES:
        raise ConfigurationError(f"must be one of {REFERENCES}", "reference")
    if spec.collocation_nodes < 20:
        raise ConfigurationError("references need at least 20 collocation nodes", "collocation_nodes")
    if not spec.kinds or any(kind not in KINDS for kind in spec.kinds):
        raise ConfigurationError(f"expected a list drawn from {KINDS}, got {list(spec.kinds)}", "kinds")
    if any(kind in CONTROL_KINDS for kind in spec.kinds) and min(spec.M) < 2:
        raise ConfigurationError("control-variate estimators need M >= 2 to estimate lambda", "M")

    model = spec.model()
    for qoi in spec.qoi_specs:
        qoi.check_model(model)
    if ("MFCV-S" in spec.kinds or spec.reference == "steady") and not model.steady_state:
        raise ConfigurationError(f"model {spec.model_key} has no analytic steady state", "reference")
    if "MFCV" in spec.kinds:
        if spec.M_MF < 1:
            raise ConfigurationError("MFCV needs M_MF >= 1", "M_MF")
        bound = budget_max_mmf(min(spec.N), min(spec.M), spec.N_MF, spec.k)
        if spec.M_MF > bound:
            raise ConfigurationError(
                f"M_MF={spec.M_MF} exceeds the cost bound floor(k N M / N_MF) = {bound}", "M_MF"
            )
