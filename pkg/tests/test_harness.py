"""
Scenario parsing, error norms, report emission and the verify suite
"""
import json

import numpy as np
import pytest

from errors import ArgumentError, ConfigurationError, ReportIOError
from harness.experiment import ExperimentReport
from harness.norms import field_error_norm, replication_errors
from harness.scenario import load_scenario, parse_scenario
from harness.verify import run_verification
from tools.report_tools import COLUMNS, emit_report

MINIMAL = """
[model]
key = opinion-A

[solver]
N = 1e4
epsilon = 0.1
t_final = 5

[uq]
kinds = MC, MFCV-S
M = 20, 80, 320, 1280
qoi = density, moment1
replications = 10
reference = steady
"""

BUDGET = """
[model]
key = wealth-B

[solver]
N = 2e4
N_MF = 20
t_final = 0.1

[uq]
kinds = MFCV
M = 10
M_MF = {m_mf}
reference = transient
"""


def test_minimal_scenario():
    spec = parse_scenario(MINIMAL)
    assert spec.model_key == "opinion-A"
    assert spec.kinds == ("MC", "MFCV-S")
    assert spec.N == (10_000,)
    assert spec.M == (20, 80, 320, 1280)
    assert spec.snapshot_times == (5.0,)
    assert spec.N_MF == 20
    assert [q.label for q in spec.qoi_specs] == ["density", "moment1"]


def test_environment_defaults_apply_only_when_absent():
    spec = parse_scenario(MINIMAL, env_seed=77, env_output="out")
    assert spec.seed == 77
    assert spec.output_directory == "out"
    pinned = parse_scenario(MINIMAL + "seed = 5\n", env_seed=77)
    assert pinned.seed == 5


def test_budget_gate_accepts_the_bound():
    spec = parse_scenario(BUDGET.format(m_mf=10_000))
    assert spec.M_MF == 10_000


def test_budget_gate_rejects_above_the_bound():
    with pytest.raises(ConfigurationError, match="10000"):
        parse_scenario(BUDGET.format(m_mf=10_001))


def test_duplicate_key_rejected():
    with pytest.raises(ConfigurationError, match="N"):
        parse_scenario(MINIMAL.replace("N = 1e4", "N = 1e4\nN = 2e4"))


def test_unknown_key_rejected():
    with pytest.raises(ConfigurationError, match="threads"):
        parse_scenario(MINIMAL.replace("t_final = 5", "t_final = 5\nthreads = 4"))


def test_unknown_section_rejected():
    with pytest.raises(ConfigurationError, match="plots"):
        parse_scenario(MINIMAL + "\n[plots]\nstyle = dark\n")


def test_missing_required_key_rejected():
    with pytest.raises(ConfigurationError, match="kinds"):
        parse_scenario(MINIMAL.replace("kinds = MC, MFCV-S\n", ""))


def test_unknown_model_rejected():
    with pytest.raises(ConfigurationError):
        parse_scenario(MINIMAL.replace("opinion-A", "opinion-Z"))


def test_snapshot_after_final_time_rejected():
    with pytest.raises(ConfigurationError, match="snapshot_times"):
        parse_scenario(MINIMAL.replace("t_final = 5", "t_final = 5\nsnapshot_times = 1, 6"))


def test_steady_control_needs_steady_state():
    text = MINIMAL.replace("opinion-A", "bounded-confidence").replace("reference = steady", "reference = transient")
    with pytest.raises(ConfigurationError, match="steady"):
        parse_scenario(text)


def test_gini_on_opinion_model_rejected():
    with pytest.raises(ConfigurationError, match="gini"):
        parse_scenario(MINIMAL.replace("density, moment1", "gini"))


def test_control_variates_need_two_samples():
    with pytest.raises(ConfigurationError, match="M >= 2"):
        parse_scenario(MINIMAL.replace("M = 20, 80, 320, 1280", "M = 1, 20"))
    plain = parse_scenario(MINIMAL.replace("kinds = MC, MFCV-S", "kinds = MC").replace("M = 20, 80, 320, 1280", "M = 1"))
    assert plain.M == (1,)


def test_config_hash_tracks_results_not_location():
    spec = parse_scenario(MINIMAL)
    assert spec.config_hash == parse_scenario(MINIMAL).config_hash
    assert spec.config_hash == spec.with_overrides(output_directory="elsewhere").config_hash
    assert spec.config_hash != spec.with_overrides(seed=1).config_hash


def test_full_scale_uses_catalog_sizes():
    spec = parse_scenario(MINIMAL).at_full_scale()
    assert spec.N == (20_000,)
    assert spec.replications == 50


def test_shipped_scenarios_parse():
    import os

    root = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "scenarios")
    for name in sorted(os.listdir(root)):
        spec = load_scenario(os.path.join(root, name))
        assert spec.kinds


def test_wealth_initial_data_scenario_is_shipped():
    import os

    path = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "scenarios", "test2a.ini")
    spec = load_scenario(path)
    assert spec.model_key == "wealth-A"
    assert "MFCV" in spec.kinds
    assert spec.M_MF == 2000


def test_missing_scenario_file(tmp_path):
    with pytest.raises(ConfigurationError):
        load_scenario(str(tmp_path / "absent.ini"))


def test_norm_of_exact_estimates_is_zero():
    reference = np.array([1.0, 2.0, 3.0])
    assert field_error_norm(np.tile(reference, (4, 1)), reference, dw=0.5) == 0.0


def test_single_replication_is_plain_l2_distance():
    reference = np.zeros(4)
    estimate = np.array([1.0, -1.0, 2.0, 0.0])
    expected = np.sqrt(0.25 * 6.0)
    assert field_error_norm(estimate, reference, dw=0.25) == pytest.approx(expected)
    assert replication_errors(estimate, reference, dw=0.25)[0] == pytest.approx(expected)


def test_orderings_coincide_for_p_two(rng):
    estimates = rng.normal(size=(10, 30))
    reference = np.zeros(30)
    a = field_error_norm(estimates, reference, dw=0.1, ordering="rms-first")
    b = field_error_norm(estimates, reference, dw=0.1, ordering="norm-first")
    assert a == pytest.approx(b, rel=1e-12)


def test_rms_first_is_smaller_for_p_four(rng):
    estimates = rng.normal(size=(10, 30))
    reference = np.zeros(30)
    a = field_error_norm(estimates, reference, dw=0.1, p=4, ordering="rms-first")
    b = field_error_norm(estimates, reference, dw=0.1, p=4, ordering="norm-first")
    assert a <= b + 1e-12


def test_scalar_norm_is_rms():
    assert field_error_norm(np.array([1.0, -1.0, 3.0]), np.array(0.0)) == pytest.approx(np.sqrt(11.0 / 3.0))


def test_norm_shape_mismatch_rejected():
    with pytest.raises(ArgumentError):
        field_error_norm(np.zeros((2, 3)), np.zeros(4))


def _report():
    return ExperimentReport(scenario={"model_key": "opinion-A"}, provenance={"seed": 1}, status="complete")


def test_empty_report_has_headers_only(tmp_path):
    written = emit_report(_report(), str(tmp_path))
    assert len(written) == 1 + len(COLUMNS)
    for filename, columns in COLUMNS.items():
        lines = (tmp_path / filename).read_text().splitlines()
        assert lines == [",".join(columns)]
    data = json.loads((tmp_path / "report.json").read_text())
    assert data["status"] == "complete"
    assert data["error_vs_M"] == []


def test_report_is_byte_identical_and_excludes_wall_time(tmp_path):
    report = _report()
    report.error_vs_M.append({"kind": "MC", "M": 4, "L2_error": 0.1, "stderr": 0.01, "N": 100, "t": 1.0, "qoi": "density"})
    report.timings.append({"kind": "MC", "N": 100, "M": 4, "replication": 0, "wall_time": 1.234})
    emit_report(report, str(tmp_path / "a"))
    report.timings[0]["wall_time"] = 9.876
    emit_report(report, str(tmp_path / "b"))
    first = (tmp_path / "a" / "report.json").read_bytes()
    assert first == (tmp_path / "b" / "report.json").read_bytes()
    assert b"wall_time" not in first
    assert (tmp_path / "a" / "error_vs_M.csv").read_bytes() == (tmp_path / "b" / "error_vs_M.csv").read_bytes()


def test_unwritable_report_directory(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("not a directory")
    with pytest.raises(ReportIOError):
        emit_report(_report(), str(blocker))


def test_verify_suite_passes():
    results = run_verification()
    assert len(results) == 5
    failed = [(name, detail) for name, passed, detail in results if not passed]
    assert failed == []
