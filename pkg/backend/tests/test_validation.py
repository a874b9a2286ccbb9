import json
import os

import pytest
from numpy.testing import assert_allclose

import discord_lab
from core.exceptions import OracleDiscrepancy
from schemas.scenario import CheckResult, RunReport
from services.validation_service import ValidationService

EXPECTED_CHECKS = {
    "f2_steady_discord",
    "f2_integrated_discord",
    "f2_small_xi_discord",
    "f1_ground_state",
    "f1_ground_state_discord",
    "f1_stationary_matrix",
    "f2_stationary_matrix",
    "f1_null_space",
    "f2_null_space",
    "f2_turning_point",
    "bell_discord",
    "mixed_discord",
    "basis_projector_discord",
    "x_eigenvalues",
    "brute_force_discord",
    "f1_trajectory",
    "f2_trajectory",
    "max_trace_drift",
    "max_hermiticity_correction",
    "min_eigenvalue",
    "rk4_order_ratio",
    "f1_discord_non_increasing",
    "f2_discord_non_decreasing",
    "f1_half_of_f2",
}


@pytest.fixture(scope="module")
def validation_dir(tmp_path_factory) -> str:
    return str(tmp_path_factory.mktemp("validate"))


@pytest.fixture(scope="module")
def report(validation_dir):
    return ValidationService().run(output=validation_dir, random_states=5, t_max=2.0)


class TestValidationRun:
    def test_every_check_recorded(self, report):
        names = [check.name for check in report.checks]
        assert set(names) == EXPECTED_CHECKS
        assert len(names) == len(set(names))

    def test_all_checks_pass(self, report):
        assert [check.name for check in report.checks if not check.passed] == []
        assert report.exit_code == 0
        report.raise_for_discrepancies()

    def test_anchor_values(self, report):
        checks = {check.name: check for check in report.checks}
        assert_allclose(checks["f2_steady_discord"].value, 0.38, atol=0.01)
        assert_allclose(checks["f2_small_xi_discord"].value, 0.42, atol=0.01)
        assert_allclose(checks["f2_turning_point"].value, 0.77, atol=0.02)
        assert_allclose(checks["bell_discord"].value, 1.0, atol=1e-6)

    def test_rk4_order_ratio(self, report):
        ratio = report.comparisons["rk4_order_ratio"]
        assert 16.0 * 0.7 <= ratio <= 16.0 * 1.3

    def test_full_vs_appendix_comparisons(self, report):
        for label in ("none", "F1", "F2"):
            assert report.comparisons[f"full_vs_appendix_{label}"] < 1e-10
            assert f"full_vs_appendix_printed_{label}" in report.comparisons
        assert report.comparisons["full_vs_appendix_printed_F1"] > 1e-3
        assert report.comparisons["full_vs_appendix_printed_F2"] > report.comparisons["full_vs_appendix_F2"]

    def test_trajectory_agreement(self, report):
        assert report.comparisons["analytic_vs_appendix_F1"] < 1e-6
        assert report.comparisons["analytic_vs_appendix_F2"] < 1e-6
        assert report.comparisons["brute_force_max_deviation"] < 1e-3
        assert report.positivity_violations == 0

    def test_report_file(self, report, validation_dir):
        path = os.path.join(validation_dir, "validate_report.json")
        assert path in report.files
        written = json.loads(open(path, encoding="utf-8").read())
        assert written["scenario"] == "validate"
        assert len(written["checks"]) == len(EXPECTED_CHECKS)
        assert written["parameters"]["random_states"] == 5


class TestValidationExitCode:
    def test_failed_check_raises(self, tmp_path, monkeypatch):
        def failing(self, report, rates):
            report.checks.append(CheckResult(name="rk4_order_ratio", passed=False, value=3.0, expected=16.0))

        monkeypatch.setattr(ValidationService, "check_integrator_order", failing)
        monkeypatch.setattr(ValidationService, "check_monotonicity", lambda self, report, rates: None)
        monkeypatch.setattr(ValidationService, "check_turning_point", lambda self, report, rates: None)
        monkeypatch.setattr(ValidationService, "check_oracles", lambda self, report, count: None)
        report = ValidationService().run(output=str(tmp_path), random_states=1, t_max=0.5)
        assert report.exit_code == 3
        assert "FAIL" in report.table()
        with pytest.raises(OracleDiscrepancy, match="rk4_order_ratio"):
            report.raise_for_discrepancies()

    def test_cli_maps_failed_check_to_exit_code(self, tmp_path, monkeypatch, capsys):
        def failing_run(output=None, random_states=50, t_max=10.0):
            result = RunReport(scenario="validate", parameters={})
            result.checks.append(CheckResult(name="f2_turning_point", passed=False, value=0.9, expected=0.77))
            return result

        monkeypatch.setattr("services.validation_service.validation_service.run", failing_run)
        assert discord_lab.main(["validate", "--output", str(tmp_path)]) == 3
        captured = capsys.readouterr()
        assert "FAIL" in captured.out
        assert "f2_turning_point" in captured.err
