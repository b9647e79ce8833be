"""
End-to-end tests of the ``spectriple`` command line through ``run``.
"""

import json
import math
import os

import pandas as pd
import pytest

from spectriple.cli.report import EXIT_BAD_INPUT, EXIT_CHECK_FAILED, EXIT_OK
from spectriple.cli.workbench import run
from spectriple.core.catalog import two_point_triple
from spectriple.parsers.triple_json import bundled_triples, dump_triple, file_digest
from tests.fixtures.triples import trivial_algebra_doc


class TestTripleCommands:
    """Commands that read a triple document."""

    def test_verify_bundled_two_point_space(self):
        code, report = run(["verify", "fx_ko6.json"])
        assert code == EXIT_OK
        assert report.payload["ko_dimension"] == 6
        assert report.payload["real_structure_pattern"] == "off_diagonal"
        assert report.input_digest == file_digest(bundled_triples()["fx_ko6.json"])

    def test_verify_reports_first_failure(self, write_document):
        path = write_document(dump_triple(two_point_triple(t=1.0, ko=6)))
        code, report = run(["verify", path])
        assert code == EXIT_CHECK_FAILED
        assert report.first_failure == "order_one"

    def test_solve_dirac_electrodynamics(self):
        code, report = run(["solve-dirac", "fed.json"])
        assert code == EXIT_OK
        assert report.payload["dimension"] == 2
        pattern = next(c for c in report.checks if c["name"] == "electrodynamics_pattern")
        assert pattern["residual"] < 1e-9

    def test_solve_dirac_trivial_algebra(self, write_document):
        code, report = run(["solve-dirac", write_document(trivial_algebra_doc)])
        assert code == EXIT_OK
        assert report.payload["dimension"] == 1

    def test_gauge_group(self):
        code, report = run(["gauge-group", "fed.json"])
        assert code == EXIT_OK
        assert report.payload["dim_gauge"] == 1
        assert report.payload["exact"]

    def test_distance(self):
        code, report = run(["distance", "fx_t.json", "--from", "0", "--to", "1"])
        assert code == EXIT_OK
        assert report.payload["value"] == pytest.approx(0.5, abs=1e-6)

    def test_unbounded_distance(self):
        code, report = run(["distance", "fed.json", "--from", "0", "--to", "1"])
        assert code == EXIT_OK
        assert report.to_dict()["payload"]["value"] == "UNBOUNDED"


class TestMalformedInput:
    """Exit code 2 for anything that is not a well-formed request."""

    def test_missing_file(self):
        code, report = run(["verify", "no_such_triple.json"])
        assert code == EXIT_BAD_INPUT
        assert report.error.startswith("TripleFormatError")

    def test_broken_json(self, write_document):
        code, _ = run(["verify", write_document("{", name="broken.json")])
        assert code == EXIT_BAD_INPUT

    def test_missing_distance_endpoint(self):
        code, _ = run(["distance", "fx_t.json", "--to", "1"])
        assert code == EXIT_BAD_INPUT

    def test_unknown_command(self):
        code, report = run(["frobnicate"])
        assert code == EXIT_BAD_INPUT
        assert report.exit_code == EXIT_BAD_INPUT

    def test_single_mode_with_gauge_mode(self):
        code, _ = run(["fermionic-check", "--modes", "1", "--gauge", "mode"])
        assert code == EXIT_BAD_INPUT


class TestCertificationCommands:
    """Spectral action, heat trace and fermionic action."""

    def test_check_lagrangian(self, test_output_dir):
        path = os.path.join(test_output_dir, "lagrangian.json")
        code, report = run(["check-lagrangian", "--trials", "5", "--seed", "3", "--json", path])
        assert code == EXIT_OK
        saved = json.loads(open(path).read())
        assert saved["schema_version"] == 1
        assert saved["exit_code"] == EXIT_OK
        assert saved["payload"]["trials"] == 5

        _, again = run(["check-lagrangian", "--trials", "5", "--seed", "3"])
        assert again.to_dict()["payload"] == report.to_dict()["payload"]

    def test_heat_trace_csv(self, test_output_dir):
        path = os.path.join(test_output_dir, "heat.csv")
        code, report = run(["heat-trace", "--mass", "1", "--csv", path])
        assert code == EXIT_OK
        assert report.payload["expected_a2"] == pytest.approx(-1 / math.pi**2)
        frame = pd.read_csv(path)
        assert list(frame.columns) == ["t", "trace", "a0", "a2"]
        assert len(frame) == 11

    def test_heat_trace_truncation(self):
        code, report = run(["heat-trace", "--cut", "2"])
        assert code == EXIT_CHECK_FAILED
        assert report.payload["required_mode_cut"] > 2

    def test_fermionic_single_configuration(self):
        code, report = run(["fermionic-check", "--modes", "3", "--mass", "1", "--gauge", "constant"])
        assert code == EXIT_OK
        assert len(report.rows) == 1
        assert report.payload["summary"]["max_deviation"] < 1e-10

    @pytest.mark.slow
    def test_fermionic_full_grid(self, test_output_dir):
        path = os.path.join(test_output_dir, "fermionic.csv")
        code, report = run(["fermionic-check", "--n_jobs", "4", "--csv", path])
        assert code == EXIT_OK
        assert len(pd.read_csv(path)) == 31

    def test_bundled(self):
        code, report = run(["bundled"])
        assert code == EXIT_OK
        assert report.payload["triples"] == ["fed.json", "fx_ko6.json", "fx_t.json"]


class TestReproducibility:
    """A rerun with the same seed writes the same report, byte for byte."""

    @pytest.mark.parametrize(
        "argv",
        [
            ["--seed", "11", "distance", "fx_t.json", "--from", "0", "--to", "1"],
            ["--seed", "11", "check-lagrangian", "--trials", "4"],
            ["heat-trace", "--mass", "1"],
            ["--seed", "11", "fermionic-check", "--modes", "3", "--gauge", "mode"],
        ],
    )
    def test_rerun_is_identical(self, argv):
        code, first = run(argv)
        again_code, again = run(argv)
        assert code == again_code == EXIT_OK
        assert first.to_json() == again.to_json()


class TestFailedChecks:
    """Exit code 1 when a certification check fails."""

    def test_lagrangian_without_trials(self):
        code, report = run(["check-lagrangian", "--trials", "0"])
        assert code == EXIT_CHECK_FAILED
        assert report.first_failure == "max_error"

    def test_heat_trace_fit_far_from_small_t(self):
        """With m = 10 the default t window is far outside the small-t regime."""
        code, report = run(["heat-trace", "--mass", "10"])
        assert code == EXIT_CHECK_FAILED
        assert report.first_failure == "a0_density"

    def test_fermionic_check_over_tolerance(self, monkeypatch):
        monkeypatch.setattr("spectriple.cli.workbench.DECOMPOSITION_TOL", 0.0)
        code, report = run(["fermionic-check", "--modes", "1", "--mass", "1"])
        assert code == EXIT_CHECK_FAILED
        assert report.first_failure == "max_deviation"


class TestDistanceRestarts:
    """The restart spread is compared with the agreement tolerance."""

    def test_restart_check_reports_spread(self):
        code, report = run(["distance", "fx_t.json", "--from", "0", "--to", "1"])
        check = next(c for c in report.checks if c["name"] == "restarts_agree")
        assert code == EXIT_OK
        assert check["passed"]
        values = report.payload["restart_values"]
        assert check["residual"] == pytest.approx(max(values) - min(values))

    def test_same_point_has_no_restarts(self):
        code, report = run(["distance", "fx_t.json", "--from", "1", "--to", "1"])
        assert code == EXIT_OK
        assert report.payload["value"] == 0.0
        assert report.checks[0]["residual"] == 0.0
