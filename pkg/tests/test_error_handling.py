"""Tests for error classification, exit statuses and malformed scenario files."""
import pytest
import sys
import os

sys.path.insert(0, os.path.dirname(os.path.dirname(__file__)))

from bosonctx import errors, schemas
from bosonctx.errors import (
    BosonCtxError,
    InternalConsistencyError,
    ResourceLimitError,
    ScenarioParseError,
    ScenarioValidationError,
    ShapeError,
)
from bosonctx.fock_quantum import complex_array

pytestmark = pytest.mark.error


class TestExceptionHierarchy:
    """Test the exit code carried by each error class."""

    @pytest.mark.parametrize("error_class, exit_code", [
        (ScenarioParseError, 2),
        (ScenarioValidationError, 3),
        (ResourceLimitError, 4),
        (InternalConsistencyError, 5),
    ])
    def test_exit_codes(self, error_class, exit_code):
        """Test the documented exit status per error class."""
        assert error_class.exit_code == exit_code
        assert issubclass(error_class, BosonCtxError)

    @pytest.mark.parametrize("name", [
        "ShapeError", "NotUnitaryError", "ConservationError", "LambdaTieError",
        "ContextError", "CoverageError", "ProjectorError", "UnsupportedLawError",
    ])
    def test_domain_errors_are_validation_errors(self, name):
        """Test that domain invariant failures exit with status 3."""
        error_class = getattr(errors, name)
        assert issubclass(error_class, ScenarioValidationError)
        assert error_class.exit_code == 3


class TestMalformedFiles:
    """Test files that never reach an engine."""

    def test_invalid_json_syntax(self, runner, scenario_file, tmp_path):
        """Test that malformed JSON exits with status 2 and writes nothing."""
        out = tmp_path / "report.json"
        assert runner.run(scenario_file("{invalid json syntax"), out) == 2
        assert not out.exists()

    def test_empty_file(self, runner, scenario_file, tmp_path):
        """Test that an empty file is a parse error."""
        assert runner.run(scenario_file(""), tmp_path / "report.json") == 2

    def test_missing_file(self, runner, tmp_path):
        """Test that an unreadable path is a parse error."""
        assert runner.run(tmp_path / "absent.json", tmp_path / "report.json") == 2

    def test_load_raises_parse_error(self, runner, scenario_file):
        """Test the exception behind status 2."""
        with pytest.raises(ScenarioParseError):
            runner.load(scenario_file("[1, 2,"))

    def test_top_level_array(self, runner, scenario_file, tmp_path):
        """Test that valid JSON of the wrong type is a validation error."""
        assert runner.run(scenario_file("[]"), tmp_path / "report.json") == 3


class TestInvalidScenarios:
    """Test generated invalid scenarios end to end."""

    @pytest.mark.parametrize("issue, exit_code", [
        ("missing_kind", 3),
        ("unknown_kind", 3),
        ("empty_contexts", 3),
        ("non_pair_context", 3),
        ("not_unitary", 3),
        ("ragged_matrix", 3),
        ("lambda_tie", 3),
        ("unknown_law", 3),
        ("exact_ordered_law", 3),
        ("photon_cap", 4),
        ("huge_cycle", 4),
    ])
    def test_exit_status(self, issue, exit_code, runner, generator, scenario_file, tmp_path):
        """Test the exit status of each invalid scenario and that no report is written."""
        out = tmp_path / "report.json"
        assert runner.run(scenario_file(generator.generate_invalid_scenario(issue)), out) == exit_code
        assert not out.exists()

    @pytest.mark.parametrize("issue", ["missing_kind", "unknown_kind", "empty_contexts", "non_pair_context",
                                       "unknown_law"])
    def test_schema_rejects(self, issue, generator):
        """Test that schema violations are caught before any computation."""
        with pytest.raises(ScenarioValidationError):
            schemas.validate(generator.generate_invalid_scenario(issue))

    def test_errors_are_logged(self, runner, generator, scenario_file, tmp_path, caplog):
        """Test that the error class and message reach the log."""
        path = scenario_file(generator.generate_invalid_scenario("lambda_tie"))
        with caplog.at_level("ERROR", logger="bosonctx.runner"):
            runner.run(path, tmp_path / "report.json")
        assert any("LambdaTieError" in record.getMessage() for record in caplog.records)

    def test_unknown_expectation(self, runner, scenario_file, tmp_path):
        """Test that expecting a quantity the scenario never computes is rejected."""
        path = scenario_file({"kind": "bounds", "cycle": 3, "expect": {"quantum_min": {"value": -2.0}}})
        assert runner.run(path, tmp_path / "report.json") == 3

    def test_witness_without_lambdas(self, runner, scenario_file, tmp_path):
        """Test that witnesses need a fixed λ-state."""
        path = scenario_file({
            "kind": "hidden-variable",
            "scenario": {"observables": 3, "contexts": [[1, 2], [2, 3]]},
            "witnesses": [{"observable": 2, "contexts": [[2, 3], [1, 2]]}],
        })
        assert runner.run(path, tmp_path / "report.json") == 3

    def test_events_without_behavior(self, runner, scenario_file, tmp_path):
        """Test that events need a Behavior to be evaluated on."""
        path = scenario_file({"kind": "bounds", "cycle": 3, "events": "reflection"})
        assert runner.run(path, tmp_path / "report.json") == 3

    def test_enumeration_cap(self, runner, scenario_file, tmp_path):
        """Test that a 30-cycle exceeds the classical enumeration cap."""
        path = scenario_file({"kind": "bounds", "cycle": 30})
        assert runner.run(path, tmp_path / "report.json") == 4

    def test_unexpected_error_propagates(self, runner, scenario_file, tmp_path, monkeypatch):
        """Test that an internal consistency failure exits with status 5."""
        def broken(*args, **kwargs):
            raise InternalConsistencyError("bounds out of order")

        monkeypatch.setattr("bosonctx.inequalities.BoundsReport.from_extrema", broken)
        assert runner.run(scenario_file({"kind": "bounds", "cycle": 3}), tmp_path / "report.json") == 5

    def test_huge_cycle_rejected_before_construction(self, runner, scenario_file, tmp_path, caplog):
        """Test that a 10^8-cycle is refused by the cycle cap, not by running out of memory."""
        path = scenario_file({"kind": "bounds", "cycle": 10**8})
        with caplog.at_level("ERROR", logger="bosonctx.runner"):
            assert runner.run(path, tmp_path / "report.json") == 4
        assert any("ResourceLimitError" in record.getMessage() for record in caplog.records)


class TestRaggedPayloads:
    """Test complex matrices whose rows differ in length."""

    def test_ragged_interferometer(self, runner, scenario_file, tmp_path, caplog):
        """Test that a ragged interferometer exits with status 3 as a ShapeError."""
        out = tmp_path / "report.json"
        path = scenario_file({"kind": "quantum", "interferometer": {"dim": 2, "re": [[1, 0], [0]]},
                              "inputs": [[1, 0]]})
        with caplog.at_level("ERROR", logger="bosonctx.runner"):
            assert runner.run(path, out) == 3
        assert not out.exists()
        assert any("ShapeError" in record.getMessage() for record in caplog.records)

    def test_ragged_imaginary_part(self, runner, scenario_file, tmp_path):
        """Test that a ragged imaginary part is rejected like a ragged real part."""
        path = scenario_file({"kind": "quantum",
                              "interferometer": {"dim": 2, "re": [[1, 0], [0, 1]], "im": [[0, 0], [0]]},
                              "inputs": [[1, 0]]})
        assert runner.run(path, tmp_path / "report.json") == 3

    def test_ragged_permanent(self, runner, scenario_file, tmp_path):
        """Test that a ragged permanent matrix exits with status 3."""
        path = scenario_file({"kind": "quantum", "interferometer": {"preset": "identity", "dim": 2},
                              "permanents": [{"re": [[1, 2, 3], [4, 5]]}]})
        assert runner.run(path, tmp_path / "report.json") == 3

    def test_ragged_projector(self, runner, scenario_file, tmp_path):
        """Test that a ragged projector exits with status 3."""
        path = scenario_file({
            "kind": "quantum",
            "interferometer": {"preset": "identity", "dim": 2},
            "projectors": {"state": {"re": [1, 0]}, "projectors": [{"re": [[1, 0], [0]]}]},
        })
        assert runner.run(path, tmp_path / "report.json") == 3

    def test_state_parts_of_different_length(self, runner, scenario_file, tmp_path):
        """Test that a state whose real and imaginary parts differ in length exits with status 3."""
        path = scenario_file({
            "kind": "quantum",
            "interferometer": {"preset": "identity", "dim": 2},
            "projectors": {"state": {"re": [1, 0], "im": [0]}, "projectors": [{"re": [[1, 0], [0, 0]]}]},
        })
        assert runner.run(path, tmp_path / "report.json") == 3

    def test_decoder_raises_shape_error(self):
        """Test the exception raised for a ragged payload."""
        with pytest.raises(ShapeError):
            complex_array({"re": [[1, 0], [0]]})
