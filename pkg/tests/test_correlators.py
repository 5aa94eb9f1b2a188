"""Tests for correlators, cycle values and inequality expressions."""
import pytest
import sys
import os

sys.path.insert(0, os.path.dirname(os.path.dirname(__file__)))

from bosonctx.errors import ContextError, ResourceLimitError, ScenarioValidationError
from bosonctx.hv_models import Behavior, DeterministicAssignment, deterministic_behavior, lambda_exact_behavior
from bosonctx.inequalities import MAX_CYCLE_LENGTH, CycleScenario, InequalityExpr, correlator, cycle_value

pytestmark = pytest.mark.bounds


class TestCorrelator:
    """Test <A_i A_j> = p(++) + p(--) - p(+-) - p(-+)."""

    def test_mixed_table(self):
        """Test a table with every outcome populated."""
        behavior = Behavior({(1, 2): [0.4, 0.1, 0.2, 0.3]})
        assert correlator(behavior, (1, 2)) == pytest.approx(0.4)

    def test_reversed_context_same_value(self):
        """Test that the correlator is symmetric in the pair."""
        behavior = Behavior({(1, 2): [0.4, 0.1, 0.2, 0.3]})
        assert correlator(behavior, (2, 1)) == pytest.approx(correlator(behavior, (1, 2)))

    def test_anticorrelated(self):
        """Test that the λ-model gives -1 on every context."""
        behavior = lambda_exact_behavior(CycleScenario.of_length(5))
        assert all(correlator(behavior, c) == -1.0 for c in behavior.contexts)

    @pytest.mark.error
    def test_missing_context(self):
        """Test that a context without a table raises ContextError."""
        with pytest.raises(ContextError):
            correlator(Behavior({(1, 2): [1, 0, 0, 0]}), (2, 3))

    @pytest.mark.error
    @pytest.mark.parametrize("table", [[0.5, 0.5, 0.5, 0.0], [1.2, -0.2, 0, 0], [1, 0, 0]])
    def test_invalid_tables(self, table):
        """Test that tables must be four non-negative entries summing to 1."""
        with pytest.raises(ScenarioValidationError):
            Behavior({(1, 2): table})


class TestCycleValue:
    """Test the sum of correlators along a cycle."""

    def test_kcbs_lambda_value(self):
        """Test that the λ-model gives -5 on the 5-cycle."""
        scenario = CycleScenario.of_length(5)
        assert cycle_value(lambda_exact_behavior(scenario), scenario) == -5.0

    def test_specker_lambda_value(self):
        """Test that the λ-model gives -3 on the triangle."""
        scenario = CycleScenario.of_length(3)
        assert cycle_value(lambda_exact_behavior(scenario), scenario) == -3.0

    def test_alternating_assignment(self):
        """Test that +-+-+ on the 5-cycle keeps one correlated edge: -3."""
        scenario = CycleScenario.of_length(5)
        behavior = deterministic_behavior(DeterministicAssignment((1, -1, 1, -1, 1)), scenario)
        assert cycle_value(behavior, scenario) == -3.0

    def test_cycle_contexts(self):
        """Test that context k pairs k with k+1 and wraps around."""
        assert [str(c) for c in CycleScenario.of_length(4).contexts] == ["(1,2)", "(2,3)", "(3,4)", "(4,1)"]

    @pytest.mark.error
    def test_short_cycle(self):
        """Test that cycles need three observables."""
        with pytest.raises(ScenarioValidationError):
            CycleScenario.of_length(2)

    @pytest.mark.error
    @pytest.mark.parametrize("n", [MAX_CYCLE_LENGTH + 1, 10 ** 8])
    def test_cycle_cap(self, n):
        """Test that cycles past the cap raise ResourceLimitError before any context is built."""
        with pytest.raises(ResourceLimitError):
            CycleScenario.of_length(n)

    def test_longest_cycle_allowed(self):
        """Test that a cycle at the cap is still built."""
        assert len(CycleScenario.of_length(MAX_CYCLE_LENGTH).contexts) == MAX_CYCLE_LENGTH


class TestInequalityExpr:
    """Test weighted correlator expressions."""

    def test_weighted_sum_with_offset(self):
        """Test offset + sum of coefficient * correlator."""
        scenario = CycleScenario.of_length(3)
        expr = InequalityExpr.from_json({
            "terms": [{"context": [1, 2], "coefficient": 2}, {"context": [3, 1], "coefficient": -1}],
            "offset": 0.5,
        })
        behavior = lambda_exact_behavior(scenario)
        assert expr.evaluate(behavior) == pytest.approx(0.5 - 2 + 1)

    def test_json_layout(self):
        """Test the serialized form of the cycle sum."""
        expr = InequalityExpr.cycle_sum(CycleScenario.of_length(3))
        assert expr.to_json()["terms"][2] == {"context": [3, 1], "coefficient": 1.0}
        assert expr.to_json()["offset"] == 0.0

    @pytest.mark.error
    def test_term_outside_scenario(self):
        """Test that terms must name contexts of the scenario."""
        expr = InequalityExpr((((1, 4), 1.0),))
        with pytest.raises(ContextError):
            expr.validate_against(CycleScenario.of_length(3))
