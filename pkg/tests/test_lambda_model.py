"""Tests for the λ-ordering hidden-variable model."""
import itertools
import pytest
import sys
import os

from hypothesis import assume, given, strategies as st

sys.path.insert(0, os.path.dirname(os.path.dirname(__file__)))

from bosonctx.errors import ContextError, CoverageError, LambdaTieError, ScenarioValidationError, UnsupportedLawError
from bosonctx.hv_models import (
    HiddenLambdaState,
    LambdaLaw,
    MeasurementContext,
    Scenario,
    context_dependence_witness,
    lambda_exact_behavior,
    lambda_model_outcome,
)
from bosonctx import schemas
from bosonctx.inequalities import CycleScenario, no_disturbance_check

pytestmark = pytest.mark.hidden_variable

open_unit = st.floats(min_value=0.0, max_value=1.0, exclude_min=True, exclude_max=True)


class TestLambdaOutcome:
    """Test the outcome rule: larger λ is reflected."""

    def test_larger_lambda_reflected(self):
        """Test λ = (0.7, 0.2) on (1,2) gives (+1, -1)."""
        state = HiddenLambdaState((0.7, 0.2))
        assert lambda_model_outcome(state, MeasurementContext(1, 2)) == (1, -1)

    def test_context_order_follows_argument(self):
        """Test that the returned pair follows the context's order."""
        state = HiddenLambdaState((0.7, 0.2))
        assert lambda_model_outcome(state, (2, 1)) == (-1, 1)

    @given(open_unit, open_unit)
    def test_always_anticorrelated(self, first, second):
        """Test that the two outcomes always have opposite signs."""
        assume(first != second)
        values = lambda_model_outcome(HiddenLambdaState((first, second)), (1, 2))
        assert values[0] == -values[1]
        assert values[0] == (1 if first > second else -1)

    @given(open_unit)
    def test_tie_rejected(self, value):
        """Test that equal λ values never produce an outcome."""
        with pytest.raises(LambdaTieError):
            HiddenLambdaState((value, value))

    @pytest.mark.error
    @pytest.mark.parametrize("values", [(0.0, 0.5), (0.5, 1.0), (-0.1, 0.5), (0.5, 1.5)])
    def test_outside_open_interval(self, values):
        """Test that λ must lie strictly inside (0, 1)."""
        with pytest.raises(ScenarioValidationError):
            HiddenLambdaState(values)

    @pytest.mark.error
    def test_context_past_state(self):
        """Test that a context naming an observable without λ raises CoverageError."""
        with pytest.raises(CoverageError):
            lambda_model_outcome(HiddenLambdaState((0.1, 0.2)), (2, 3))

    @pytest.mark.error
    @pytest.mark.parametrize("observables", [[1], [1, 2, 3], [2, 2]])
    def test_non_pair_context(self, observables):
        """Test that contexts must be two distinct observables."""
        with pytest.raises(ContextError):
            MeasurementContext.from_sequence(observables)


class TestContextDependence:
    """Test context_dependence_witness on three bosons."""

    def test_middle_boson_witness(self):
        """Test λ = (0.2, 0.5, 0.9): A2 is -1 beside A3 and +1 beside A1."""
        witness = context_dependence_witness(HiddenLambdaState((0.2, 0.5, 0.9)), 2, (2, 3), (1, 2))
        assert witness is not None
        assert (witness.value_a, witness.value_b) == (-1, 1)
        assert witness.to_json() == {"observable": 2, "contexts": [[2, 3], [1, 2]], "values": [-1, 1]}

    @pytest.mark.parametrize("ordering", list(itertools.permutations((0.2, 0.5, 0.9))))
    def test_witness_iff_middle_value(self, ordering):
        """Test that A2 is context dependent exactly when λ2 is the middle value."""
        witness = context_dependence_witness(HiddenLambdaState(ordering), 2, (2, 3), (1, 2))
        assert (witness is not None) == (sorted(ordering)[1] == ordering[1])

    @given(st.lists(open_unit, min_size=3, max_size=3, unique=True))
    def test_extreme_values_never_witness(self, values):
        """Test that the largest and smallest λ get the same value everywhere."""
        state = HiddenLambdaState(tuple(values))
        for observable in (values.index(min(values)) + 1, values.index(max(values)) + 1):
            others = [o for o in (1, 2, 3) if o != observable]
            contexts = [(observable, other) for other in others]
            assert context_dependence_witness(state, observable, *contexts) is None

    @pytest.mark.error
    def test_observable_outside_context(self):
        """Test that the observable must belong to both contexts."""
        with pytest.raises(ContextError):
            context_dependence_witness(HiddenLambdaState((0.2, 0.5, 0.9)), 2, (1, 3), (1, 2))


class TestExactBehavior:
    """Test the exact λ-model Behavior."""

    @pytest.mark.parametrize("n", [3, 4, 5, 7])
    def test_uniform_anticorrelated_tables(self, n, assertions):
        """Test that every context has p(+-) = p(-+) = 1/2."""
        behavior = lambda_exact_behavior(CycleScenario.of_length(n))
        assertions.assert_anticorrelated(behavior)
        for context in behavior.contexts:
            assert behavior.probability(context, (1, -1)) == 0.5

    def test_no_disturbance_exact(self):
        """Test that all marginals are exactly 1/2."""
        report = no_disturbance_check(lambda_exact_behavior(CycleScenario.of_length(5)), 1e-12)
        assert report.passed
        assert report.max_gap == 0.0

    def test_beta_law_same_tables(self):
        """Test that any exchangeable law gives the same exact Behavior."""
        uniform = lambda_exact_behavior(CycleScenario.of_length(3))
        beta = lambda_exact_behavior(CycleScenario.of_length(3), LambdaLaw.beta(2.0, 5.0))
        assert beta.to_json() == uniform.to_json()

    def test_accepts_context_list(self):
        """Test that a bare list of contexts works as a scenario."""
        behavior = lambda_exact_behavior([(1, 2), (2, 3)])
        assert [str(c) for c in behavior.contexts] == ["(1,2)", "(2,3)"]

    def test_json_revalidates(self):
        """Test that the exact Behavior passes the behavior schema."""
        schemas.validate(lambda_exact_behavior(CycleScenario.of_length(5)).to_json(), "behavior")

    @pytest.mark.error
    def test_ordered_law_rejected(self):
        """Test that the non-exchangeable law has no exact treatment."""
        with pytest.raises(UnsupportedLawError):
            lambda_exact_behavior(CycleScenario.of_length(3), LambdaLaw.ordered())

    @pytest.mark.error
    def test_unknown_law(self):
        """Test that an unknown law name raises UnsupportedLawError."""
        with pytest.raises(UnsupportedLawError):
            LambdaLaw("cauchy")

    @pytest.mark.error
    def test_duplicate_context(self):
        """Test that a scenario may not list a pair twice."""
        with pytest.raises(ContextError):
            Scenario(3, ((1, 2), (2, 1)))
