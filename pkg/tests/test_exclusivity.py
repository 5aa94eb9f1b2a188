"""Tests for event exclusivity and the exclusivity sum."""
import itertools
import pytest
import sys
import os

sys.path.insert(0, os.path.dirname(os.path.dirname(__file__)))

from bosonctx import schemas
from bosonctx.errors import ScenarioValidationError
from bosonctx.hv_models import (
    Behavior,
    DeterministicAssignment,
    MeasurementContext,
    all_deterministic_assignments,
    deterministic_behavior,
    lambda_exact_behavior,
)
from bosonctx.inequalities import (
    CycleScenario,
    Event,
    are_exclusive,
    exclusivity_sum,
    no_disturbance_check,
    reflection_events,
)

pytestmark = pytest.mark.exclusivity


class TestAreExclusive:
    """Test the exclusivity relation between events."""

    def test_shared_boson_disagrees(self):
        """Test that A2 = -1 in one event and A2 = +1 in the other are exclusive."""
        first = Event(MeasurementContext(1, 2), (1, -1))
        second = Event(MeasurementContext(2, 3), (1, -1))
        assert are_exclusive(first, second)

    def test_shared_boson_agrees(self):
        """Test that agreeing on the shared observable is not exclusive."""
        first = Event(MeasurementContext(1, 2), (1, -1))
        second = Event(MeasurementContext(2, 3), (-1, 1))
        assert not are_exclusive(first, second)

    def test_disjoint_contexts(self):
        """Test that events sharing no observable are never exclusive."""
        assert not are_exclusive(Event(MeasurementContext(1, 2), (1, 1)), Event(MeasurementContext(3, 4), (1, 1)))

    def test_symmetric(self, generator):
        """Test that exclusivity is symmetric."""
        for _ in range(50):
            first = generator.generate_event((1, 2))
            second = generator.generate_event((2, 3))
            assert are_exclusive(first, second) == are_exclusive(second, first)

    def test_reversed_context_same_event(self):
        """Test that an event and its reversed spelling are not exclusive."""
        assert not are_exclusive(Event(MeasurementContext(1, 2), (1, -1)), Event(MeasurementContext(2, 1), (-1, 1)))


class TestReflectionEvents:
    """Test the triangle of reflection events under the λ-model."""

    def test_pairwise_exclusive(self):
        """Test that consecutive reflection events disagree on their shared boson."""
        events = reflection_events(CycleScenario.of_length(3))
        assert all(are_exclusive(a, b) for a, b in itertools.combinations(events, 2))

    def test_lambda_sum_three_halves(self):
        """Test that the λ-model gives 3/2 and breaks the exclusivity bound."""
        scenario = CycleScenario.of_length(3)
        result = exclusivity_sum(lambda_exact_behavior(scenario), reflection_events(scenario))
        assert result.total == pytest.approx(1.5)
        assert result.pairwise_exclusive
        assert not result.satisfies_e
        assert result.to_json() == {"sum": 1.5, "pairwise_exclusive": True, "satisfies_E": False}

    def test_lambda_model_is_no_disturbance(self):
        """Test that the same Behavior passes the no-disturbance check."""
        assert no_disturbance_check(lambda_exact_behavior(CycleScenario.of_length(3))).passed

    def test_deterministic_models_respect_bound(self):
        """Test that every deterministic Behavior keeps pairwise exclusive events at or below 1."""
        scenario = CycleScenario.of_length(3)
        events = reflection_events(scenario)
        for assignment in all_deterministic_assignments(3):
            result = exclusivity_sum(deterministic_behavior(assignment, scenario), events)
            assert result.satisfies_e, f"{assignment.values} sums to {result.total}"


class TestExclusivitySum:
    """Test exclusivity sums on explicit Behaviors."""

    def test_one_context_outcomes_sum_to_one(self):
        """Test that all four outcomes of one context sum to 1 and are pairwise exclusive."""
        behavior = Behavior({(1, 2): [0.1, 0.2, 0.3, 0.4]})
        events = [Event(MeasurementContext(1, 2), v) for v in ((1, 1), (1, -1), (-1, 1), (-1, -1))]
        result = exclusivity_sum(behavior, events)
        assert result.total == pytest.approx(1.0)
        assert result.pairwise_exclusive and result.satisfies_e

    def test_not_pairwise_exclusive_reported(self):
        """Test that non-exclusive events are flagged."""
        behavior = deterministic_behavior(DeterministicAssignment((1, 1, 1)), CycleScenario.of_length(3))
        events = [Event(MeasurementContext(1, 2), (1, 1)), Event(MeasurementContext(2, 3), (1, 1))]
        result = exclusivity_sum(behavior, events)
        assert result.total == 2.0
        assert not result.pairwise_exclusive

    def test_event_json(self):
        """Test the event JSON layout and its schema."""
        event = Event.from_json({"context": [2, 3], "values": {"2": 1, "3": -1}})
        assert event.values == (1, -1)
        assert event.to_json() == {"context": [2, 3], "values": {"2": 1, "3": -1}}
        schemas.validate(event.to_json(), "event")
        assert str(event) == "A2=+1,A3=-1"

    @pytest.mark.error
    def test_event_values_must_match_context(self):
        """Test that event values must name exactly the context's observables."""
        with pytest.raises(ScenarioValidationError):
            Event.from_json({"context": [2, 3], "values": {"1": 1, "3": -1}})

    @pytest.mark.error
    def test_event_values_must_be_signs(self):
        """Test that events hold +1 or -1 only."""
        with pytest.raises(ScenarioValidationError):
            Event(MeasurementContext(1, 2), (1, 0))
