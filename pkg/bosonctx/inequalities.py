"""Contextuality inequalities, their bounds, and exclusivity checks.

Inequalities are raw sums of correlators <A_i A_j> plus an offset. Three
bounds are computed for each expression:

* classical: extrema over deterministic noncontextual assignments (2^n enumeration)
* no-disturbance: extrema over the no-disturbance polytope (linear program)
* arithmetic: every term pushed to its own extreme independently

The triangle correlator sum with classical minimum -1 is used as the
Specker inequality; the 5-cycle sum with classical minimum -3 is KCBS.
"""
import logging
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linprog

from bosonctx.errors import (
    ContextError,
    InternalConsistencyError,
    ProjectorError,
    ResourceLimitError,
    ScenarioValidationError,
    ShapeError,
)
from bosonctx.hv_models import (
    Behavior,
    ContextLike,
    DeterministicAssignment,
    MeasurementContext,
    Scenario,
    as_context,
)

logger = logging.getLogger(__name__)

PROBABILITY_TOL = 1e-10
LP_TOL = 1e-7
LP_FEASIBILITY_TOL = 1e-9
MAX_CLASSICAL_OBSERVABLES = 24
MAX_VERTEX_OBSERVABLES = 16
MAX_LP_VARIABLES = 1000
MAX_CYCLE_LENGTH = MAX_LP_VARIABLES // 4
ENUMERATION_BLOCK = 1 << 16

# Reference value only: the quantum minimum of the KCBS sum needs a state and
# measurement optimisation that this package does not perform.
KCBS_QUANTUM_MINIMUM = 5.0 - 4.0 * math.sqrt(5.0)

_CORRELATOR_SIGNS = np.array([1.0, -1.0, -1.0, 1.0])


@dataclass(frozen=True)
class CycleScenario(Scenario):
    """n observables on a ring; context k pairs observable k with k+1 (mod n)."""

    def __post_init__(self):
        super().__post_init__()
        expected = _cycle_contexts(self.observables)
        if self.contexts != expected:
            raise ContextError(f"Contexts of a {self.observables}-cycle must be {[str(c) for c in expected]}")

    @classmethod
    def of_length(cls, n: int) -> "CycleScenario":
        """Build the n-cycle; n = 5 is KCBS, n = 3 the Specker triangle (cycle sum, classical minimum -1)."""
        if isinstance(n, bool) or not isinstance(n, int) or n < 3:
            raise ScenarioValidationError(f"A cycle needs at least 3 observables, got {n!r}")
        if n > MAX_CYCLE_LENGTH:
            raise ResourceLimitError(f"A {n}-cycle exceeds the cap of {MAX_CYCLE_LENGTH} observables")
        return cls(n, _cycle_contexts(n))

    @property
    def n(self) -> int:
        return self.observables


def _cycle_contexts(n: int) -> Tuple[MeasurementContext, ...]:
    if n < 3:
        raise ScenarioValidationError(f"A cycle needs at least 3 observables, got {n}")
    return tuple(MeasurementContext(i, i % n + 1) for i in range(1, n + 1))


@dataclass(frozen=True)
class InequalityExpr:
    """Linear combination of correlators plus an offset."""

    terms: Tuple[Tuple[MeasurementContext, float], ...]
    offset: float = 0.0

    def __post_init__(self):
        terms = tuple((as_context(context), float(coefficient)) for context, coefficient in self.terms)
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "offset", float(self.offset))

    @classmethod
    def cycle_sum(cls, scenario: Scenario) -> "InequalityExpr":
        """Sum of the correlators of every context in ``scenario``."""
        return cls(tuple((context, 1.0) for context in scenario.contexts))

    @classmethod
    def from_json(cls, payload: Dict[str, Any]) -> "InequalityExpr":
        terms = tuple((as_context(t["context"]), t.get("coefficient", 1.0)) for t in payload.get("terms", []))
        return cls(terms, payload.get("offset", 0.0))

    def to_json(self) -> Dict[str, Any]:
        return {
            "terms": [{"context": c.to_json(), "coefficient": k} for c, k in self.terms],
            "offset": self.offset,
        }

    def validate_against(self, scenario: Scenario) -> None:
        for context, _ in self.terms:
            _context_index(scenario, context)

    def evaluate(self, behavior: Behavior) -> float:
        return self.offset + math.fsum(k * correlator(behavior, c) for c, k in self.terms)


def _context_index(scenario: Scenario, context: MeasurementContext) -> int:
    for index, candidate in enumerate(scenario.contexts):
        if candidate == context or candidate == context.reversed():
            return index
    raise ContextError(f"Context {context} is not part of the scenario")


def _coefficient_vector(scenario: Scenario, expr: InequalityExpr) -> np.ndarray:
    expr.validate_against(scenario)
    weights = np.zeros(len(scenario.contexts))
    for context, coefficient in expr.terms:
        weights[_context_index(scenario, context)] += coefficient
    return weights


@dataclass(frozen=True)
class Extrema:
    """Minimum and maximum of an expression, with what attains them when known."""

    minimum: float
    maximum: float
    argmin: Optional[Any] = None
    argmax: Optional[Any] = None

    def __iter__(self) -> Iterator[float]:
        return iter((self.minimum, self.maximum))


@dataclass(frozen=True)
class BoundsReport:
    """Classical, no-disturbance and arithmetic extrema of one expression."""

    classical_min: float
    classical_max: float
    nd_min: float
    nd_max: float
    arithmetic_min: float
    arithmetic_max: float
    classical_argmin: Optional[DeterministicAssignment] = None
    classical_argmax: Optional[DeterministicAssignment] = None
    nd_argmin: Optional[Behavior] = None
    nd_argmax: Optional[Behavior] = None

    def __post_init__(self):
        chain = [
            self.arithmetic_min,
            self.nd_min,
            self.classical_min,
            self.classical_max,
            self.nd_max,
            self.arithmetic_max,
        ]
        for lower, upper in zip(chain, chain[1:]):
            if lower > upper + LP_TOL:
                raise InternalConsistencyError(f"Bound ordering violated: {chain}")

    @classmethod
    def from_extrema(cls, classical: Extrema, polytope: Extrema, arithmetic: Extrema) -> "BoundsReport":
        return cls(
            classical_min=classical.minimum,
            classical_max=classical.maximum,
            nd_min=polytope.minimum,
            nd_max=polytope.maximum,
            arithmetic_min=arithmetic.minimum,
            arithmetic_max=arithmetic.maximum,
            classical_argmin=classical.argmin,
            classical_argmax=classical.argmax,
            nd_argmin=polytope.argmin,
            nd_argmax=polytope.argmax,
        )

    def to_json(self) -> Dict[str, Any]:
        return {
            "classical_min": self.classical_min,
            "classical_max": self.classical_max,
            "nd_min": self.nd_min,
            "nd_max": self.nd_max,
            "arithmetic_min": self.arithmetic_min,
            "arithmetic_max": self.arithmetic_max,
            "classical_argmin": list(self.classical_argmin.values) if self.classical_argmin else None,
            "classical_argmax": list(self.classical_argmax.values) if self.classical_argmax else None,
            "nd_argmin": self.nd_argmin.to_json() if self.nd_argmin else None,
            "nd_argmax": self.nd_argmax.to_json() if self.nd_argmax else None,
        }


def correlator(behavior: Behavior, context: ContextLike) -> float:
    """<A_i A_j> = p(++) + p(--) - p(+-) - p(-+)."""
    context = as_context(context)
    return (
        behavior.probability(context, (1, 1))
        + behavior.probability(context, (-1, -1))
        - behavior.probability(context, (1, -1))
        - behavior.probability(context, (-1, 1))
    )


def cycle_value(behavior: Behavior, scenario: Scenario) -> float:
    """Sum of correlators over every edge of ``scenario``."""
    return math.fsum(correlator(behavior, context) for context in scenario.contexts)


def _assignment_block(start: int, stop: int, observables: int) -> np.ndarray:
    # Same ordering as hv_models.all_deterministic_assignments.
    indices = np.arange(start, stop, dtype=np.int64)
    bits = (indices[:, None] >> np.arange(observables, dtype=np.int64)) & 1
    return 1 - 2 * bits


def _vertex_blocks(scenario: Scenario) -> Iterator[Tuple[int, np.ndarray, np.ndarray]]:
    n = scenario.observables
    first = np.array([c.first - 1 for c in scenario.contexts])
    second = np.array([c.second - 1 for c in scenario.contexts])
    for start in range(0, 1 << n, ENUMERATION_BLOCK):
        values = _assignment_block(start, min(start + ENUMERATION_BLOCK, 1 << n), n)
        yield start, values, values[:, first] * values[:, second]


def noncontextual_vertices(scenario: Scenario) -> np.ndarray:
    """Correlator vector of every deterministic assignment, in enumeration order."""
    if scenario.observables > MAX_VERTEX_OBSERVABLES:
        raise ResourceLimitError(
            f"{scenario.observables} observables exceed the vertex cap of {MAX_VERTEX_OBSERVABLES}"
        )
    return np.concatenate([block for _, _, block in _vertex_blocks(scenario)])


def classical_bound(scenario: Scenario, expr: InequalityExpr) -> Extrema:
    """Exact extrema of ``expr`` over all 2^n deterministic assignments.

    Blocks are reduced in index order, so the attaining assignments are the
    first ones in enumeration order.
    """
    if scenario.observables > MAX_CLASSICAL_OBSERVABLES:
        raise ResourceLimitError(
            f"{scenario.observables} observables exceed the enumeration cap of {MAX_CLASSICAL_OBSERVABLES}"
        )
    weights = _coefficient_vector(scenario, expr)
    best_min = best_max = None
    argmin = argmax = None
    for _, values, correlators in _vertex_blocks(scenario):
        totals = correlators @ weights
        low, high = int(np.argmin(totals)), int(np.argmax(totals))
        if best_min is None or totals[low] < best_min:
            best_min, argmin = float(totals[low]), values[low]
        if best_max is None or totals[high] > best_max:
            best_max, argmax = float(totals[high]), values[high]
    return Extrema(
        best_min + expr.offset,
        best_max + expr.offset,
        DeterministicAssignment(tuple(int(v) for v in argmin)),
        DeterministicAssignment(tuple(int(v) for v in argmax)),
    )


def _nd_constraints(scenario: Scenario) -> Tuple[np.ndarray, np.ndarray]:
    contexts = scenario.contexts
    size = 4 * len(contexts)
    rows: List[np.ndarray] = []
    rhs: List[float] = []
    for index in range(len(contexts)):
        row = np.zeros(size)
        row[4 * index:4 * index + 4] = 1.0
        rows.append(row)
        rhs.append(1.0)

    def marginal_row(index: int, observable: int) -> np.ndarray:
        row = np.zeros(size)
        if contexts[index].position(observable) == 0:
            row[[4 * index, 4 * index + 1]] = 1.0
        else:
            row[[4 * index, 4 * index + 2]] = 1.0
        return row

    for observable in range(1, scenario.observables + 1):
        sharing = [i for i, c in enumerate(contexts) if observable in c]
        for other in sharing[1:]:
            rows.append(marginal_row(other, observable) - marginal_row(sharing[0], observable))
            rhs.append(0.0)
    return np.array(rows), np.array(rhs)


def _behavior_from_solution(scenario: Scenario, solution: np.ndarray) -> Behavior:
    tables = {}
    for index, context in enumerate(scenario.contexts):
        table = np.clip(solution[4 * index:4 * index + 4], 0.0, None)
        tables[context] = table / table.sum()
    return Behavior(tables)


def nd_bound(scenario: Scenario, expr: InequalityExpr) -> Extrema:
    """Extrema of ``expr`` over the no-disturbance polytope.

    Variables are the four outcome probabilities of every context. The
    constraints are non-negativity, normalization per context, and equal
    marginals for every observable shared between contexts.
    """
    size = 4 * len(scenario.contexts)
    if size > MAX_LP_VARIABLES:
        raise ResourceLimitError(f"LP with {size} variables exceeds the cap of {MAX_LP_VARIABLES}")
    weights = _coefficient_vector(scenario, expr)
    objective = np.kron(weights, _CORRELATOR_SIGNS)
    a_eq, b_eq = _nd_constraints(scenario)

    results = []
    for sense in (1.0, -1.0):
        result = linprog(
            sense * objective,
            A_eq=a_eq,
            b_eq=b_eq,
            bounds=(0.0, None),
            method="highs-ds",
            options={
                "primal_feasibility_tolerance": LP_FEASIBILITY_TOL,
                "dual_feasibility_tolerance": LP_FEASIBILITY_TOL,
            },
        )
        if result.status != 0:
            raise InternalConsistencyError(f"No-disturbance LP failed: {result.message}")
        logger.debug("ND LP (sense %+d) over %d variables: %s", sense, size, result.message)
        behavior = _behavior_from_solution(scenario, result.x)
        results.append((expr.evaluate(behavior), behavior))

    (minimum, argmin), (maximum, argmax) = results
    return Extrema(minimum, maximum, argmin, argmax)


def arithmetic_bound(scenario: Scenario, expr: InequalityExpr) -> Extrema:
    """Every correlator set independently to +1 or -1: offset -/+ sum of |coefficients|."""
    spread = math.fsum(abs(coefficient) for _, coefficient in expr.terms)
    return Extrema(expr.offset - spread, expr.offset + spread)


def bounds_report(scenario: Scenario, expr: InequalityExpr) -> BoundsReport:
    """All three bound pairs of ``expr``, with attaining assignments and Behaviors."""
    return BoundsReport.from_extrema(
        classical_bound(scenario, expr),
        nd_bound(scenario, expr),
        arithmetic_bound(scenario, expr),
    )


@dataclass(frozen=True)
class NoDisturbanceReport:
    passed: bool
    worst_observable: Optional[int]
    max_gap: float

    def to_json(self) -> Dict[str, Any]:
        return {"passed": self.passed, "worst_observable": self.worst_observable, "max_gap": self.max_gap}


def no_disturbance_check(behavior: Behavior, tol: float = PROBABILITY_TOL) -> NoDisturbanceReport:
    """Check that every observable has the same marginal in all contexts containing it."""
    worst, max_gap = None, 0.0
    for observable in behavior.observables():
        marginals = [
            behavior.marginal(context, observable) for context in behavior.contexts if observable in context
        ]
        gap = max(marginals) - min(marginals)
        if gap > max_gap:
            worst, max_gap = observable, gap
    return NoDisturbanceReport(max_gap <= tol, worst, max_gap)


@dataclass(frozen=True)
class Event:
    """An outcome assignment to both observables of one context."""

    context: MeasurementContext
    values: Tuple[int, int]

    def __post_init__(self):
        context = as_context(self.context)
        values = tuple(self.values)
        if len(values) != 2 or any(isinstance(v, bool) or v not in (1, -1) for v in values):
            raise ScenarioValidationError(f"Event values {values!r} must be two entries of +1 or -1")
        object.__setattr__(self, "context", context)
        object.__setattr__(self, "values", tuple(int(v) for v in values))

    def value_of(self, observable: int) -> Optional[int]:
        if observable not in self.context:
            return None
        return self.values[self.context.position(observable)]

    @classmethod
    def from_json(cls, payload: Dict[str, Any]) -> "Event":
        """Build from ``{"context": [i, j], "values": {"i": 1, "j": -1}}``."""
        context = as_context(payload["context"])
        values = {int(key): value for key, value in payload["values"].items()}
        if set(values) != set(context.observables):
            raise ScenarioValidationError(
                f"Event values {sorted(values)} do not match context observables {list(context.observables)}"
            )
        return cls(context, tuple(values[o] for o in context.observables))

    def to_json(self) -> Dict[str, Any]:
        return {
            "context": self.context.to_json(),
            "values": {str(o): v for o, v in zip(self.context.observables, self.values)},
        }

    def __str__(self) -> str:
        return ",".join(f"A{o}={v:+d}" for o, v in zip(self.context.observables, self.values))


def reflection_events(scenario: Scenario) -> List[Event]:
    """For each context (i, j), the event "boson i reflected, boson j transmitted"."""
    return [Event(context, (1, -1)) for context in scenario.contexts]


def are_exclusive(first: Event, second: Event) -> bool:
    """Exclusive iff some shared observable is assigned different values."""
    for observable in first.context.observables:
        other = second.value_of(observable)
        if other is not None and other != first.value_of(observable):
            return True
    return False


@dataclass(frozen=True)
class ExclusivitySum:
    total: float
    pairwise_exclusive: bool
    satisfies_e: bool

    def to_json(self) -> Dict[str, Any]:
        return {"sum": self.total, "pairwise_exclusive": self.pairwise_exclusive, "satisfies_E": self.satisfies_e}


def exclusivity_sum(behavior: Behavior, events: Sequence[Event]) -> ExclusivitySum:
    """Sum event probabilities and test them against the exclusivity principle."""
    total = math.fsum(behavior.probability(e.context, e.values) for e in events)
    pairwise = all(are_exclusive(a, b) for a, b in combinations(events, 2))
    return ExclusivitySum(total, pairwise, total <= 1.0 + PROBABILITY_TOL)


@dataclass(frozen=True)
class ProjectorSum:
    total: float
    orthogonal: bool

    def to_json(self) -> Dict[str, Any]:
        return {"sum": self.total, "orthogonal": self.orthogonal}


def _check_projector(projector: Any, dim: int) -> np.ndarray:
    matrix = np.asarray(projector, dtype=complex)
    if matrix.shape != (dim, dim):
        raise ShapeError(f"Projector of shape {matrix.shape} does not act on dimension {dim}")
    if np.max(np.abs(matrix @ matrix - matrix)) > PROBABILITY_TOL:
        raise ProjectorError("Matrix is not idempotent")
    if np.max(np.abs(matrix - matrix.conj().T)) > PROBABILITY_TOL:
        raise ProjectorError("Matrix is not Hermitian")
    return matrix


def projector_exclusivity_sum(state: Any, projectors: Sequence[Any]) -> ProjectorSum:
    """Sum of <state|P_k|state> and whether the projectors are pairwise orthogonal.

    Args:
        state: Unit complex vector
        projectors: Projection matrices acting on the state's space

    Returns:
        ProjectorSum; when ``orthogonal`` holds, ``total`` never exceeds 1
    """
    vector = np.asarray(state, dtype=complex).reshape(-1)
    if abs(np.linalg.norm(vector) - 1.0) > PROBABILITY_TOL:
        raise ScenarioValidationError(f"State has norm {np.linalg.norm(vector)!r}, not 1")
    matrices = [_check_projector(p, vector.size) for p in projectors]
    orthogonal = all(
        np.max(np.abs(a @ b)) <= PROBABILITY_TOL for a, b in combinations(matrices, 2)
    )
    total = math.fsum(float(np.real(vector.conj() @ m @ vector)) for m in matrices)
    if orthogonal and total > 1.0 + PROBABILITY_TOL:
        raise InternalConsistencyError(f"Orthogonal projectors sum to {total!r}")
    return ProjectorSum(total, orthogonal)
