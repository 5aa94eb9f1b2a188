"""Hidden-variable models producing Behaviors on pairwise scenarios.

Two families live here: the λ-ordering model, in which the boson with the
larger hidden variable is reflected (+1) and the other transmitted (-1),
and deterministic noncontextual models, which pre-assign one value per
observable regardless of context.

Observables are numbered from 1, as in the JSON scenario format.
"""
import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from bosonctx.errors import (
    ContextError,
    CoverageError,
    LambdaTieError,
    ResourceLimitError,
    ScenarioValidationError,
    UnsupportedLawError,
)

logger = logging.getLogger(__name__)

PROBABILITY_TOL = 1e-10
MAX_ASSIGNMENT_OBSERVABLES = 24
MAX_SAMPLES = 10 ** 8
SAMPLE_BATCH = 1 << 16

# Table layout used by every Behavior.
OUTCOMES: Tuple[Tuple[int, int], ...] = ((1, 1), (1, -1), (-1, 1), (-1, -1))
OUTCOME_KEYS: Tuple[str, ...] = ("pp", "pm", "mp", "mm")
_OUTCOME_INDEX = {outcome: index for index, outcome in enumerate(OUTCOMES)}


def _check_sign(value: Any) -> int:
    if isinstance(value, bool) or value not in (1, -1):
        raise ScenarioValidationError(f"Outcome {value!r} is not +1 or -1")
    return int(value)


@dataclass(frozen=True, order=True)
class MeasurementContext:
    """An ordered pair of distinct, jointly measured observables."""

    first: int
    second: int

    def __post_init__(self):
        for index in (self.first, self.second):
            if isinstance(index, bool) or not isinstance(index, (int, np.integer)) or index < 1:
                raise ContextError(f"Observable index {index!r} must be a positive integer")
        if self.first == self.second:
            raise ContextError(f"Context ({self.first},{self.second}) repeats an observable")
        object.__setattr__(self, "first", int(self.first))
        object.__setattr__(self, "second", int(self.second))

    @classmethod
    def from_sequence(cls, observables: Sequence[int]) -> "MeasurementContext":
        """Build from ``[i, j]``; the λ-model is defined for pairs only."""
        if len(observables) != 2:
            raise ContextError(
                f"Context {list(observables)} has {len(observables)} observables; only pairs are defined"
            )
        return cls(observables[0], observables[1])

    @property
    def observables(self) -> Tuple[int, int]:
        return (self.first, self.second)

    def __contains__(self, observable: int) -> bool:
        return observable in self.observables

    def position(self, observable: int) -> int:
        """Index (0 or 1) of ``observable`` inside this context."""
        if observable not in self:
            raise ContextError(f"Observable {observable} is not part of context {self}")
        return self.observables.index(observable)

    def reversed(self) -> "MeasurementContext":
        return MeasurementContext(self.second, self.first)

    def to_json(self) -> List[int]:
        return [self.first, self.second]

    def __str__(self) -> str:
        return f"({self.first},{self.second})"


ContextLike = Union[MeasurementContext, Sequence[int]]


def as_context(context: ContextLike) -> MeasurementContext:
    if isinstance(context, MeasurementContext):
        return context
    return MeasurementContext.from_sequence(list(context))


@dataclass(frozen=True)
class Scenario:
    """Compatibility structure: how many observables, and which pairs are co-measured."""

    observables: int
    contexts: Tuple[MeasurementContext, ...]

    def __post_init__(self):
        contexts = tuple(as_context(c) for c in self.contexts)
        if isinstance(self.observables, bool) or not isinstance(self.observables, int) or self.observables < 1:
            raise ScenarioValidationError(f"Observable count {self.observables!r} must be a positive integer")
        if not contexts:
            raise ScenarioValidationError("A scenario needs at least one context")
        seen = set()
        for context in contexts:
            if max(context.observables) > self.observables:
                raise ContextError(f"Context {context} refers past observable {self.observables}")
            key = frozenset(context.observables)
            if key in seen:
                raise ContextError(f"Context {context} appears twice")
            seen.add(key)
        object.__setattr__(self, "contexts", contexts)

    def contexts_containing(self, observable: int) -> List[MeasurementContext]:
        return [context for context in self.contexts if observable in context]

    @classmethod
    def from_json(cls, payload: Dict[str, Any]) -> "Scenario":
        """Build from ``{"observables": n, "contexts": [[i, j], ...]}``."""
        return cls(payload["observables"], tuple(as_context(c) for c in payload["contexts"]))

    def to_json(self) -> Dict[str, Any]:
        return {"observables": self.observables, "contexts": [c.to_json() for c in self.contexts]}


ScenarioLike = Union[Scenario, Sequence[ContextLike]]


def _contexts_of(scenario: ScenarioLike) -> Tuple[MeasurementContext, ...]:
    if isinstance(scenario, Scenario):
        return scenario.contexts
    contexts = tuple(as_context(c) for c in scenario)
    if not contexts:
        raise ScenarioValidationError("A scenario needs at least one context")
    return contexts


@dataclass(frozen=True)
class HiddenLambdaState:
    """One hidden variable per boson, each strictly inside (0, 1) and pairwise distinct."""

    lambdas: Tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.lambdas)
        if not values:
            raise ScenarioValidationError("A λ-state needs at least one value")
        for value in values:
            if not 0.0 < value < 1.0:
                raise ScenarioValidationError(f"λ = {value!r} is not strictly inside (0, 1)")
        if len(set(values)) != len(values):
            raise LambdaTieError(f"λ-state {values} contains a tie")
        object.__setattr__(self, "lambdas", values)

    @property
    def size(self) -> int:
        return len(self.lambdas)

    def value(self, observable: int) -> float:
        if not 1 <= observable <= self.size:
            raise CoverageError(f"λ-state of size {self.size} has no entry for observable {observable}")
        return self.lambdas[observable - 1]


@dataclass(frozen=True)
class DeterministicAssignment:
    """Context-independent ±1 value for every observable."""

    values: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(_check_sign(v) for v in self.values))

    def value(self, observable: int) -> int:
        if not 1 <= observable <= len(self.values):
            raise CoverageError(
                f"Assignment of size {len(self.values)} has no value for observable {observable}"
            )
        return self.values[observable - 1]


@dataclass(frozen=True, eq=False)
class Behavior:
    """Joint outcome distribution for every context.

    Each table holds four probabilities in the order pp, pm, mp, mm, where
    the first letter is the outcome of the context's first observable.
    """

    tables: Mapping[MeasurementContext, np.ndarray]

    def __post_init__(self):
        tables = {}
        for context, table in self.tables.items():
            context = as_context(context)
            values = np.array(table, dtype=float).reshape(-1)
            if values.shape != (4,):
                raise ScenarioValidationError(f"Table for {context} has {values.size} entries, expected 4")
            if values.min() < -PROBABILITY_TOL:
                raise ScenarioValidationError(f"Table for {context} has a negative entry {values.min()!r}")
            total = math.fsum(values)
            if abs(total - 1.0) > PROBABILITY_TOL:
                raise ScenarioValidationError(f"Table for {context} sums to {total!r}, not 1")
            values = np.clip(values, 0.0, None)
            values.setflags(write=False)
            tables[context] = values
        if not tables:
            raise ScenarioValidationError("A Behavior needs at least one context")
        object.__setattr__(self, "tables", tables)

    @property
    def contexts(self) -> Tuple[MeasurementContext, ...]:
        return tuple(self.tables)

    def table(self, context: ContextLike) -> np.ndarray:
        context = as_context(context)
        try:
            return self.tables[context]
        except KeyError:
            raise ContextError(f"Behavior has no table for context {context}") from None

    def probability(self, context: ContextLike, values: Tuple[int, int]) -> float:
        """Probability of ``values`` in ``context``; a reversed context is matched too."""
        context = as_context(context)
        first, second = (_check_sign(v) for v in values)
        if context not in self.tables and context.reversed() in self.tables:
            context, first, second = context.reversed(), second, first
        return float(self.table(context)[_OUTCOME_INDEX[(first, second)]])

    def marginal(self, context: ContextLike, observable: int) -> float:
        """P(observable = +1) inside ``context``."""
        context = as_context(context)
        table = self.table(context)
        if context.position(observable) == 0:
            return float(table[0] + table[1])
        return float(table[0] + table[2])

    def observables(self) -> List[int]:
        return sorted({o for context in self.tables for o in context.observables})

    def to_json(self) -> List[Dict[str, Any]]:
        """One ``{"context": [i, j], "pp", "pm", "mp", "mm"}`` object per context."""
        items = []
        for context, table in self.tables.items():
            item: Dict[str, Any] = {"context": context.to_json()}
            item.update({key: float(p) for key, p in zip(OUTCOME_KEYS, table)})
            items.append(item)
        return items

    @classmethod
    def from_json(cls, items: Sequence[Dict[str, Any]]) -> "Behavior":
        return cls({as_context(item["context"]): [item[key] for key in OUTCOME_KEYS] for item in items})


def point_mass(values: Tuple[int, int]) -> np.ndarray:
    table = np.zeros(4)
    table[_OUTCOME_INDEX[tuple(_check_sign(v) for v in values)]] = 1.0
    return table


@dataclass(frozen=True)
class LambdaLaw:
    """Distribution the hidden variables are drawn from.

    ``uniform`` and ``beta`` draw i.i.d. values and are exchangeable;
    ``ordered`` sorts each draw so that λ_1 < λ_2 < ... always holds.
    """

    name: str
    a: float = 1.0
    b: float = 1.0

    KNOWN = ("uniform", "beta", "ordered")

    def __post_init__(self):
        if self.name not in self.KNOWN:
            raise UnsupportedLawError(f"Unknown λ-law {self.name!r}; expected one of {self.KNOWN}")
        if self.a <= 0 or self.b <= 0:
            raise ScenarioValidationError(f"Beta parameters must be positive, got a={self.a}, b={self.b}")

    @classmethod
    def uniform(cls) -> "LambdaLaw":
        return cls("uniform")

    @classmethod
    def beta(cls, a: float, b: float) -> "LambdaLaw":
        return cls("beta", a, b)

    @classmethod
    def ordered(cls) -> "LambdaLaw":
        return cls("ordered")

    @classmethod
    def from_json(cls, payload: Optional[Dict[str, Any]]) -> "LambdaLaw":
        if not payload:
            return cls.uniform()
        return cls(payload["name"], payload.get("a", 1.0), payload.get("b", 1.0))

    def to_json(self) -> Dict[str, Any]:
        if self.name == "beta":
            return {"name": self.name, "a": self.a, "b": self.b}
        return {"name": self.name}

    @property
    def exchangeable(self) -> bool:
        return self.name != "ordered"

    def sample_pair(self, generator: np.random.Generator, draws: int) -> np.ndarray:
        """Draw ``(draws, 2)`` hidden variables for the lower- and higher-numbered boson of a context.

        Only the two λ values of a context enter its outcome. Under the i.i.d.
        laws they are two independent draws; under ``ordered`` the lower-numbered
        boson always holds the smaller value.
        """
        size = (draws, 2)
        if self.name == "beta":
            return generator.beta(self.a, self.b, size)
        values = generator.random(size)
        if self.name == "ordered":
            values.sort(axis=1)
        return values


def lambda_model_outcome(state: HiddenLambdaState, context: ContextLike) -> Tuple[int, int]:
    """Outcomes of the λ-ordering model for one pairwise context.

    The observable with the larger λ is reflected (+1), the other
    transmitted (-1).

    Args:
        state: Hidden variables of every boson
        context: Pair (i, j) measured together

    Returns:
        (value_i, value_j), always of opposite sign
    """
    context = as_context(context)
    first, second = (state.value(o) for o in context.observables)
    if first == second:
        raise LambdaTieError(f"λ tie in context {context}: both equal {first!r}")
    return (1, -1) if first > second else (-1, 1)


def lambda_exact_behavior(scenario: ScenarioLike, law: Optional[LambdaLaw] = None) -> Behavior:
    """Exact Behavior of the λ-model under an exchangeable continuous law.

    Only the ordering of two λ values matters, so every context is
    perfectly anticorrelated with each order having probability 1/2.
    """
    law = law or LambdaLaw.uniform()
    if not law.exchangeable:
        raise UnsupportedLawError(f"Exact mode covers exchangeable laws only, not {law.name!r}")
    half = np.array([0.0, 0.5, 0.5, 0.0])
    return Behavior({context: half for context in _contexts_of(scenario)})


def _seed_sequence(seed: int) -> np.random.SeedSequence:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or not 0 <= seed < 2 ** 64:
        raise ScenarioValidationError(f"Seed {seed!r} is not an unsigned 64-bit integer")
    return np.random.SeedSequence(int(seed))


def lambda_sample_behavior(
    scenario: ScenarioLike,
    n_samples: int,
    seed: int,
    law: Optional[LambdaLaw] = None,
) -> Behavior:
    """Monte Carlo estimate of the λ-model Behavior.

    Every context gets its own counter-based Philox stream spawned from
    ``seed``, so results are identical however the contexts are scheduled.

    Args:
        scenario: Scenario or list of pairwise contexts
        n_samples: Number of runs per context
        seed: Unsigned 64-bit seed
        law: λ-law, i.i.d. Uniform(0, 1) by default

    Returns:
        Empirical Behavior
    """
    law = law or LambdaLaw.uniform()
    if isinstance(n_samples, bool) or not isinstance(n_samples, (int, np.integer)) or n_samples < 1:
        raise ScenarioValidationError(f"Sample count {n_samples!r} must be a positive integer")
    if n_samples > MAX_SAMPLES:
        raise ResourceLimitError(f"{n_samples} samples exceed the cap of {MAX_SAMPLES}")
    contexts = _contexts_of(scenario)
    streams = _seed_sequence(seed).spawn(len(contexts))

    tables = {}
    for context, stream in zip(contexts, streams):
        generator = np.random.Generator(np.random.Philox(stream))
        # Column 0 belongs to the lower-numbered boson.
        first, second = (0, 1) if context.first < context.second else (1, 0)
        reflected_first = 0
        remaining = int(n_samples)
        while remaining:
            batch = min(remaining, SAMPLE_BATCH)
            lambdas = law.sample_pair(generator, batch)
            if np.any(lambdas[:, 0] == lambdas[:, 1]):
                raise LambdaTieError(f"Sampled λ tie in context {context}")
            reflected_first += int(np.count_nonzero(lambdas[:, first] > lambdas[:, second]))
            remaining -= batch
        share = reflected_first / n_samples
        tables[context] = [0.0, share, 1.0 - share, 0.0]
        logger.debug("Context %s: %d/%d runs reflect the first boson", context, reflected_first, n_samples)
    return Behavior(tables)


def sampling_tolerance(n_samples: int, sigmas: float = 5.0) -> float:
    """Half-width of a ``sigmas``-sigma binomial interval around p = 1/2."""
    return sigmas * 0.5 / math.sqrt(n_samples)


def deterministic_behavior(assignment: DeterministicAssignment, scenario: ScenarioLike) -> Behavior:
    """Point-mass Behavior of a noncontextual assignment."""
    tables = {}
    for context in _contexts_of(scenario):
        tables[context] = point_mass(tuple(assignment.value(o) for o in context.observables))
    return Behavior(tables)


def all_deterministic_assignments(observables: int) -> Iterator[DeterministicAssignment]:
    """All 2^n assignments; bit k of the index set means observable k+1 takes -1."""
    if observables > MAX_ASSIGNMENT_OBSERVABLES:
        raise ResourceLimitError(
            f"{observables} observables exceed the enumeration cap of {MAX_ASSIGNMENT_OBSERVABLES}"
        )
    for index in range(1 << observables):
        yield DeterministicAssignment(tuple(-1 if index >> k & 1 else 1 for k in range(observables)))


@dataclass(frozen=True)
class ContextWitness:
    """One observable receiving different values in two contexts under a fixed λ."""

    observable: int
    context_a: MeasurementContext
    value_a: int
    context_b: MeasurementContext
    value_b: int

    def to_json(self) -> Dict[str, Any]:
        return {
            "observable": self.observable,
            "contexts": [self.context_a.to_json(), self.context_b.to_json()],
            "values": [self.value_a, self.value_b],
        }


def context_dependence_witness(
    state: HiddenLambdaState,
    observable: int,
    context_a: ContextLike,
    context_b: ContextLike,
) -> Optional[ContextWitness]:
    """Return a witness if ``observable`` gets different λ-model values in the two contexts."""
    context_a, context_b = as_context(context_a), as_context(context_b)
    position_a, position_b = context_a.position(observable), context_b.position(observable)
    value_a = lambda_model_outcome(state, context_a)[position_a]
    value_b = lambda_model_outcome(state, context_b)[position_b]
    if value_a == value_b:
        return None
    return ContextWitness(observable, context_a, value_a, context_b, value_b)
