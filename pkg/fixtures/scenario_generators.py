"""Seeded generators of scenarios, states and matrices for testing."""
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from faker import Faker
from scipy.stats import unitary_group

from bosonctx.hv_models import HiddenLambdaState, MeasurementContext, Scenario
from bosonctx.inequalities import Event

fake = Faker()


class ScenarioGenerator:
    """Generate valid engine inputs and scenario payloads for testing."""

    @staticmethod
    def seed(value: int) -> None:
        """Seed Faker so a test sees the same data on every run."""
        Faker.seed(value)

    @staticmethod
    def generate_seed() -> int:
        return fake.pyint(min_value=0, max_value=2 ** 32 - 1)

    @staticmethod
    def generate_lambda_state(size: int = 3) -> HiddenLambdaState:
        """Distinct λ values strictly inside (0, 1)."""
        values = set()
        while len(values) < size:
            values.add(fake.pyfloat(min_value=0.001, max_value=0.999, right_digits=6))
        ordering = list(values)
        fake.random.shuffle(ordering)
        return HiddenLambdaState(tuple(ordering))

    @staticmethod
    def generate_scenario(observables: int = 4, contexts: Optional[int] = None) -> Scenario:
        """Random pairwise scenario over ``observables`` observables.

        Args:
            observables: Number of observables (at least 2)
            contexts: Number of distinct contexts (default: about half of all pairs)

        Returns:
            Scenario whose contexts are distinct unordered pairs
        """
        pairs = [(i, j) for i in range(1, observables + 1) for j in range(i + 1, observables + 1)]
        count = contexts or max(1, len(pairs) // 2)
        chosen = fake.random.sample(pairs, count)
        return Scenario(observables, tuple(MeasurementContext(i, j) for i, j in sorted(chosen)))

    @staticmethod
    def generate_event(context: Tuple[int, int], values: Optional[Tuple[int, int]] = None) -> Event:
        if values is None:
            values = (fake.random_element((1, -1)), fake.random_element((1, -1)))
        return Event(MeasurementContext(*context), values)

    @staticmethod
    def generate_unitary(dim: int, seed: int) -> np.ndarray:
        """Haar-random unitary."""
        return unitary_group.rvs(dim, random_state=seed)

    @staticmethod
    def generate_complex_matrix(rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.normal(size=(size, size)) + 1j * rng.normal(size=(size, size))

    @staticmethod
    def generate_state(rng: np.random.Generator, dim: int) -> np.ndarray:
        """Random unit vector in C^dim."""
        vector = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        return vector / np.linalg.norm(vector)

    @staticmethod
    def generate_orthogonal_projectors(dim: int, seed: int, count: Optional[int] = None) -> List[np.ndarray]:
        """Pairwise orthogonal projectors onto disjoint groups of a random basis.

        Args:
            dim: Hilbert space dimension
            seed: Seed of the random basis
            count: Number of projectors (default: between 1 and dim)

        Returns:
            Hermitian idempotent matrices with P_a P_b = 0
        """
        rng = np.random.default_rng(seed)
        basis = unitary_group.rvs(dim, random_state=seed) if dim > 1 else np.eye(1, dtype=complex)
        count = count or int(rng.integers(1, dim + 1))
        labels = rng.permutation(dim)[:count]
        groups = [[int(label)] for label in labels]
        for column in range(dim):
            if column not in labels and rng.random() < 0.5:
                groups[int(rng.integers(count))].append(column)
        projectors = []
        for group in groups:
            vectors = basis[:, group]
            projectors.append(vectors @ vectors.conj().T)
        return projectors

    @staticmethod
    def complex_json(matrix: Any) -> Dict[str, Any]:
        """``{"re", "im"}`` layout of a complex matrix or vector."""
        array = np.asarray(matrix, dtype=complex)
        return {"re": array.real.tolist(), "im": array.imag.tolist()}

    @staticmethod
    def generate_hidden_variable_scenario(samples: int = 2000, seed: Optional[int] = None) -> Dict[str, Any]:
        """Valid hidden-variable scenario file on the triangle."""
        return {
            "kind": "hidden-variable",
            "scenario": {"observables": 3, "contexts": [[1, 2], [2, 3], [3, 1]]},
            "law": {"name": "uniform"},
            "samples": samples,
            "seed": ScenarioGenerator.generate_seed() if seed is None else seed,
        }

    @staticmethod
    def generate_bounds_scenario(cycle: int = 5, **overrides) -> Dict[str, Any]:
        payload = {"kind": "bounds", "cycle": cycle, "behavior": {"source": "lambda-exact"}}
        payload.update(overrides)
        return payload

    @staticmethod
    def generate_invalid_scenario(issue: str = "missing_kind") -> Dict[str, Any]:
        """Generate an invalid scenario file for negative testing.

        Args:
            issue: One of "missing_kind", "unknown_kind", "empty_contexts", "non_pair_context",
                "not_unitary", "ragged_matrix", "photon_cap", "huge_cycle", "lambda_tie", "unknown_law",
                "exact_ordered_law"

        Returns:
            Scenario payload that fails validation or hits a resource cap
        """
        if issue == "missing_kind":
            return {"cycle": 5}
        elif issue == "unknown_kind":
            return {"kind": "tomography"}
        elif issue == "empty_contexts":
            return {"kind": "hidden-variable", "scenario": {"observables": 3, "contexts": []}}
        elif issue == "non_pair_context":
            return {"kind": "hidden-variable", "scenario": {"observables": 3, "contexts": [[1, 2, 3]]}}
        elif issue == "not_unitary":
            return {"kind": "quantum", "interferometer": {"dim": 2, "re": [[1, 1], [1, 1]]}, "inputs": [[1, 1]]}
        elif issue == "ragged_matrix":
            return {"kind": "quantum", "interferometer": {"dim": 2, "re": [[1, 0], [0]]}, "inputs": [[1, 0]]}
        elif issue == "photon_cap":
            return {"kind": "quantum", "interferometer": {"preset": "identity", "dim": 2}, "inputs": [[4, 3]]}
        elif issue == "huge_cycle":
            return {"kind": "bounds", "cycle": 10**8}
        elif issue == "lambda_tie":
            return {
                "kind": "hidden-variable",
                "scenario": {"observables": 3, "contexts": [[1, 2]]},
                "lambdas": [0.4, 0.4, 0.7],
            }
        elif issue == "unknown_law":
            return {
                "kind": "hidden-variable",
                "scenario": {"observables": 3, "contexts": [[1, 2]]},
                "law": {"name": "cauchy"},
            }
        elif issue == "exact_ordered_law":
            return {
                "kind": "bounds",
                "cycle": 3,
                "behavior": {"source": "lambda-exact", "law": {"name": "ordered"}},
            }
        else:
            return {}
