"""Exact linear-optics engine for indistinguishable bosons.

An interferometer is described completely by its single-particle unitary.
Multi-boson transition amplitudes follow from permanents of submatrices of
that unitary; there is no interaction term anywhere in this module.

Convention: ``entries[k, j]`` is the amplitude for a photon entering mode
``j`` to leave through mode ``k``.
"""
import itertools
import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Iterator, List, Sequence, Tuple

import numpy as np

from bosonctx.errors import (
    ConservationError,
    NotUnitaryError,
    ResourceLimitError,
    ScenarioValidationError,
    ShapeError,
)

logger = logging.getLogger(__name__)

PROBABILITY_TOL = 1e-10
UNITARITY_TOL = 1e-10
MAX_PERMANENT_SIZE = 16
MAX_NAIVE_PERMANENT_SIZE = 8
MAX_PHOTONS = 6
MAX_SUPPORT = 200_000


def _square_matrix(matrix: Any) -> np.ndarray:
    array = np.asarray(matrix, dtype=complex)
    if array.ndim != 2 or array.shape[0] != array.shape[1]:
        raise ShapeError(f"Expected a square matrix, got shape {array.shape}")
    return array


def complex_array(payload: Dict[str, Any], label: str = "array") -> np.ndarray:
    """Decode a ``{"re": ..., "im": ...}`` payload into a complex array.

    Ragged or non-numeric nesting raises ShapeError.
    """
    try:
        real = np.asarray(payload["re"], dtype=float)
        imag = np.asarray(payload["im"], dtype=float) if "im" in payload else np.zeros_like(real)
    except (TypeError, ValueError) as exc:
        raise ShapeError(f"{label} is not a rectangular array of numbers: {exc}") from exc
    if real.shape != imag.shape:
        raise ShapeError(f"{label}: real part {real.shape} and imaginary part {imag.shape} differ in shape")
    return real + 1j * imag


@dataclass(frozen=True, eq=False)
class ModeUnitary:
    """Single-particle unitary of a passive interferometer."""

    entries: np.ndarray

    def __post_init__(self):
        matrix = _square_matrix(self.entries).copy()
        if matrix.shape[0] == 0:
            raise ShapeError("An interferometer needs at least one mode")
        deviation = np.max(np.abs(matrix @ matrix.conj().T - np.eye(matrix.shape[0])))
        if deviation > UNITARITY_TOL:
            raise NotUnitaryError(
                f"U U^dagger deviates from identity by {deviation:.3e} (tolerance {UNITARITY_TOL})"
            )
        matrix.setflags(write=False)
        object.__setattr__(self, "entries", matrix)

    @property
    def dim(self) -> int:
        """Number of modes."""
        return self.entries.shape[0]

    @classmethod
    def identity(cls, dim: int) -> "ModeUnitary":
        """Interferometer that leaves every photon in its port."""
        return cls(np.eye(dim, dtype=complex))

    @classmethod
    def balanced_beam_splitter(cls) -> "ModeUnitary":
        """50:50 beam splitter, (1/sqrt 2) [[1, 1], [1, -1]]."""
        return cls(np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2))

    @classmethod
    def beam_splitter(cls, transmissivity: float, phase: float = 0.0) -> "ModeUnitary":
        """Two-mode splitter with the given intensity transmissivity and reflection phase.

        Args:
            transmissivity: Probability in [0, 1] that a lone photon keeps its mode
            phase: Reflection phase in radians

        Returns:
            ModeUnitary of dimension 2
        """
        if not 0.0 <= transmissivity <= 1.0:
            raise ScenarioValidationError(f"Transmissivity {transmissivity} is outside [0, 1]")
        t = math.sqrt(transmissivity)
        r = math.sqrt(1.0 - transmissivity)
        shift = complex(math.cos(phase), math.sin(phase))
        return cls(np.array([[t, shift * r], [-shift.conjugate() * r, t]], dtype=complex))

    @classmethod
    def from_json(cls, payload: Dict[str, Any]) -> "ModeUnitary":
        """Build from ``{"dim": d, "re": [[...]], "im": [[...]]}``; ``im`` defaults to zeros."""
        entries = complex_array(payload, "interferometer")
        dim = payload.get("dim", entries.shape[0] if entries.ndim else 0)
        if entries.ndim != 2 or entries.shape != (dim, dim):
            raise ShapeError(f"Declared dim {dim} does not match matrix shape {entries.shape}")
        return cls(entries)

    def to_json(self) -> Dict[str, Any]:
        """Serialize in the interferometer JSON layout."""
        return {
            "dim": self.dim,
            "re": self.entries.real.tolist(),
            "im": self.entries.imag.tolist(),
        }


@dataclass(frozen=True, order=True)
class FockState:
    """Photon occupation numbers, one per mode."""

    occupations: Tuple[int, ...]

    def __post_init__(self):
        values = tuple(self.occupations)
        if not values:
            raise ShapeError("A Fock state needs at least one mode")
        for value in values:
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ScenarioValidationError(f"Occupation {value!r} is not an integer")
            if value < 0:
                raise ScenarioValidationError(f"Occupation {value} is negative")
        object.__setattr__(self, "occupations", tuple(int(v) for v in values))

    @property
    def dim(self) -> int:
        return len(self.occupations)

    @property
    def total_photons(self) -> int:
        return sum(self.occupations)

    def __str__(self) -> str:
        return "(" + ",".join(str(n) for n in self.occupations) + ")"


@dataclass(frozen=True)
class OutcomeDistribution:
    """Probabilities of every output pattern reachable from one input state."""

    support: Tuple[Tuple[FockState, float], ...]

    def __post_init__(self):
        entries = tuple((state, float(p)) for state, p in self.support)
        if not entries:
            raise ScenarioValidationError("An outcome distribution needs at least one entry")
        photons = entries[0][0].total_photons
        dim = entries[0][0].dim
        for state, p in entries:
            if state.total_photons != photons:
                raise ConservationError(
                    f"Output {state} carries {state.total_photons} photons, expected {photons}"
                )
            if state.dim != dim:
                raise ShapeError(f"Output {state} has {state.dim} modes, expected {dim}")
            if p < -PROBABILITY_TOL or p > 1.0 + PROBABILITY_TOL:
                raise ScenarioValidationError(f"Probability {p} of {state} is outside [0, 1]")
        total = math.fsum(p for _, p in entries)
        if abs(total - 1.0) > PROBABILITY_TOL:
            raise ScenarioValidationError(f"Probabilities sum to {total!r}, not 1")
        object.__setattr__(self, "support", entries)

    @property
    def total_photons(self) -> int:
        return self.support[0][0].total_photons

    @property
    def dim(self) -> int:
        return self.support[0][0].dim

    def probability(self, state: FockState) -> float:
        """Probability of ``state``; zero when it is not in the support."""
        for candidate, p in self.support:
            if candidate == state:
                return p
        return 0.0

    def expected_occupation(self, mode: int) -> float:
        return math.fsum(p * state.occupations[mode] for state, p in self.support)

    def to_json(self) -> List[Dict[str, Any]]:
        """Serialize as a lexicographically sorted list of ``{"occupations", "p"}``."""
        return [
            {"occupations": list(state.occupations), "p": p}
            for state, p in sorted(self.support, key=lambda item: item[0])
        ]

    @classmethod
    def from_json(cls, items: Sequence[Dict[str, Any]]) -> "OutcomeDistribution":
        return cls(tuple((FockState(tuple(item["occupations"])), item["p"]) for item in items))


@dataclass(frozen=True)
class NoSignallingReport:
    """Marginal of one output mode with and without extra photons."""

    marginal_before: float
    marginal_after: float
    difference: float

    def __iter__(self) -> Iterator[float]:
        return iter((self.marginal_before, self.marginal_after, self.difference))


def permanent(matrix: Any) -> complex:
    """Compute the permanent with Ryser's formula and Gray-code column updates.

    Runs in O(2^n n) and is bit-for-bit deterministic for a fixed input.

    Args:
        matrix: Square complex matrix of size at most MAX_PERMANENT_SIZE

    Returns:
        Perm(matrix) as a complex number
    """
    m = _square_matrix(matrix)
    n = m.shape[0]
    if n > MAX_PERMANENT_SIZE:
        raise ResourceLimitError(f"Permanent of size {n} exceeds the cap of {MAX_PERMANENT_SIZE}")
    if n == 0:
        return complex(1.0)

    row_sums = np.zeros(n, dtype=complex)
    total = 0j
    gray = 0
    for step in range(1, 1 << n):
        # Gray code flips exactly one column per step; subset parity equals step parity.
        column = (step & -step).bit_length() - 1
        gray ^= 1 << column
        if gray >> column & 1:
            row_sums += m[:, column]
        else:
            row_sums -= m[:, column]
        term = np.prod(row_sums)
        if step & 1:
            total -= term
        else:
            total += term
    return complex(total if n % 2 == 0 else -total)


def naive_permanent(matrix: Any) -> complex:
    """Definition-sum permanent over all n! permutations; an audit oracle only."""
    m = _square_matrix(matrix)
    n = m.shape[0]
    if n > MAX_NAIVE_PERMANENT_SIZE:
        raise ResourceLimitError(
            f"Naive permanent of size {n} exceeds the cap of {MAX_NAIVE_PERMANENT_SIZE}"
        )
    rows = np.arange(n)
    return complex(sum(np.prod(m[rows, list(cols)]) for cols in itertools.permutations(range(n))))


def _check_dims(unitary: ModeUnitary, *states: FockState) -> None:
    for state in states:
        if state.dim != unitary.dim:
            raise ShapeError(f"State {state} has {state.dim} modes, interferometer has {unitary.dim}")


def _scattering_submatrix(unitary: ModeUnitary, input_state: FockState, output_state: FockState) -> np.ndarray:
    modes = np.arange(unitary.dim)
    rows = np.repeat(modes, output_state.occupations)
    cols = np.repeat(modes, input_state.occupations)
    return unitary.entries[np.ix_(rows, cols)]


def transition_probability(unitary: ModeUnitary, input_state: FockState, output_state: FockState) -> float:
    """Probability of scattering ``input_state`` into ``output_state``.

    |Perm(U_sub)|^2 / (prod s_i! prod t_j!), where U_sub repeats row k of U
    t_k times and column j s_j times.
    """
    _check_dims(unitary, input_state, output_state)
    if input_state.total_photons != output_state.total_photons:
        raise ConservationError(
            f"Input {input_state} has {input_state.total_photons} photons, "
            f"output {output_state} has {output_state.total_photons}"
        )
    if input_state.total_photons < 1:
        raise ScenarioValidationError("Scattering needs at least one photon")

    amplitude = permanent(_scattering_submatrix(unitary, input_state, output_state))
    norm = math.prod(math.factorial(n) for n in input_state.occupations + output_state.occupations)
    return float(abs(amplitude) ** 2 / norm)


def _occupation_patterns(photons: int, modes: int) -> Iterator[Tuple[int, ...]]:
    # Ascending lexicographic order.
    if modes == 1:
        yield (photons,)
        return
    for head in range(photons + 1):
        for tail in _occupation_patterns(photons - head, modes - 1):
            yield (head,) + tail


def output_distribution(unitary: ModeUnitary, input_state: FockState) -> OutcomeDistribution:
    """Enumerate every output pattern with the input's photon number and its probability."""
    _check_dims(unitary, input_state)
    photons = input_state.total_photons
    if photons < 1:
        raise ScenarioValidationError("Scattering needs at least one photon")
    if photons > MAX_PHOTONS:
        raise ResourceLimitError(f"{photons} photons exceed the cap of {MAX_PHOTONS}")
    patterns = math.comb(photons + unitary.dim - 1, photons)
    if patterns > MAX_SUPPORT:
        raise ResourceLimitError(f"{patterns} output patterns exceed the cap of {MAX_SUPPORT}")

    logger.debug("Enumerating %d patterns for %s over %d modes", patterns, input_state, unitary.dim)
    support = []
    for occupations in _occupation_patterns(photons, unitary.dim):
        output_state = FockState(occupations)
        support.append((output_state, transition_probability(unitary, input_state, output_state)))
    return OutcomeDistribution(tuple(support))


def per_photon_marginal(dist: OutcomeDistribution, mode: int) -> float:
    """Expected fraction of the photons that leave through ``mode``.

    Indistinguishable photons carry no labels, so this is the marginal
    scattering probability of "a" photon.
    """
    if not 0 <= mode < dist.dim:
        raise ScenarioValidationError(f"Mode {mode} is out of range for {dist.dim} modes")
    return dist.expected_occupation(mode) / dist.total_photons


def mode_marginals(dist: OutcomeDistribution) -> List[float]:
    """Per-photon marginal of every output mode."""
    return [per_photon_marginal(dist, mode) for mode in range(dist.dim)]


def bunching_probability(dist: OutcomeDistribution) -> float:
    """Total probability that every photon leaves through the same mode."""
    photons = dist.total_photons
    return math.fsum(p for state, p in dist.support if photons in state.occupations)


def no_signalling_report(
    unitary: ModeUnitary,
    base_input: FockState,
    added_input: FockState,
    mode: int,
) -> NoSignallingReport:
    """Compare the per-photon marginal of ``mode`` before and after adding photons.

    Args:
        unitary: Interferometer
        base_input: Reference input
        added_input: ``base_input`` with extra photons in some ports
        mode: Output mode whose marginal is compared

    Returns:
        NoSignallingReport with both marginals and their absolute difference
    """
    _check_dims(unitary, base_input, added_input)
    if any(after < before for before, after in zip(base_input.occupations, added_input.occupations)):
        raise ScenarioValidationError(
            f"{added_input} does not extend {base_input} by added photons only"
        )
    before = per_photon_marginal(output_distribution(unitary, base_input), mode)
    after = per_photon_marginal(output_distribution(unitary, added_input), mode)
    return NoSignallingReport(before, after, abs(after - before))
