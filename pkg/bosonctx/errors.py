"""Exception hierarchy shared by the engines and the command line."""


class BosonCtxError(Exception):
    """Base class for every error raised by bosonctx."""

    exit_code = 1


class ScenarioParseError(BosonCtxError):
    """A scenario file is not valid JSON."""

    exit_code = 2


class ScenarioValidationError(BosonCtxError):
    """Input violates a schema or a domain invariant."""

    exit_code = 3


class ShapeError(ScenarioValidationError):
    """A matrix or vector has the wrong shape."""


class NotUnitaryError(ScenarioValidationError):
    """An interferometer matrix is not unitary within tolerance."""


class ConservationError(ScenarioValidationError):
    """Input and output photon numbers differ."""


class LambdaTieError(ScenarioValidationError):
    """Two hidden variables compared by the λ-model are exactly equal."""


class ContextError(ScenarioValidationError):
    """A measurement context is malformed or missing from a Behavior."""


class CoverageError(ScenarioValidationError):
    """An assignment does not cover every observable of a scenario."""


class ProjectorError(ScenarioValidationError):
    """A matrix passed as a projector is not idempotent and Hermitian."""


class UnsupportedLawError(ScenarioValidationError):
    """The requested λ-law has no exact treatment."""


class ResourceLimitError(BosonCtxError):
    """A computation exceeds a desk-scale size cap."""

    exit_code = 4


class InternalConsistencyError(BosonCtxError):
    """An internal result contradicts a guaranteed invariant."""

    exit_code = 5
