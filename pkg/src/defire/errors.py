"""Exception types raised by the simulator and analysis routines."""


class DefireError(Exception):
    """Base class for domain errors (CLI exit status 1)."""


class ProfileError(DefireError, ValueError):
    """A profile, trace or parameter set violates its invariants."""


class NotApplicableError(DefireError):
    """The requested construction does not apply to the given input."""


class NonTerminationError(DefireError):
    """A firing cycle or a search exceeded its configured cap."""


class ConsistencyError(DefireError):
    """An internal invariant that the model guarantees was found violated."""


class HypothesisError(DefireError):
    """Preconditions of an estimate (shared trace, no grouping, ...) fail."""


class ConfigError(Exception):
    """Malformed or invalid run configuration (CLI exit status 2)."""
