"""Exception types shared across the package."""


class NullConeError(Exception):
    """Base class for all package errors."""


class DomainError(NullConeError, ValueError):
    """A radius or coordinate lies outside the admissible chart of a model."""


class NumericGuardError(NullConeError, RuntimeError):
    """A numerical safeguard tripped (aliasing, ill-conditioning, divergence).

    ``guard`` names the safeguard so the CLI can report it.
    """

    def __init__(self, message: str, guard: str = "numeric"):
        super().__init__(message)
        self.guard = guard


class NotSpacelikeError(NumericGuardError):
    """The mean curvature vector fails to be spacelike at some nodes."""

    def __init__(self, message: str, nodes=None):
        super().__init__(message, guard="spacelike")
        self.nodes = nodes


class TheoremViolation(NullConeError):
    """A computed result contradicts a rigidity statement (falsification hook)."""
