"""Exception hierarchy.

Input problems derive from :class:`ValidationError` (CLI exit code 2),
budget overflows from :class:`ResourceError` (exit code 3).
"""


class SphereconeError(Exception):
    """Base class for all package errors."""


class ValidationError(SphereconeError, ValueError):
    """Input violates a documented precondition or invariant."""


class DegeneracyError(ValidationError):
    """A construction produced a degenerate spherical triangle."""


class InfeasibleError(ValidationError):
    """A requested construction has no admissible solution."""


class TailDivergenceError(ValidationError):
    """An improper integral over a profile tail does not settle."""


class GluingError(ValidationError):
    """Base for surface assembly failures."""


class LengthMismatchError(GluingError):
    pass


class DanglingEdgeError(GluingError):
    pass


class EulerCharacteristicError(GluingError):
    pass


class DisconnectedError(GluingError):
    pass


class SchemaError(ValidationError):
    """A serialized document does not match its schema."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")


class VersionError(SchemaError):
    pass


class PlacementError(ValidationError):
    """A metric ball could not be placed away from the cone points."""


class ResourceError(SphereconeError):
    """Work would exceed a configured node or arc budget."""
