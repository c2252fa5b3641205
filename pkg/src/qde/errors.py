"""Exception types with CLI exit-code mapping.

Exit codes: 2 input/validation failure, 3 property-suite violation,
4 resource cap exceeded.
"""


class QdeError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class DimensionMismatch(QdeError):
    exit_code = 2


class NotPositiveSemidefinite(QdeError):
    """Eigenvalue below the clamping tolerance; silent repair would mask bugs."""

    exit_code = 2


class EigensolverFailure(QdeError):
    exit_code = 1


class ValidationFailure(QdeError):
    """An input violates a structural invariant (non-projector, bad unit sum, ...)."""

    exit_code = 2


class SpecFormatError(QdeError):
    """Malformed system spec; carries the offending JSON path."""

    exit_code = 2

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class PropertyViolation(QdeError):
    """A verified inequality family exceeded its tolerance."""

    exit_code = 3


class ResourceCapExceeded(QdeError):
    exit_code = 4
