"""Exception hierarchy shared by every stage.

Each class carries the CLI exit code it maps to.
"""


class OnsagerKitError(Exception):
    exit_code = 1


class UsageError(OnsagerKitError, ValueError):
    exit_code = 2


class DomainError(OnsagerKitError, ValueError):
    """Input outside the mathematical domain of an operation."""

    exit_code = 2


class ResourceError(OnsagerKitError):
    """Requested size exceeds an enforced computational cap."""

    exit_code = 3


class VerificationError(OnsagerKitError):
    """A computed value disagrees with a golden or self-check value."""

    exit_code = 4


class InconsistencyError(VerificationError):
    """A surplus data point does not lie on the fitted polynomial."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class InternalError(VerificationError):
    """An exact identity that must hold failed; indicates a bug upstream."""


class ConvergenceError(OnsagerKitError):
    exit_code = 5

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
