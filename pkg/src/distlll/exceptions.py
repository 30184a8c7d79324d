"""Error types shared across the package."""


class DistLLLError(Exception):
    """Base class for all package errors."""


class ParameterError(DistLLLError, ValueError):
    """An argument is outside the range an operation accepts."""


class CapacityError(DistLLLError):
    """An enumeration or search cap was exceeded."""


class IncompleteAssignmentError(DistLLLError):
    """A complete assignment was required but some variable is unset."""


class InfeasibleComponentError(DistLLLError):
    """Exhaustive search found no valid assignment for a component."""

    def __init__(self, message, component=None):
        super().__init__(message)
        self.component = component


class NonconvergenceError(DistLLLError):
    """An iterative procedure hit its iteration or retry cap."""


class ValidationError(DistLLLError):
    """A structure failed an exact validity check."""


class VerificationError(DistLLLError):
    """An algorithm produced output that failed its verifier."""
