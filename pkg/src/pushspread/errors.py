"""Exception types shared across the package."""


class InputError(ValueError):
    """Invalid argument: out-of-range vertex, overlapping sets, odd clone count."""


class DomainError(ValueError):
    """Argument outside the mathematical domain of a formula."""


class StateError(RuntimeError):
    """Operation not valid for the object's current state (e.g. incomplete matching)."""


class SamplingError(RuntimeError):
    """Rejection sampling gave up."""

    def __init__(self, message, attempts):
        super().__init__(message)
        self.attempts = attempts


class CapacityError(RuntimeError):
    """Problem too large for the requested exact method."""


class DivergenceError(RuntimeError):
    """Deterministic recursion did not reach its stopping condition within the horizon."""
