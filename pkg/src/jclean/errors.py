"""Exception types shared across the package."""


class JCleanError(Exception):
    """Base class for all package errors."""


class RingConstructionError(JCleanError, ValueError):
    """A ring spec violates one of its structural constraints."""


class HypothesisError(JCleanError):
    """An operation was called outside the hypotheses it is valid under."""


class CapExceeded(JCleanError):
    """An exhaustive computation would exceed a configured size cap."""

    def __init__(self, what: str, size: int, cap: int):
        super().__init__(f"{what}: size {size} exceeds cap {cap}")
        self.what = what
        self.size = size
        self.cap = cap


class TheoremViolation(JCleanError):
    """An existence claim failed under its stated hypotheses."""
