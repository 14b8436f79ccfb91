"""Errors raised by the pointwise calibration checks."""

from exterior_algebra import DomainError


class FrameError(DomainError):
    """A frame or complex structure does not meet its precondition."""
