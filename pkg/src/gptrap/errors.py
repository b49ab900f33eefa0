"""Exception types shared across the package."""
from __future__ import annotations


class GptrapError(Exception):
    """Base class for all package errors."""


class DomainError(GptrapError):
    """Inputs outside the admissible domain (bad grid, bad radius, bad kind)."""


class NormalizationError(GptrapError):
    """A wave field does not carry the particle number it claims."""


class ConvergenceError(GptrapError):
    """An iterative solve ran out of iterations before reaching tolerance."""


class ScatteringRegimeError(GptrapError):
    """The zero-energy solution left the regime where a scattering length
    is defined (bound state forming, non-positive solution)."""


class TruncationToleranceError(GptrapError):
    """The truncation certificate exceeds the requested tolerance.

    Carries the smallest cutoff radius that would meet the tolerance,
    when one can be computed, in ``suggested_r_max``.
    """

    def __init__(self, message: str, suggested_r_max: float | None = None):
        super().__init__(message)
        self.suggested_r_max = suggested_r_max


class PreconditionError(GptrapError):
    """A certified formula was called outside its hypotheses
    (dilute-regime precondition violated, vacuous bound)."""


class ConfigError(GptrapError):
    """Malformed or unknown configuration input."""
