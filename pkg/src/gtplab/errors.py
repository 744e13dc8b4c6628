"""Exception hierarchy shared by all gtplab modules."""


class GtpError(Exception):
    """Base class for library errors."""


class ConfigurationError(GtpError, ValueError):
    """Invalid configuration: precision mismatch, bad parameter, bad file."""


class DomainError(GtpError, ValueError):
    """Operation undefined for the given input (e.g. composition with a constant term)."""


class ResonanceError(GtpError, ArithmeticError):
    """A linear denominator fell below the resonance threshold."""

    def __init__(self, msg, index=None, magnitude=None):
        super().__init__(msg)
        self.index = index
        self.magnitude = magnitude


class DegenerateError(GtpError, ArithmeticError):
    """A required nondegeneracy condition fails (q2 = 0, K = 0, ...)."""


class ConsistencyError(GtpError, RuntimeError):
    """Internal-consistency check failed (e.g. symmetric residual did not vanish)."""
