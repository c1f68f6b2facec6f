"""Exception types raised across the package."""


class CechLabError(Exception):
    """Base class for all package errors."""


class InputError(CechLabError, ValueError):
    """Malformed or inconsistent arguments (dimension mismatch, empty input)."""


class DomainError(CechLabError, ValueError):
    """A numeric argument lies outside the range where the operation is defined."""


class PreconditionError(CechLabError, ValueError):
    """A documented precondition on the inputs does not hold."""


class DegenerateInputError(CechLabError, ValueError):
    """Affinely dependent points where general position is required."""


class FitError(CechLabError, ValueError):
    """The least-squares design cannot identify the requested constants."""


class ConfigError(CechLabError, ValueError):
    """Invalid sweep configuration, detected before any sampling happens."""


class MorseEulerViolation(CechLabError, AssertionError):
    """Alternating critical-point count disagrees with the Betti-number Euler characteristic."""
