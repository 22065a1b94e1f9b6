"""Exception types shared across the package."""


class LapconvError(Exception):
    """Base class for package errors."""


class DomainError(LapconvError, ValueError):
    """An argument lies outside the domain of the operation."""


class ConfigError(LapconvError, ValueError):
    """Invalid or incomplete configuration."""


class UnsupportedError(LapconvError, NotImplementedError):
    """Operation not available for this kind of space or kernel."""


class DegenerateDegreeError(LapconvError, ArithmeticError):
    """A degree d(x) vanished where a positive degree is required."""


class EssentialSpectrumError(DomainError):
    """Requested eigenvalue lies in the essential spectrum of the operator."""


class IllPosedWindowError(DomainError):
    """An eigenvalue sits on (or too close to) a spectral window boundary."""


class DivergenceError(DomainError):
    """A series bound was requested for a divergent series."""
