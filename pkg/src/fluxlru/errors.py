"""Exception types raised across the package."""


class FluxLRUError(Exception):
    """Base class for all package errors."""


class ConfigError(FluxLRUError, ValueError):
    pass


class DimensionError(FluxLRUError, ValueError):
    pass


class ConvergenceError(FluxLRUError, RuntimeError):
    pass


class LabelingError(FluxLRUError, RuntimeError):
    pass


class StepTooLarge(FluxLRUError, ValueError):
    pass


class WindowEmpty(FluxLRUError, ValueError):
    pass


class OutOfRange(FluxLRUError, ValueError):
    pass


class StepInstability(FluxLRUError, RuntimeError):
    pass


class NoMinimum(FluxLRUError, RuntimeError):
    pass


class Unphysical(FluxLRUError, ValueError):
    pass


class FitError(FluxLRUError, RuntimeError):
    pass


class NoEvents(FluxLRUError, RuntimeError):
    pass


class DomainError(FluxLRUError, ValueError):
    pass


NUMERICAL_ERRORS = (
    ConvergenceError,
    LabelingError,
    StepInstability,
    NoMinimum,
    FitError,
)
