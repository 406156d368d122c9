"""Exception types shared across the package."""


class AdlError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatchError(AdlError, ValueError):
    """An operator or vector was applied to data of the wrong shape."""


class StepSizeError(AdlError, ValueError):
    """Solver step-size parameters violate their convergence condition."""


class DivergenceError(AdlError, RuntimeError):
    """An iterate became nonfinite, usually from invalid parameters."""


class ConfigError(AdlError, ValueError):
    """A run configuration is malformed or inconsistent."""


class FileFormatError(AdlError, ValueError):
    """A data file does not match the expected on-disk format."""
