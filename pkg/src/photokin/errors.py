"""Exception types raised across the package."""


class PhotokinError(Exception):
    """Base class for all package errors."""


class DomainError(PhotokinError, ValueError):
    """An argument lies outside the domain of a model function."""


class ConfigError(PhotokinError, ValueError):
    """A problem or run configuration could not be parsed."""


class ValidationError(PhotokinError, ValueError):
    """A problem violates one of the model assumptions."""


class GridError(PhotokinError, ValueError):
    """Mesh sizes are inconsistent with the problem domain or with each other."""


class SchemeError(PhotokinError, RuntimeError):
    """A time stepper received input that its guarantees rule out."""


class ConvergenceError(PhotokinError, RuntimeError):
    """The nonlinear solver failed; ``report`` carries the diagnostics."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
