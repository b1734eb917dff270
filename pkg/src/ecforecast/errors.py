"""Exception types raised across the package."""


class ForecastError(Exception):
    """Base class for all package errors."""


class InvalidRangeError(ForecastError, ValueError):
    pass


class InvalidCutError(ForecastError, ValueError):
    pass


class InsufficientDataError(ForecastError, ValueError):
    pass


class DegenerateError(ForecastError, ValueError):
    """Input has no variation where the computation needs some."""


class DomainError(ForecastError, ValueError):
    pass


class ConfigurationError(ForecastError, ValueError):
    pass


class FitFailureError(ForecastError, RuntimeError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class FormatError(ForecastError, ValueError):
    """Input file is structurally unusable (e.g. missing columns)."""


class ParseError(ForecastError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ArtifactVersionError(ForecastError):
    pass


class IntegrityError(ForecastError):
    pass
