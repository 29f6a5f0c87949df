"""Exception types shared across the package."""


class ParseError(ValueError):
    """Raised when an input data file cannot be parsed."""


class ConfigError(ValueError):
    """Raised when an experiment configuration is invalid."""


class UnsupportedProblemError(ValueError):
    """Raised when a problem falls outside the supported constraint/penalty forms."""


class DivergenceError(RuntimeError):
    """Raised when a solver iterate becomes non-finite.

    Carries the trace collected up to (not including) the bad iteration.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace if trace is not None else []
