"""Exception hierarchy. The CLI maps these onto process exit codes."""


class BrownRegError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(BrownRegError, ValueError):
    """Invalid experiment configuration, flag value or API usage."""


class UsageError(ConfigError):
    """An operation was called with arguments that violate its preconditions."""


class NumericFailure(BrownRegError, ArithmeticError):
    """A numerical routine could not produce a valid result."""


class DecompositionError(NumericFailure):
    """A dense eigenvalue or singular value decomposition did not converge."""


class DomainError(NumericFailure, ValueError):
    """Input lies outside the mathematical domain of a formula."""


class FlowError(NumericFailure):
    """The singular-value flow integrator could not advance.

    ``state`` holds the last valid flow state when available.
    """

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class IngestionError(BrownRegError, OSError):
    """A matrix file is missing or malformed.

    ``line`` and ``column`` are 1-based positions when known.
    """

    def __init__(self, message, path=None, line=None, column=None):
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
                if column is not None:
                    where += f":{column}"
            where += ": "
        super().__init__(where + message)
        self.path = path
        self.line = line
        self.column = column


class ScheduleError(ConfigError, LookupError):
    """An explicit regularization schedule has no entry for the requested ``n``."""


class FidelityWarning(UserWarning):
    """The regularization is smaller than the eigensolver's backward error."""
