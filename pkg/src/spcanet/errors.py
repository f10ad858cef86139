"""Exception types raised across the package."""


class ContractViolation(ValueError):
    """An argument broke an operation's preconditions."""


class NumericalFailure(RuntimeError):
    """A numerical routine failed to converge or produced non-finite output."""

    def __init__(self, message, shape=None):
        if shape is not None:
            message = f"{message} (input shape {shape[0]}x{shape[1]})"
        super().__init__(message)
        self.shape = shape


class ParseError(ValueError):
    """A data, label, model or config file could not be parsed."""
