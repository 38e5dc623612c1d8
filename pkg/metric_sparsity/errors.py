class MetricSparsityError(Exception):
    """Base class for errors raised by metric_sparsity."""


class InvalidArgumentError(MetricSparsityError, ValueError):
    """A parameter or input object violates an operation's precondition."""


class InstanceTooLargeError(MetricSparsityError):
    """An exhaustive search or construction would exceed its configured size guard."""


class FormatError(MetricSparsityError, ValueError):
    """A graph, decomposition, ladder or instance file could not be parsed."""

    def __init__(self, message: str, path: str = "<input>", line: int = 0):
        self.path = path
        self.line = line
        location = f"{path}:{line}" if line else path
        super().__init__(f"{location}: {message}")
