"""Exception types shared across the laboratory."""


class FuncMartError(Exception):
    """Base class for every error raised by funcmart."""


class DomainViolation(FuncMartError, ValueError):
    """A function was evaluated outside its declared domain."""

    def __init__(self, message, value=None):
        super().__init__(message)
        self.value = value


class ConfigError(FuncMartError, ValueError):
    pass


class DegenerateInput(FuncMartError):
    """The candidate violates a standing premise (e.g. positivity under a log)."""


class InsufficientSamples(FuncMartError):
    pass


class SingularGrid(FuncMartError, ValueError):
    pass
