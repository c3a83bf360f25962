"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class UnsupportedError(ValueError):
    """A parameter combination the requested construction does not cover."""


class NumericalError(RuntimeError):
    """A numerical routine failed to reach its tolerance or a self-check failed."""


class ResourceError(RuntimeError):
    """A simulation exhausted its step budget before reaching the horizon."""

    def __init__(self, message, attained=None):
        super().__init__(message)
        self.attained = attained
