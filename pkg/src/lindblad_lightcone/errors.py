"""Exception hierarchy."""


class LightconeError(Exception):
    """Base class for all errors raised by this package."""


class RejectedInputError(LightconeError, ValueError):
    """An argument violates a documented precondition."""


class NumericFailureError(LightconeError, ArithmeticError):
    """A numerical routine failed to reach its documented accuracy."""


class ConfigError(LightconeError):
    """A run configuration failed validation.

    ``errors`` holds every problem found, not only the first one.
    """

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))
