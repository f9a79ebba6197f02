"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A scenario configuration is malformed or violates an invariant."""


class OutOfDomainError(ValueError):
    """A state query fell outside the grid domain (no extrapolation is done)."""


class NumericalInstabilityError(RuntimeError):
    """A solver sweep produced a non-finite value.

    Attributes:
        node: flat or multi-dimensional index of the first offending node.
    """

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node
