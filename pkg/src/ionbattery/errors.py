"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid run configuration. Carries the offending key when known."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class HermiticityError(ValueError):
    """An operator flagged Hermitian failed verification."""


class NumericalConsistencyError(ValueError):
    """A quantity that must be real/physical came out outside tolerance."""


class PropagationError(RuntimeError):
    """Time propagation could not reach the requested accuracy."""
