"""Exception hierarchy shared across modules."""


class LatKPPError(Exception):
    """Base class for all package errors."""


class DomainError(LatKPPError, ValueError):
    """An argument lies outside the domain of the operation."""


class ConvergenceError(LatKPPError, RuntimeError):
    """An iterative method did not reach its tolerance.

    ``data`` carries whatever partial results were produced.
    """

    def __init__(self, msg, data=None):
        super().__init__(msg)
        self.data = data


class TruncationError(LatKPPError, RuntimeError):
    """A finite window loses more mass than the stated tolerance."""


class IntegratorError(LatKPPError, RuntimeError):
    """The time integrator left the invariant region."""

    def __init__(self, msg, index=None, time=None):
        super().__init__(msg)
        self.index = index
        self.time = time


class ConstructionError(LatKPPError, RuntimeError):
    """A front construction violated its squeeze bounds."""


class ConfigError(LatKPPError, ValueError):
    """An experiment configuration failed validation."""

    def __init__(self, field, msg):
        super().__init__(f"{field}: {msg}")
        self.field = field
