"""Exception hierarchy shared across the package."""


class SerreError(Exception):
    """Base class for all package errors."""


class ConfigurationError(SerreError, ValueError):
    """Invalid user-supplied parameter (degree, domain, wave speed, ...)."""


class ContractError(SerreError, ValueError):
    """Arguments with inconsistent shapes or sizes."""


class AssemblyError(SerreError, RuntimeError):
    """The implicit velocity matrix could not be factorized."""


class DivergenceError(SerreError, RuntimeError):
    """The time integration produced non-finite or exploding values."""

    def __init__(self, message: str, step: int) -> None:
        super().__init__(message)
        self.step = step
