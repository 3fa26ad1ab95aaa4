"""
Exception types shared across the lab

The CLI maps ConfigError and RefusedError to exit code 2. Everything else is a bug or a
failed verification.
"""

from typing import Optional


class LabError(Exception):
    """ Base class for all lab errors """


class ConfigError(LabError, ValueError):
    """ Invalid configuration value. `field` is the dotted path of the offending key. """

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class DomainError(LabError, ValueError):
    """ Input outside the mathematical domain of an operation """


class ProtocolError(LabError, RuntimeError):
    """ A learner was driven in an order or with data its contract does not allow """


class RefusedError(LabError, ValueError):
    """ Request outside the parameter ranges a generator or checker supports """

    def __init__(self, message: str, bound: Optional[str]=None):
        super().__init__(message)
        self.bound = bound
