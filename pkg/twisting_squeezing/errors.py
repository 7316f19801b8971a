"""Exception hierarchy shared by the library tools and the CLI commands."""

from typing import Optional


EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_NUMERIC_FAILURE = 3


class TwistingError(Exception):
    """Base class for every error raised by twisting_squeezing."""

    exit_code: int = EXIT_NUMERIC_FAILURE


class ConfigError(TwistingError):
    """Invalid run configuration, detected before any computation."""

    exit_code = EXIT_CONFIG_ERROR


class InvalidParameterError(TwistingError, ValueError):
    """A library function was called outside its preconditions."""

    exit_code = EXIT_CONFIG_ERROR


class NumericError(TwistingError):
    """A numerical procedure failed (non-finite values, failed decomposition)."""

    exit_code = EXIT_NUMERIC_FAILURE


class IntegrationError(NumericError):
    """A time step was rejected by an integrator."""

    def __init__(self, message: str, step: Optional[int] = None):
        if step is not None:
            message = f"{message} (step {step})"
        super().__init__(message)
        self.step = step


class DegenerateSqueezingError(NumericError):
    """The mean spin is too short to define a squeezing direction."""


class ControlError(NumericError):
    """The pole-lock control law has no solution for the current state."""
