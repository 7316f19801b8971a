"""Shared wrapper turning library exceptions into CommandResult values."""

import functools
import logging
from typing import Callable

from ..errors import EXIT_CONFIG_ERROR, EXIT_NUMERIC_FAILURE, TwistingError
from ..models import CommandResult, RunConfig

logger = logging.getLogger(__name__)

Command = Callable[[RunConfig], CommandResult]


def guarded(name: str) -> Callable[[Command], Command]:
    """Report a failing command as a CommandResult carrying its exit code."""

    def decorate(func: Command) -> Command:
        @functools.wraps(func)
        def wrapper(config: RunConfig) -> CommandResult:
            try:
                return func(config)
            except TwistingError as exc:
                logger.error("%s failed: %s", name, exc)
                return CommandResult(command=name, success=False,
                                     error=f"{name} failed: {exc}", exit_code=exc.exit_code)
            except OSError as exc:
                logger.error("%s could not write its output: %s", name, exc)
                return CommandResult(command=name, success=False,
                                     error=f"{name} failed: {exc}", exit_code=EXIT_CONFIG_ERROR)
            except (ArithmeticError, ValueError) as exc:
                logger.exception("%s failed with an unexpected numeric error", name)
                return CommandResult(command=name, success=False,
                                     error=f"{name} failed: {exc}", exit_code=EXIT_NUMERIC_FAILURE)

        return wrapper

    return decorate
