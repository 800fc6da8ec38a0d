"""
Exception types shared by every kinopt module.

Argument problems are ValueErrors, numerical breakdown is an ArithmeticError,
runaway integrations are RuntimeErrors; the CLI maps them to exit codes.
"""
from contextlib import contextmanager

import numpy as np


class CorpusError(ValueError):
    pass


class PreconditionError(ValueError):
    pass


class UnsupportedComparisonError(ValueError):
    pass


class NumericError(ArithmeticError):
    pass


class DivergenceError(RuntimeError):

    def __init__(self, message: str, last_valid_step: int = None,
                 last_valid_time: float = None):
        super().__init__(message)
        self.last_valid_step = last_valid_step
        self.last_valid_time = last_valid_time


def require_finite(label: str, *arrays):
    """Raises NumericError unless every entry of every array is finite."""

    for array in arrays:
        if not np.all(np.isfinite(array)):
            raise NumericError(f"{label} left finite range")


@contextmanager
def step_guard(label: str, last_valid_step: int, last_valid_time: float):
    """
    Wraps one iteration of a driver loop: numerical breakdown inside it
    surfaces as a DivergenceError carrying the last step whose state was finite.
    """
    try:
        yield
    except NumericError as err:
        raise DivergenceError(f"{label}: {err}", last_valid_step=last_valid_step,
                              last_valid_time=last_valid_time) from err
