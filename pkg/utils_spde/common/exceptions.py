# Copyright (c) SPDE Lab contributors. All rights reserved.
# Licensed under the MIT License.

"""Exception hierarchy shared by all modules, with the exit code the CLI maps each to."""


class SpdeLabError(Exception):
    """Base class of every error raised on purpose by this package."""

    exit_code = 1


class InvalidArgument(SpdeLabError, ValueError):
    """An argument is outside the documented range of an operation."""

    exit_code = 2


class ConfigInvalid(InvalidArgument):
    """An experiment configuration violates one of its invariants."""


class DomainError(SpdeLabError, ValueError):
    """An evaluation was requested outside the trusted domain (e.g. t < t_min)."""

    exit_code = 2


class InvalidGrid(SpdeLabError, ValueError):
    """A time grid cannot carry the requested quadrature."""

    exit_code = 2


class NumericFailure(SpdeLabError, ArithmeticError):
    """A numerical routine failed (eigensolver, factorization, iteration)."""

    exit_code = 3


class BlowUpDetected(NumericFailure):
    """A simulated state became non-finite.

    Args:
        path_ids (list, optional): Identifiers of the affected paths.
    """

    def __init__(self, message, path_ids=None):
        super(BlowUpDetected, self).__init__(message)
        self.path_ids = list(path_ids) if path_ids is not None else []


class SeriesOverflow(NumericFailure, OverflowError):
    """A series or special function left the floating-point range."""


class FitUndefined(NumericFailure):
    """A regression cannot be formed from the supplied data."""


class PropertyViolation(SpdeLabError):
    """A certified property or structural invariant does not hold."""

    exit_code = 4


def exit_code_for(error):
    """Returns the process exit code for an exception.

    Args:
        error (Exception): The exception that ended a run.

    Returns:
        int: 0 is never returned; package errors map through `exit_code`, anything
            else is 1.
    """
    return getattr(error, "exit_code", 1)
