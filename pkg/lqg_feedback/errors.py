# coding: utf-8

"""
Exceptions raised by lqg_feedback.

The command-line entry point maps :class:`ConfigError` to exit code 2,
:class:`NumericalError` to exit code 3 and :class:`OSError` to exit code 4.
"""


class LqgError(Exception):
    """
    Base class for all errors of this package.
    """


class ConfigError(LqgError, ValueError):
    """
    Invalid experiment configuration.

    Args:
        field (str): Name of the offending configuration field.
        message (str): What is wrong with it.
    """

    def __init__(self, field, message):
        super().__init__('{0}: {1}'.format(field, message))
        self.field = field
        self.message = message

    def __reduce__(self):
        return (self.__class__, (self.field, self.message))


class InvalidSystemError(ConfigError):
    """
    A SystemSpec violates one of its invariants.
    """


class NumericalError(LqgError, ArithmeticError):
    """
    Base class for numerical failures.
    """


class InvalidCovarianceError(NumericalError):
    pass


class ConvergenceError(NumericalError):
    pass


class UnstableClosedLoopError(NumericalError):
    pass


class SolverInconsistencyError(NumericalError):
    pass


class HorizonError(NumericalError):
    pass


class NonPositiveMseError(NumericalError):
    pass


class BracketError(NumericalError):
    pass


class IdentityError(NumericalError):
    pass


class InsufficientTrialsError(NumericalError):
    pass


class GridCapacityError(NumericalError):
    pass


class TrialError(NumericalError):
    """
    A Monte Carlo trial failed.

    The original exception is chained as ``__cause__`` and kept in :attr:`cause`.
    """

    def __init__(self, index, cause):
        super().__init__('trial {0}: {1}'.format(index, cause))
        self.index = index
        self.cause = cause

    def __reduce__(self):
        return (self.__class__, (self.index, self.cause))
