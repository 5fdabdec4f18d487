"""
Error hierarchy of the toolkit. Every error carries the exit code the command line front end
returns when the error reaches it (0 success, 2 no solution, 3 invalid configuration,
4 numerical failure).

Author: Prior-Saturation Toolkit developers
Version: 1.0
"""

# Global variables----------------------------------------------
EXIT_SUCCESS = 0
EXIT_NO_SOLUTION = 2
EXIT_INVALID_CONFIG = 3
EXIT_NUMERICAL_FAILURE = 4


# Classes ------------------------------------------------------
class SaturationToolkitError(Exception):
    """
    Base class of all toolkit errors
    """
    exit_code = EXIT_NUMERICAL_FAILURE


# Configuration errors
class InvalidConfig(SaturationToolkitError, ValueError):
    exit_code = EXIT_INVALID_CONFIG


class ParamInvariantViolated(InvalidConfig):
    pass


class ComplexBeta(InvalidConfig):
    pass


# Geometry and evaluation errors
class DomainError(SaturationToolkitError, ValueError):
    pass


class DerivativeUnavailable(SaturationToolkitError, RuntimeError):
    pass


class CollinearityDegenerate(SaturationToolkitError, ArithmeticError):
    pass


class LegendreDegenerate(SaturationToolkitError, ArithmeticError):
    pass


class DegenerateDirection(SaturationToolkitError, ArithmeticError):
    pass


class NotSubmersion(SaturationToolkitError, ArithmeticError):
    pass


# Integration errors
class IntegrationFailure(SaturationToolkitError, RuntimeError):
    pass


class DomainExit(IntegrationFailure):
    pass


class OutOfSpan(SaturationToolkitError, ValueError):
    pass


# Solver errors
class MaxIterations(SaturationToolkitError, RuntimeError):
    exit_code = EXIT_NO_SOLUTION


class LineSearchStall(SaturationToolkitError, RuntimeError):
    exit_code = EXIT_NO_SOLUTION


class SingularJacobian(SaturationToolkitError, ArithmeticError):
    pass


class NoBracket(SaturationToolkitError, ValueError):
    exit_code = EXIT_NO_SOLUTION


class CorrectorDiverged(SaturationToolkitError, RuntimeError):
    pass


class AssumptionViolated(SaturationToolkitError, RuntimeError):
    pass


# Synthesis errors
class EventNotFound(SaturationToolkitError, RuntimeError):
    exit_code = EXIT_NO_SOLUTION


class SingularInadmissible(SaturationToolkitError, RuntimeError):
    pass


class ChainBroken(SaturationToolkitError, RuntimeError):
    pass


class Unclassified(SaturationToolkitError, ValueError):
    exit_code = EXIT_NO_SOLUTION


# Warnings
class NonMonotone(UserWarning):
    """
    Sampled singular feedback along a locus parametrization is not monotone
    """
