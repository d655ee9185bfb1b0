"""Exception hierarchy.

Validation errors (bad input, violated preconditions) map to CLI exit
status 1; numerical failures map to exit status 2.
"""

from __future__ import annotations


class SlowEntropyError(Exception):
    """Base class for all library errors."""


class ValidationError(SlowEntropyError, ValueError):
    exit_code = 1


class NumericalError(SlowEntropyError, ArithmeticError):
    exit_code = 2


# action_core
class NonUnimodular(ValidationError):
    pass


class NonCommuting(ValidationError):
    def __init__(self, i: int, j: int):
        self.pair = (i, j)
        super().__init__(f"({i},{j}): generators {i} and {j} do not commute")


class DimensionMismatch(ValidationError):
    pass


class AlreadySuspended(ValidationError):
    pass


class EigenFailure(NumericalError):
    pass


class ToleranceAmbiguity(NumericalError):
    def __init__(self, message: str, groupings=None):
        self.groupings = groupings
        super().__init__(message)


# chambers
class AllZeroSpectrum(ValidationError):
    pass


class RankTooLarge(ValidationError):
    pass


class DegenerateArrangement(NumericalError):
    pass


class ZeroVector(ValidationError):
    pass


class NoSeparatingElement(NumericalError):
    pass


# entropy
class GammaMismatch(ValidationError):
    pass


class BudgetExhausted(NumericalError):
    def __init__(self, message: str, result=None):
        self.result = result
        super().__init__(message)


# bowen
class WraparoundRisk(NumericalError):
    pass


class EmptyWindow(NumericalError):
    pass


class SlackTooLarge(ValidationError):
    pass


class NotPlanarFactorizable(ValidationError):
    pass


class ZeroAcceptance(NumericalError):
    def __init__(self, message: str, upper_bound: float | None = None):
        self.upper_bound = upper_bound
        super().__init__(message)


class GridTooCoarse(ValidationError):
    pass


# cli
class ConfigParse(ValidationError):
    pass


class RankNotTwo(ValidationError):
    pass
