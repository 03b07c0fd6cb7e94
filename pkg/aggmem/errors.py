"""
Typed errors raised by aggmem.

Every error carries an exit code used by the CLI: 1 for domain errors
(bad input), 2 for numerical-integrity problems.
"""
from typing import Any, List, Optional


class AggregationError(Exception):
    """Base class for all aggmem errors"""
    exit_code = 1

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class DomainError(AggregationError, ValueError):
    """Input outside the domain of an operation"""
    exit_code = 1


class SpecValidationError(DomainError):
    """A distribution spec violates one of its invariants"""

    def __init__(self, detail: str, invariant: Optional[str] = None):
        super().__init__(detail)
        self.invariant = invariant


class PoleError(DomainError):
    """Evaluation requested at z = 1, where only limits are defined"""


class MethodDomainError(DomainError):
    """Evaluation method cannot be used at the requested point"""


class UnsupportedEvaluationError(DomainError):
    """The family does not support evaluation at the requested point"""


class DegenerateDistributionError(DomainError):
    """
    Higher cross-sectional moments requested for a degenerate law (a2 <= 0).

    The mean is still available on the error.
    """

    def __init__(self, detail: str, mean: float, variance: float):
        super().__init__(detail)
        self.mean = mean
        self.variance = variance


class ConstantPathError(DomainError):
    """Autocorrelation requested for a constant path"""


class NumericalIntegrityError(AggregationError, ArithmeticError):
    """A computed quantity violates an invariant beyond tolerance"""
    exit_code = 2


class ExtrapolationError(NumericalIntegrityError):
    """Abel table is not monotone or its tail is not Cauchy"""

    def __init__(self, detail: str, table: Optional[List[Any]] = None):
        super().__init__(detail)
        self.table = table or []


class IndeterminateError(AggregationError):
    """Divergence of E[1/(1-phi)] could not be resolved numerically"""
    exit_code = 2


class SquareSummabilityWarning(UserWarning):
    """Sum of squared moments diverges; the L2 aggregate limit is not guaranteed"""
