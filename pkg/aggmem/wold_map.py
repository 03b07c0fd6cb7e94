"""
Moving-average <-> autoregressive coefficients of the limit aggregate.

a_1 = u_1 and a_{k+1} = u_{k+1} - sum_{r=1}^{k} a_r u_{k+1-r}, which is the
coefficient form of a(z) = m(z) / (1 + m(z)).
"""
import logging
import math
from typing import Optional, Sequence, Union

import numpy as np

from aggmem import densities
from aggmem.errors import DegenerateDistributionError, DomainError
from aggmem.results import ARCoefficients, CrossSectionMoments, MomentSequence
from aggmem.schemas import DistributionSpec, MemoryClass, PersistenceReport, is_generic
from aggmem.summation import compensated_cumsum, exact_dot

logger = logging.getLogger("aggmem.wold_map")

DEFAULT_ORDER = 200
LONG_ORDER = 5000


def ar_from_ma(u: MomentSequence) -> ARCoefficients:
    """
    AR coefficients from the moment sequence, O(K^2).

    The inner convolution is summed with correct rounding (fsum).
    """
    values = np.asarray(u.u, dtype=float)
    K = len(values) - 1
    if K < 1:
        raise DomainError("moment sequence needs K >= 1")

    a = np.zeros(K)
    a[0] = values[1]
    for k in range(1, K):
        # a_{k+1} = u_{k+1} - sum_{r=1}^{k} a_r u_{k+1-r}
        a[k] = values[k + 1] - exact_dot(a[:k], values[k:0:-1])

    return ARCoefficients(a=a, partial_sums=compensated_cumsum(a), source=u)


def ma_from_ar(a: Union[ARCoefficients, Sequence[float]]) -> MomentSequence:
    """Inverse map: u_{k+1} = a_{k+1} + sum_{r=1}^{k} a_r u_{k+1-r}"""
    coeffs = np.asarray(a.a if isinstance(a, ARCoefficients) else a, dtype=float)
    K = len(coeffs)
    if K < 1:
        raise DomainError("AR coefficients need K >= 1")

    u = np.zeros(K + 1)
    u[0] = 1.0
    u[1] = coeffs[0]
    for k in range(1, K):
        u[k + 1] = coeffs[k] + exact_dot(coeffs[:k], u[k:0:-1])

    return MomentSequence(u=u, exactness="recurrence")


def ar_coefficients(spec: DistributionSpec, K: int = DEFAULT_ORDER) -> ARCoefficients:
    """AR coefficients of a spec up to order K"""
    return ar_from_ma(densities.moments(spec, K))


def random_ar_recurrence(phi_draws: np.ndarray, K: int) -> np.ndarray:
    """
    Empirical a_k from the random recurrence A_1 = phi, A_{k+1} = (A_k - a_k) phi.

    a_k is the cross-sectional mean of A_k over the draws, so with draws from
    mu this converges to the coefficients of ar_from_ma.
    """
    phi = np.asarray(phi_draws, dtype=float)
    if phi.size == 0:
        raise DomainError("need at least one draw")
    if K < 1:
        raise DomainError(f"order must be >= 1, got {K}")

    a = np.zeros(K)
    A = phi.copy()
    for k in range(K):
        a[k] = math.fsum(A) / phi.size
        A = (A - a[k]) * phi
    return a


def persistence(spec: DistributionSpec) -> float:
    """
    a(1) = sum_k a_k.

    Short memory: 1 - 1/E[1/(1-phi)]; long memory: exactly 1.
    """
    if spec.family == "beta":
        p, q = spec.p, spec.q
        return p / (p + q - 1.0) if q > 1 else 1.0
    if spec.family == "uniform":
        return 1.0
    if spec.family == "dirac":
        return float(spec.phi0)

    gap = densities.mean_inverse_gap(spec)
    if math.isinf(gap):
        return 1.0
    return 1.0 - 1.0 / gap


def persistence_report(spec: DistributionSpec) -> PersistenceReport:
    """Persistence with memory class and the method used"""
    value = persistence(spec)
    klass = densities.memory_class(spec)
    if klass == MemoryClass.LONG:
        method = "long-memory unit root"
    elif is_generic(spec):
        method = "quadrature E[1/(1-phi)]"
    else:
        method = "closed form"
    return PersistenceReport(spec=spec, a1_limit=value, memory_class=klass, method=method)


def partial_sum_trajectory(a: ARCoefficients) -> np.ndarray:
    """S_K = a_1 + ... + a_K for K = 1..len(a)"""
    return np.array(a.partial_sums, copy=True)


def disaggregate_moments(a1: float, a2: float, a3: Optional[float] = None,
                         a4: Optional[float] = None) -> CrossSectionMoments:
    """
    Mean, variance, skewness and kurtosis of phi from a_1..a_4.

    Raises DegenerateDistributionError when a2 <= 0; the error still carries
    the mean.
    """
    if a2 <= 0:
        raise DegenerateDistributionError(
            f"a_2 = {a2!r} <= 0: the cross-sectional law is degenerate",
            mean=float(a1), variance=float(a2),
        )
    if a3 is None or a4 is None:
        raise DomainError("skewness and kurtosis need a_3 and a_4")

    skewness = (a3 - a1 * a2) / a2 ** 1.5
    kurtosis = math.fsum([a4, -2.0 * a1 * a3, a1 * a1 * a2, a2 * a2]) / (a2 * a2)
    return CrossSectionMoments(mean=float(a1), variance=float(a2),
                               skewness=float(skewness), kurtosis=float(kurtosis))


def cesaro_weighted(a: ARCoefficients, n: int) -> float:
    """(1/n) sum_{k<=n} k |a_k|; tends to 0 (Tauberian condition)"""
    if n < 1 or n > a.K:
        raise DomainError(f"order n must lie in 1..{a.K}, got {n}")
    k = np.arange(1, n + 1, dtype=float)
    return math.fsum(k * np.abs(a.a[:n])) / n
