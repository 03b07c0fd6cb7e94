"""
Mixing distributions on [0, 1) and their noncentral moment sequences.

Closed forms are used for Beta, Uniform, Polynomial and Dirac laws; generic
bounded densities go through fixed-order Gauss-Legendre quadrature.
"""
import logging
import math
from typing import Callable, Sequence, Tuple

import numpy as np
from numpy.polynomial import legendre
from numpy.polynomial import polynomial as P

from aggmem import thresholds
from aggmem.errors import DomainError, IndeterminateError, NumericalIntegrityError
from aggmem.results import MomentSequence
from aggmem.schemas import DistributionSpec, MemoryClass, PolynomialSpec

logger = logging.getLogger("aggmem.densities")


def _check_order(K: int) -> int:
    if int(K) != K or K < 1:
        raise DomainError(f"truncation order K must be an integer >= 1, got {K!r}")
    return int(K)


def _enforce_monotone(u: np.ndarray, slack: float) -> np.ndarray:
    """
    Make 1 = u_0 >= u_1 >= ... >= u_K >= 0 hold exactly as stored.

    Violations within `slack` are rounding and get clamped; anything larger
    means the computation is wrong.
    """
    u = np.array(u, dtype=float)
    for k in range(1, len(u)):
        if u[k] > u[k - 1]:
            if u[k] - u[k - 1] > slack:
                raise NumericalIntegrityError(
                    f"moment sequence increases at k={k}: u_{k}={u[k]!r} > u_{k - 1}={u[k - 1]!r}"
                )
            u[k] = u[k - 1]
        if u[k] < 0:
            if u[k] < -slack:
                raise NumericalIntegrityError(f"negative moment u_{k}={u[k]!r}")
            u[k] = 0.0
    return u


def vectorize_density(density: Callable) -> Callable[[np.ndarray], np.ndarray]:
    """Wrap a density so that it accepts and returns arrays"""
    def f(x):
        x = np.asarray(x, dtype=float)
        try:
            y = np.asarray(density(x), dtype=float)
            if y.shape == x.shape:
                return y
        except (TypeError, ValueError):
            pass
        return np.array([float(density(t)) for t in x.ravel()]).reshape(x.shape)
    return f


# ---------------------------------------------------------------------------
# Moment sequences

def beta_moments(p: float, q: float, K: int) -> MomentSequence:
    """
    Moments of Beta(p, q) by u_{k+1} = u_k (p+k)/(p+q+k).

    No quadrature: the (1-x)^(q-1) endpoint singularity never enters.
    """
    K = _check_order(K)
    if not (p > 0 and q > 0):
        raise DomainError(f"Beta parameters must be positive, got p={p!r}, q={q!r}")

    k = np.arange(K + 1, dtype=float)
    if q == 1:
        # the product telescopes to p/(p+k)
        u = p / (p + k)
    else:
        ratios = (p + k[:-1]) / (p + q + k[:-1])
        u = np.concatenate(([1.0], np.cumprod(ratios)))
    return MomentSequence(u=u, exactness="closed-form")


def uniform_moments(K: int) -> MomentSequence:
    """Moments of the uniform law, u_k = 1/(k+1)"""
    K = _check_order(K)
    return MomentSequence(u=1.0 / (1.0 + np.arange(K + 1, dtype=float)), exactness="closed-form")


def poly_moments(coeffs: Sequence[float], K: int) -> MomentSequence:
    """Moments of the polynomial density sum c_s x^s: u_k = sum_s c_s/(s+k+1)"""
    K = _check_order(K)
    spec = PolynomialSpec(c=list(coeffs))

    c = np.asarray(spec.c, dtype=float)
    s = np.arange(len(c), dtype=float)
    u = np.array([math.fsum(c / (s + k + 1.0)) for k in range(K + 1)])
    u[0] = 1.0
    return MomentSequence(u=_enforce_monotone(u, thresholds.CLOSED_FORM_TOL), exactness="closed-form")


def dirac_moments(phi0: float, K: int) -> MomentSequence:
    """Moments of a point mass, u_k = phi0^k"""
    K = _check_order(K)
    if not (0 <= phi0 < 1):
        raise DomainError(f"Dirac location must lie in [0, 1), got {phi0!r}")
    u = np.concatenate(([1.0], np.cumprod(np.full(K, float(phi0)))))
    return MomentSequence(u=u, exactness="closed-form")


def _gauss_legendre_panels(order: int, edges: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of composite Gauss-Legendre on the given panels"""
    t, w = legendre.leggauss(order)
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = (hi - lo) / 2.0
        nodes.append(lo + half * (t + 1.0))
        weights.append(half * w)
    return np.concatenate(nodes), np.concatenate(weights)


def _quadrature_moments(f: Callable, K: int, edges: Sequence[float]) -> np.ndarray:
    x, w = _gauss_legendre_panels(thresholds.GENERIC_QUADRATURE_ORDER, edges)
    fw = w * f(x)
    powers = np.power.outer(x, np.arange(K + 1, dtype=float))
    raw = fw @ powers
    return raw / raw[0]


def generic_moments(density: Callable, K: int) -> MomentSequence:
    """
    Moments of a bounded density by Gauss-Legendre quadrature of order 128.

    The single-panel rule is refined once by halving [0, 1]; the refined values
    are returned and the difference is kept as the error estimate.
    """
    K = _check_order(K)
    f = vectorize_density(density)

    coarse = _quadrature_moments(f, K, (0.0, 1.0))
    fine = _quadrature_moments(f, K, (0.0, 0.5, 1.0))
    error = float(np.max(np.abs(fine - coarse)))
    if error > thresholds.QUADRATURE_TOL:
        logger.debug("quadrature refinement changed moments by %.3g", error)

    u = _enforce_monotone(fine, thresholds.MONOTONE_SLACK)
    u[0] = 1.0
    return MomentSequence(u=u, exactness="quadrature", quadrature_error=error)


def moments(spec: DistributionSpec, K: int) -> MomentSequence:
    """Moment sequence of any spec"""
    if spec.family == "beta":
        return beta_moments(spec.p, spec.q, K)
    if spec.family == "uniform":
        return uniform_moments(K)
    if spec.family == "polynomial":
        return poly_moments(spec.c, K)
    if spec.family == "dirac":
        return dirac_moments(spec.phi0, K)
    return generic_moments(spec.density, K)


# ---------------------------------------------------------------------------
# Short vs. long memory

def polynomial_diagonal_sums(coeffs: Sequence[float], K: int) -> Tuple[float, float, float]:
    """
    Split S(K) = sum_{k<=K} u_k of a polynomial density into diagonal sums.

    S1 is independent of K, S2 = f(1) * sum_{n=d+1}^{K} 1/(n+1) carries any
    divergence, and S3 vanishes as K grows. Requires K > d.
    """
    c = list(PolynomialSpec(c=list(coeffs)).c)
    d = len(c) - 1
    if K <= d:
        raise DomainError(f"diagonal split needs K > degree ({K} <= {d})")

    prefix = np.cumsum(c)
    s1 = math.fsum(prefix[n] / (n + 1) for n in range(d + 1))
    s2 = math.fsum(c) * math.fsum(1.0 / (n + 1) for n in range(d + 1, K + 1))
    s3 = math.fsum(math.fsum(c[n - K:]) / (n + 1) for n in range(K + 1, d + K + 1))
    return s1, s2, s3


def beta_generating_limit(p: float, q: float) -> float:
    """lim_{r->1} (1 + m(r)) for Beta(p, q): 1 + p/(q-1) if q > 1, else +inf"""
    if not (p > 0 and q > 0):
        raise DomainError(f"Beta parameters must be positive, got p={p!r}, q={q!r}")
    return 1.0 + p / (q - 1.0) if q > 1 else math.inf


def _polynomial_vanishes_at_one(spec: PolynomialSpec) -> bool:
    return abs(spec.f1) <= thresholds.POLY_F1_ZERO_TOL


def _generic_inverse_gap(density: Callable) -> float:
    """
    E[1/(1-phi)] for a generic density, or +inf when the integral diverges.

    Integrals truncated at 1 - 2^-j are built from dyadic segments in the
    variable y = 1 - x so that the gap is never formed by cancellation.
    """
    f = vectorize_density(density)
    lo_level, hi_level = thresholds.DIVERGENCE_LEVELS
    t, w = legendre.leggauss(64)

    segments = []
    for j in range(1, hi_level + 1):
        # y in [2^-j, 2^-(j-1)]
        y_lo, y_hi = 2.0 ** -j, 2.0 ** -(j - 1)
        half = (y_hi - y_lo) / 2.0
        y = y_lo + half * (t + 1.0)
        segments.append(math.fsum(half * w * f(1.0 - y) / y))
    cumulative = np.cumsum(segments)

    def level(j: int) -> float:
        return float(cumulative[j - 1])

    window = thresholds.DIVERGENCE_WINDOW
    i_hi = level(hi_level)
    late = level(hi_level) - level(hi_level - window)
    early = level(lo_level + window) - level(lo_level)

    if late <= thresholds.DIVERGENCE_CONVERGED_TOL * max(1.0, i_hi):
        return i_hi
    if early > 0 and late <= thresholds.DIVERGENCE_DECAY_RATIO * early:
        # geometric per-level decay; add the tail beyond the last level
        rho = (late / early) ** (1.0 / (hi_level - window - lo_level))
        return i_hi + segments[-1] * rho / (1.0 - rho)
    if late >= early / thresholds.DIVERGENCE_GROWTH_FACTOR:
        logger.info("E[1/(1-phi)] diverges: per-level growth %.3g does not decay", late / window)
        return math.inf

    logger.info("E[1/(1-phi)] indeterminate: late growth %.3g, early growth %.3g", late, early)
    raise IndeterminateError(
        f"cannot decide divergence of E[1/(1-phi)]: growth {late:.3g} over levels "
        f"{hi_level - window}..{hi_level} vs {early:.3g} over {lo_level}..{lo_level + window}"
    )


def mean_inverse_gap(spec: DistributionSpec) -> float:
    """
    E[1/(1-phi)]; +inf signals long memory.

    Raises IndeterminateError for generic densities whose divergence cannot
    be resolved.
    """
    if spec.family == "beta":
        return beta_generating_limit(spec.p, spec.q)
    if spec.family == "uniform":
        return math.inf
    if spec.family == "dirac":
        return 1.0 / (1.0 - spec.phi0)
    if spec.family == "polynomial":
        if not _polynomial_vanishes_at_one(spec):
            return math.inf
        s1, _, _ = polynomial_diagonal_sums(spec.c, len(spec.c))
        return s1
    return _generic_inverse_gap(spec.density)


def mean_ratio_gap(spec: DistributionSpec) -> float:
    """
    E[phi/(1-phi)], computed by a route independent of mean_inverse_gap.

    Polynomial densities with f(1) = 0 factor as (1-x) g(x); the expectation
    is then the polynomial integral of x g(x).
    """
    if spec.family == "beta":
        return spec.p / (spec.q - 1.0) if spec.q > 1 else math.inf
    if spec.family == "uniform":
        return math.inf
    if spec.family == "dirac":
        return spec.phi0 / (1.0 - spec.phi0)
    if spec.family == "polynomial":
        if not _polynomial_vanishes_at_one(spec):
            return math.inf
        g, _ = P.polydiv(spec.c, [1.0, -1.0])
        return math.fsum(gs / (s + 2) for s, gs in enumerate(np.atleast_1d(g)))
    gap = _generic_inverse_gap(spec.density)
    return gap - 1.0 if math.isfinite(gap) else math.inf


def memory_class(spec: DistributionSpec) -> MemoryClass:
    """Long memory iff E[1/(1-phi)] = +inf"""
    gap = mean_inverse_gap(spec)
    return MemoryClass.LONG if math.isinf(gap) else MemoryClass.SHORT
