"""
Generating functions m(z) = sum_{k>=1} u_k z^k and a(z) = m(z) / (1 + m(z)) on
the closed unit disc minus {1}.

m is evaluated through its integral representation
m(z) = E[z phi / (1 - z phi)], in closed form where the family allows it.
z = 1 is a pole everywhere except in abel_limit, which only ever reports
a(1) as a limit.
"""
import logging
import math
from fractions import Fraction
from functools import lru_cache
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import polynomial as P
from scipy import integrate, special

from aggmem import densities, thresholds
from aggmem.errors import (
    DomainError,
    ExtrapolationError,
    IndeterminateError,
    MethodDomainError,
    PoleError,
    UnsupportedEvaluationError,
)
from aggmem.results import (
    AbelTable,
    ARCoefficients,
    DiscPoint,
    InjectivityReport,
    MomentSequence,
    SeriesValue,
)
from aggmem.schemas import DistributionSpec, MemoryClass
from aggmem.summation import compensated_cumsum

logger = logging.getLogger("aggmem.complexfn")

DEFAULT_RADII = (0.25, 0.5, 0.75, 0.95, 0.999)
DEFAULT_ANGLES = 720
STIRLING_EXACT_LIMIT = 20

# Below these moduli the power series of the exact moments is used; it
# converges faster than double precision needs and avoids division by z.
_UNIFORM_SERIES_RADIUS = 0.25
_SERIES_RADIUS = 0.5
_SERIES_TERMS = 80
# Polynomial m: tail target of the exact-moment series and the largest
# rounding growth accepted from the forward J recurrence.
_SERIES_TAIL = 1e-17
_RECURRENCE_GROWTH = 1e3
_CHUNK = 256


# ---------------------------------------------------------------------------
# Point handling

def _as_points(z) -> np.ndarray:
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(z == 1):
        raise PoleError("z = 1 is a pole of m; use abel_limit for a(1)")
    if np.any(np.abs(z) > 1.0 + 1e-15):
        raise DomainError("evaluation points must lie in the closed unit disc")
    return z


def _on_boundary(z: np.ndarray) -> np.ndarray:
    return np.abs(z) >= 1.0 - 1e-15


def _series(z: np.ndarray, u: np.ndarray) -> np.ndarray:
    """sum_{k>=1} u_k z^k by Horner, without forming 1 + m"""
    coeffs = np.array(u, dtype=float, copy=True)
    coeffs[0] = 0.0
    return P.polyval(z, coeffs)


def _expect(z: np.ndarray, x: np.ndarray, w: np.ndarray) -> np.ndarray:
    """sum_i w_i z x_i / (1 - z x_i) for every z, in fixed-size chunks"""
    out = np.empty(z.shape, dtype=complex)
    for start in range(0, z.size, _CHUNK):
        zc = z[start:start + _CHUNK, None]
        zx = zc * x[None, :]
        out[start:start + _CHUNK] = (zx / (1.0 - zx)) @ w
    return out


# ---------------------------------------------------------------------------
# Family evaluators (vectorized)

def _m_dirac(phi0: float, z: np.ndarray) -> np.ndarray:
    w = phi0 * z
    return w / (1.0 - w)


def _m_uniform(z: np.ndarray) -> np.ndarray:
    # 1 + m(z) = -log(1 - z) / z
    out = np.empty(z.shape, dtype=complex)
    small = np.abs(z) < _UNIFORM_SERIES_RADIUS
    if small.any():
        out[small] = _series(z[small], densities.uniform_moments(40).u)
    if (~small).any():
        zl = z[~small]
        out[~small] = -np.log(1.0 - zl) / zl - 1.0
    return out


def _m_polynomial(c: Sequence[float], z: np.ndarray) -> np.ndarray:
    # 1 + m(z) = sum_s c_s J_s(z), J_s = int_0^1 x^s / (1 - z x) dx
    out = np.empty(z.shape, dtype=complex)
    degree = len(c) - 1
    modulus = np.abs(z)
    # the forward J recurrence amplifies rounding by |z|^-degree
    series = (modulus < _SERIES_RADIUS) | (modulus ** degree * _RECURRENCE_GROWTH < 1.0)
    if series.any():
        rho = float(modulus[series].max())
        terms = _SERIES_TERMS
        if rho >= _SERIES_RADIUS:
            terms = max(terms, math.ceil((math.log(_SERIES_TAIL) + math.log1p(-rho)) / math.log(rho)))
        out[series] = _series(z[series], densities.poly_moments(c, terms).u)
    if (~series).any():
        zl = z[~series]
        J = -np.log(1.0 - zl) / zl
        total = c[0] * J
        for s in range(1, len(c)):
            J = (J - 1.0 / s) / zl
            total = total + c[s] * J
        out[~series] = total - 1.0
    return out


@lru_cache(maxsize=32)
def _jacobi_rule(n: int, alpha: float, beta: float) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Jacobi rule mapped to [0, 1] with probability weights"""
    y, w = special.roots_jacobi(n, alpha, beta)
    return (1.0 + y) / 2.0, w / np.sum(w)


def _beta_quad(p: float, q: float, z: complex) -> complex:
    norm = math.exp(-special.betaln(p, q))

    def part(fn: Callable[[float], float]) -> float:
        value, _ = integrate.quad(fn, 0.0, 1.0, weight="alg", wvar=(p - 1.0, q - 1.0), limit=500,
                                  epsabs=1e-14, epsrel=1e-13)
        return value

    re = part(lambda x: (z * x / (1.0 - z * x)).real)
    im = part(lambda x: (z * x / (1.0 - z * x)).imag)
    return norm * complex(re, im)


def _beta_jacobi(p: float, q: float, z: np.ndarray) -> np.ndarray:
    """
    m(z) for Beta(p, q) by Gauss-Jacobi quadrature with the Beta weight.

    Orders double until consecutive rules agree; points that never settle
    go to adaptive algebraic-weight quadrature.
    """
    result = np.empty(z.shape, dtype=complex)
    pending = np.arange(z.size)
    n = thresholds.JACOBI_BASE_ORDER
    previous = _expect(z, *_jacobi_rule(n, q - 1.0, p - 1.0))

    while pending.size and n < thresholds.JACOBI_MAX_ORDER:
        n *= 2
        current = _expect(z[pending], *_jacobi_rule(n, q - 1.0, p - 1.0))
        settled = np.abs(current - previous) <= thresholds.JACOBI_AGREEMENT_TOL * np.maximum(1.0, np.abs(current))
        result[pending[settled]] = current[settled]
        pending = pending[~settled]
        previous = current[~settled]

    if pending.size:
        logger.debug("Gauss-Jacobi did not settle at %d points; using adaptive quadrature", pending.size)
        for i in pending:
            result[i] = _beta_quad(p, q, complex(z[i]))
    return result


def _m_beta(p: float, q: float, z: np.ndarray) -> np.ndarray:
    boundary = _on_boundary(z)
    if q < 1 and boundary.any():
        raise UnsupportedEvaluationError(
            f"Beta(p={p:g}, q={q:g}) cannot be evaluated on |z| = 1 when q < 1: "
            "the density singularity at 1 meets the vanishing denominator"
        )

    out = np.empty(z.shape, dtype=complex)
    small = np.abs(z) < _SERIES_RADIUS
    real = (z.imag == 0) & (z.real >= 0) & ~boundary & ~small
    rest = ~small & ~real

    if small.any():
        out[small] = _series(z[small], densities.beta_moments(p, q, _SERIES_TERMS).u)
    if real.any():
        # 1 + m(r) = 2F1(1, p; p + q; r)
        out[real] = special.hyp2f1(1.0, p, p + q, z.real[real]) - 1.0
    if rest.any():
        out[rest] = _beta_jacobi(p, q, z[rest])
    return out


def _generic_rule(edges: np.ndarray, order: int) -> Tuple[np.ndarray, np.ndarray]:
    return densities._gauss_legendre_panels(order, edges)


def _generic_quad(f: Callable, z: complex, points: Optional[Sequence[float]]) -> complex:
    inner = None if points is None else [t for t in points if 0.0 < t < 1.0][:100] or None

    def part(fn: Callable[[float], float]) -> float:
        value, _ = integrate.quad(fn, 0.0, 1.0, points=inner, limit=500, epsabs=1e-14, epsrel=1e-13)
        return value

    re = part(lambda x: float(f(np.asarray(x))) * (z * x / (1.0 - z * x)).real)
    im = part(lambda x: float(f(np.asarray(x))) * (z * x / (1.0 - z * x)).imag)
    return complex(re, im)


def _m_generic(density: Callable, z: np.ndarray, knots: Optional[Sequence[float]] = None) -> np.ndarray:
    """Composite Gauss-Legendre, refined once, with adaptive fallback"""
    f = densities.vectorize_density(density)
    edges = np.linspace(0.0, 1.0, 17)
    if knots is not None:
        edges = np.union1d(edges, np.asarray(knots, dtype=float))
    order = 32 if len(edges) <= 65 else 8

    refined = np.union1d(edges, (edges[:-1] + edges[1:]) / 2.0)
    x1, w1 = _generic_rule(edges, order)
    x2, w2 = _generic_rule(refined, order)
    coarse = _expect(z, x1, w1 * f(x1))
    fine = _expect(z, x2, w2 * f(x2))

    unsettled = np.abs(fine - coarse) > thresholds.JACOBI_AGREEMENT_TOL * np.maximum(1.0, np.abs(fine))
    for i in np.flatnonzero(unsettled):
        fine[i] = _generic_quad(f, complex(z[i]), knots)
    return fine


def m_values(spec: DistributionSpec, z) -> np.ndarray:
    """m at an array of points of the closed disc minus {1}"""
    z = _as_points(z)
    if spec.family == "dirac":
        return _m_dirac(spec.phi0, z)
    if spec.family == "uniform":
        return _m_uniform(z)
    if spec.family == "polynomial":
        return _m_polynomial(spec.c, z)
    if spec.family == "beta":
        return _m_beta(spec.p, spec.q, z)
    knots = spec.x if spec.family == "tabulated" else None
    return _m_generic(spec.density, z, knots)


def a_values(spec: DistributionSpec, z) -> np.ndarray:
    """a = m / (1 + m) at an array of points"""
    m = m_values(spec, z)
    return m / (1.0 + m)


def _method_for(spec: DistributionSpec, z: complex) -> str:
    if spec.family in ("dirac", "uniform", "polynomial"):
        return "closed-form"
    if spec.family == "beta" and z.imag == 0 and 0 <= z.real < 1:
        return "closed-form"
    return "integral"


# ---------------------------------------------------------------------------
# Point evaluations

def m_series(u: MomentSequence, z: Union[complex, DiscPoint]) -> SeriesValue:
    """
    Partial sum sum_{k<=K} u_k z^k inside the open disc.

    remainder_bound = u_K |z|^(K+1) / (1 - |z|), valid because u is
    non-increasing.
    """
    point = z if isinstance(z, DiscPoint) else DiscPoint(z)
    modulus = abs(point.z)
    if point.on_boundary:
        raise MethodDomainError(f"series evaluation needs |z| < 1, got |z| = {modulus!r}")

    value = complex(_series(np.array([point.z]), u.u)[0])
    bound = float(u.u[-1]) * modulus ** (u.K + 1) / (1.0 - modulus)
    return SeriesValue(value=value, method="series", remainder_bound=bound)


def m_integral(spec: DistributionSpec, z: Union[complex, DiscPoint]) -> SeriesValue:
    """m(z) from the integral representation or its closed form"""
    point = z if isinstance(z, DiscPoint) else DiscPoint(z)
    value = complex(m_values(spec, [point.z])[0])
    return SeriesValue(value=value, method=_method_for(spec, point.z))


def a_of_z(spec: DistributionSpec, z: Union[complex, DiscPoint]) -> SeriesValue:
    """a(z) = m(z) / (1 + m(z)); Re(1 + m) > 0 keeps it well defined"""
    m = m_integral(spec, z)
    return SeriesValue(value=m.value / (1.0 + m.value), method=m.method)


def grid_sweep(spec: DistributionSpec, grid) -> np.ndarray:
    """Rows (re_z, im_z, re_m, im_m, re_a, im_a) over a grid"""
    z = _as_points(grid)
    m = m_values(spec, z)
    a = m / (1.0 + m)
    return np.column_stack([z.real, z.imag, m.real, m.imag, a.real, a.imag])


# ---------------------------------------------------------------------------
# Abel limits

def abel_levels() -> Tuple[np.ndarray, np.ndarray]:
    lo, hi = thresholds.ABEL_LEVELS
    levels = np.arange(lo, hi + 1)
    return levels, 1.0 - np.ldexp(1.0, -levels)


def m_abel_table(spec: DistributionSpec) -> List[Tuple[int, float, float]]:
    """(j, r_j, m(r_j)); bounded iff the law has short memory"""
    levels, r = abel_levels()
    m = m_values(spec, r).real
    return [(int(j), float(rj), float(mj)) for j, rj, mj in zip(levels, r, m)]


def _memory_class_or_none(spec: DistributionSpec) -> Optional[MemoryClass]:
    try:
        return densities.memory_class(spec)
    except IndeterminateError:
        return None


def abel_limit(spec: DistributionSpec) -> AbelTable:
    """
    a(r_j) on r_j = 1 - 2^-j, j = 4..24, with an extrapolated limit.

    Short memory: Aitken's delta-squared on the last three values (geometric
    convergence in j). Long memory: the raw last value, no acceleration; the
    approach to 1 is logarithmic and acceleration would fabricate precision.
    """
    levels, r = abel_levels()
    m = m_values(spec, r).real
    a = m / (1.0 + m)
    steps = np.diff(a)

    table = [(int(j), float(rj), float(aj)) for j, rj, aj in zip(levels, r, a)]
    monotone = bool(np.all(steps >= -thresholds.ABEL_MONOTONE_SLACK))
    if not monotone:
        worst = int(np.argmin(steps))
        raise ExtrapolationError(
            f"a(r_j) decreases between j={levels[worst]} and j={levels[worst + 1]}", table=table
        )

    klass = _memory_class_or_none(spec)
    estimate, method = float(a[-1]), "raw"
    if klass == MemoryClass.SHORT:
        d1, d2 = float(steps[-2]), float(steps[-1])
        if d2 > d1 and d2 > 1e-13:
            raise ExtrapolationError(
                f"Abel increments grow at the tail ({d1:.3g} -> {d2:.3g})", table=table
            )
        if d2 > 1e-15 and d1 > d2:
            estimate = float(a[-1] + d2 * d2 / (d1 - d2))
            method = "aitken"
        else:
            logger.debug("Abel table settled at rounding level; using raw value")

    return AbelTable(levels=levels, r=r, a_r=a, m_r=m, estimate=estimate,
                     method=method, monotone=monotone)


# ---------------------------------------------------------------------------
# Numerical checks of the analytic properties

def default_disc_grid(radii: Sequence[float] = DEFAULT_RADII,
                      n_angles: int = DEFAULT_ANGLES) -> np.ndarray:
    """Polar grid radii x angles; excludes z = 1 as long as every radius < 1"""
    t = 2.0 * np.pi * np.arange(n_angles) / n_angles
    grid = np.concatenate([rho * np.exp(1j * t) for rho in radii])
    return grid[grid != 1]


def re_positivity_check(spec: DistributionSpec, grid=None) -> float:
    """min over the grid of Re(1 + m(z)); positive for every law on [0, 1)"""
    z = default_disc_grid() if grid is None else _as_points(grid)
    return float(np.min(1.0 + m_values(spec, z).real))


def circle_injectivity_check(spec: DistributionSpec, r: float,
                             n_angles: int = DEFAULT_ANGLES) -> InjectivityReport:
    """
    On t_j = pi j / n: Re m(r e^{it}) strictly decreasing, Im m antisymmetric
    about pi, and Im m > 0 on (0, pi).
    """
    if not 0 < r < 1:
        raise DomainError(f"radius must lie in (0, 1), got {r!r}")
    if n_angles < 3:
        raise DomainError("need at least 3 angles")

    t = np.pi * np.arange(1, n_angles) / n_angles
    upper = m_values(spec, r * np.exp(1j * t))
    lower = m_values(spec, r * np.exp(1j * (2.0 * np.pi - t)))

    violations = []
    antisym_err = np.abs(upper.imag + lower.imag)
    antisymmetric = bool(np.all(antisym_err <= thresholds.ANTISYMMETRY_TOL))
    for i in np.flatnonzero(antisym_err > thresholds.ANTISYMMETRY_TOL)[:10]:
        violations.append({"check": "antisymmetry", "t": float(t[i]), "value": float(antisym_err[i])})

    if not np.any(upper != 0):
        # m vanishes identically (Dirac at 0): nothing to be monotone about
        return InjectivityReport(r=r, n_angles=n_angles, decreasing=None,
                                 antisymmetric=antisymmetric, im_positive=None,
                                 violations=violations)

    steps = np.diff(upper.real)
    decreasing = bool(np.all(steps < 0))
    for i in np.flatnonzero(steps >= 0)[:10]:
        violations.append({"check": "decreasing", "t": float(t[i + 1]), "value": float(steps[i])})

    im_positive = bool(np.all(upper.imag > 0))
    for i in np.flatnonzero(upper.imag <= 0)[:10]:
        violations.append({"check": "im_positive", "t": float(t[i]), "value": float(upper.imag[i])})

    return InjectivityReport(r=r, n_angles=n_angles, decreasing=decreasing,
                             antisymmetric=antisymmetric, im_positive=im_positive,
                             violations=violations)


# ---------------------------------------------------------------------------
# Uniform law through Stirling numbers

def stirling_first_kind(K: int) -> List[List[int]]:
    """
    Signed Stirling numbers of the first kind s(k, j), rows k = 0..K.

    x(x-1)...(x-k+1) = sum_j s(k, j) x^j; s(k+1, j) = s(k, j-1) - k s(k, j).
    """
    rows = [[1]]
    for k in range(K):
        prev = rows[-1] + [0]
        row = [0] * (k + 2)
        for j in range(1, k + 2):
            row[j] = prev[j - 1] - k * prev[j]
        rows.append(row)
    return rows


def scaled_falling_factorial_integrals(K: int, exact_limit: int = STIRLING_EXACT_LIMIT) -> List[Union[Fraction, float]]:
    """
    I_k / k! for k = 1..K with I_k = int_0^1 x(x-1)...(x-k+1) dx.

    Exact rationals up to `exact_limit`; beyond it each term s(k, j)/k! is
    rounded once and the alternating sum is correctly rounded (fsum).
    """
    if K < 1:
        raise DomainError(f"order must be >= 1, got {K}")
    if K > exact_limit:
        logger.info("exact Stirling arithmetic stops at k=%d; compensated floating point beyond", exact_limit)

    rows = stirling_first_kind(K)
    out: List[Union[Fraction, float]] = []
    factorial = 1
    for k in range(1, K + 1):
        factorial *= k
        row = rows[k]
        if k <= exact_limit:
            integral = sum(Fraction(s, j + 1) for j, s in enumerate(row) if s)
            out.append(integral / factorial)
        else:
            out.append(math.fsum(s / factorial / (j + 1) for j, s in enumerate(row) if s))
    return out


def uniform_ar_stirling(K: int, exact_limit: int = STIRLING_EXACT_LIMIT) -> ARCoefficients:
    """Uniform-law AR coefficients a_k = |I_k| / k!"""
    scaled = scaled_falling_factorial_integrals(K, exact_limit)
    a = np.array([float(abs(v)) for v in scaled])
    return ARCoefficients(a=a, partial_sums=compensated_cumsum(a), source=None)
