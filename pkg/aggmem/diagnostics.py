"""
Long-memory verdicts and truncation reports.

memory_report collects independent evidence channels (closed-form class,
persistence, partial sums, Abel table, Hausdorff check) and only calls a spec
consistent when every channel agrees with the closed-form classification.
"""
import logging
import math
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from aggmem import complexfn, densities, thresholds, wold_map
from aggmem.errors import DomainError, ExtrapolationError, IndeterminateError
from aggmem.results import AbelTable, ARCoefficients, HausdorffResult, MomentSequence, TruncationGap
from aggmem.schemas import (
    AbelSummary,
    DistributionSpec,
    HausdorffSummary,
    MemoryClass,
    MemoryReport,
    is_generic,
)

logger = logging.getLogger("aggmem.diagnostics")

PARTIAL_SUM_ORDERS = (50, 200, 1000)
CESARO_ORDERS = (100, 400, 1600)
HAUSDORFF_ORDER = 10
INJECTIVITY_RADII = (0.5, 0.9, 0.99)
ROUND_TRIP_TOL = 1e-10
# interior points for the series vs. integral comparison
AGREEMENT_POINTS = tuple(rho * complex(math.cos(t), math.sin(t)) for rho in (0.5, 0.75) for t in (0.0, 1.0, 2.5, math.pi))

AGREE = "agree"
DISAGREE = "disagree"
ABSTAIN = "abstain"
UNAVAILABLE = "unavailable"


def hausdorff_check(u: MomentSequence, J: int = HAUSDORFF_ORDER) -> HausdorffResult:
    """
    Complete monotonicity: (-1)^j (Delta^j u)_k >= -tol for j <= J and every k
    with k + j <= K. Reports the most negative difference and where it sits.
    """
    values = np.asarray(u.u, dtype=float)
    K = len(values) - 1
    if J < 0 or J > thresholds.HAUSDORFF_MAX_ORDER:
        raise DomainError(f"difference order must lie in 0..{thresholds.HAUSDORFF_MAX_ORDER}, got {J}")
    if J > K:
        raise DomainError(f"difference order {J} exceeds the sequence length K = {K}")

    worst, worst_at = math.inf, None
    for j in range(J + 1):
        weights = [(-1) ** i * math.comb(j, i) for i in range(j + 1)]
        for k in range(K - j + 1):
            d = math.fsum(w * values[k + i] for i, w in enumerate(weights))
            if d < worst:
                worst, worst_at = d, (j, k)

    passed = worst >= -thresholds.HAUSDORFF_TOL
    if not passed:
        logger.info("Hausdorff check failed: (-1)^%d Delta^%d u_%d = %.3g", worst_at[0], worst_at[0], worst_at[1], worst)
    return HausdorffResult(passed=passed, max_order=J, worst_value=float(worst),
                           worst_at=worst_at if not passed else None)


def _abel_bounded(table: AbelTable) -> Optional[bool]:
    """True / False when the m(r_j) tail looks bounded / unbounded, None to abstain"""
    ratio = table.m_increment_ratio(lag=10)
    if ratio is None:
        return True if np.all(np.diff(table.m_r) <= 0) else None
    if ratio < thresholds.ABEL_BOUNDED_RATIO:
        return True
    if ratio > thresholds.ABEL_UNBOUNDED_RATIO:
        return False
    return None


def _abel_channel(spec: DistributionSpec, klass: Optional[MemoryClass],
                  a1: Optional[float]) -> Tuple[str, Optional[AbelTable]]:
    try:
        table = complexfn.abel_limit(spec)
    except ExtrapolationError as e:
        logger.info("Abel channel rejected the table: %s", e.detail)
        return DISAGREE, None

    if a1 is not None and np.max(table.a_r) > a1 + thresholds.ABEL_MONOTONE_SLACK:
        return DISAGREE, table

    if klass is None:
        return ABSTAIN, table
    bounded = _abel_bounded(table)
    if not is_generic(spec):
        # class and a(1) are exact here: a monotone table below a(1) agrees
        # unless a long-memory law shows a bounded m
        if klass == MemoryClass.LONG and bounded is True:
            return DISAGREE, table
        return AGREE, table
    if bounded is None:
        return ABSTAIN, table
    return (AGREE if bounded == (klass == MemoryClass.SHORT) else DISAGREE), table


def _partial_sum_channel(a: ARCoefficients, a1: Optional[float],
                         matched: Dict[int, float]) -> str:
    S = a.partial_sums
    if np.any(S > 1.0 + thresholds.PARTIAL_SUM_SLACK):
        return DISAGREE
    if a1 is None:
        return ABSTAIN

    for K, discrepancy in matched.items():
        bound = (wold_map.cesaro_weighted(a, K) + abs(a1 - S[K - 1])
                 + thresholds.MATCHED_RESOLUTION_SLACK)
        if discrepancy > bound:
            logger.info("matched discrepancy %.3g at K=%d exceeds %.3g", discrepancy, K, bound)
            return DISAGREE
    return AGREE


def _verdict(channels: Dict[str, str]) -> str:
    states = set(channels.values())
    if DISAGREE in states:
        return "inconsistent"
    if ABSTAIN in states or UNAVAILABLE in states:
        return "inconclusive"
    return "consistent"


def memory_report(spec: DistributionSpec, K: int = max(CESARO_ORDERS)) -> MemoryReport:
    """Assemble every evidence channel for one spec"""
    order = max(int(K), max(PARTIAL_SUM_ORDERS), max(CESARO_ORDERS))
    channels: Dict[str, str] = {}

    try:
        klass: Optional[MemoryClass] = densities.memory_class(spec)
        a1: Optional[float] = wold_map.persistence(spec)
        channels["closed_form"] = AGREE
        channels["persistence"] = AGREE if (klass == MemoryClass.LONG) == (a1 == 1.0) else DISAGREE
    except IndeterminateError as e:
        logger.info("memory class of %s is indeterminate: %s", spec.describe(), e.detail)
        klass, a1 = None, None
        channels["closed_form"] = UNAVAILABLE
        channels["persistence"] = UNAVAILABLE

    u = densities.moments(spec, order)
    a = wold_map.ar_from_ma(u)
    reported = sorted(set(PARTIAL_SUM_ORDERS) | {int(K)})
    partial_sums = {k: float(a.partial_sums[k - 1]) for k in reported}
    cesaro = {n: wold_map.cesaro_weighted(a, n) for n in CESARO_ORDERS}

    r_matched = np.array([1.0 - 1.0 / k for k in PARTIAL_SUM_ORDERS])
    a_matched = complexfn.a_values(spec, r_matched).real
    matched = {k: abs(partial_sums[k] - float(ar)) for k, ar in zip(PARTIAL_SUM_ORDERS, a_matched)}
    channels["partial_sums"] = _partial_sum_channel(a, a1, matched)

    channels["abel"], table = _abel_channel(spec, klass, a1)
    abel = None
    if table is not None:
        abel = AbelSummary(levels=[int(j) for j in table.levels], r=table.r.tolist(),
                           a_r=table.a_r.tolist(), estimate=table.estimate, method=table.method,
                           monotone=table.monotone, m_increment_ratio=table.m_increment_ratio(lag=10))

    hausdorff = hausdorff_check(u, HAUSDORFF_ORDER)
    channels["hausdorff"] = AGREE if hausdorff.passed else DISAGREE

    verdict = _verdict(channels)
    logger.debug("memory report for %s: %s %s", spec.describe(), verdict, channels)
    return MemoryReport(
        spec=spec, memory_class=klass, persistence=a1, partial_sums=partial_sums,
        matched_discrepancy=matched, abel=abel, cesaro=cesaro,
        hausdorff=HausdorffSummary(passed=hausdorff.passed, max_order=hausdorff.max_order,
                                   worst_value=hausdorff.worst_value,
                                   worst_at=list(hausdorff.worst_at) if hausdorff.worst_at else None),
        channels=channels, verdict=verdict, consistent=verdict == "consistent",
    )


def truncation_gap(spec: DistributionSpec, K: int) -> TruncationGap:
    """How far AR(K) truncation is from the unit-sum constraint and from a(1)"""
    if K < 10:
        raise DomainError(f"truncation gap needs K >= 10, got {K}")

    a = wold_map.ar_coefficients(spec, K)
    S_K = float(a.partial_sums[-1])
    a1 = wold_map.persistence(spec)
    abel = float(complexfn.a_values(spec, [1.0 - 1.0 / K]).real[0])
    return TruncationGap(K=K, partial_sum=S_K, gap=1.0 - S_K, persistence=a1,
                         gap_to_persistence=abs(a1 - S_K), abel_at_matched_r=abel,
                         discrepancy=abs(S_K - abel))


def property_battery(spec: DistributionSpec, K: int = wold_map.DEFAULT_ORDER) -> List[Dict[str, Any]]:
    """
    Executable versions of the analytic properties: positivity of Re(1 + m),
    circle injectivity, Hausdorff complete monotonicity, the MA/AR round trip,
    monotone Abel table and agreement of independent persistence routes.
    """
    checks: List[Dict[str, Any]] = []

    def record(name: str, passed: bool, detail: str):
        checks.append({"check": name, "passed": bool(passed), "detail": detail})

    low = complexfn.re_positivity_check(spec)
    record("re_positivity", low > 0, f"min Re(1+m) = {low:.15g}")

    for r in INJECTIVITY_RADII:
        report = complexfn.circle_injectivity_check(spec, r)
        detail = "vacuous (m = 0)" if report.vacuous else f"{len(report.violations)} violation(s)"
        record(f"injectivity r={r:g}", report.passed, detail)

    u = densities.moments(spec, K)
    hausdorff = hausdorff_check(u, min(HAUSDORFF_ORDER, K))
    record(f"hausdorff J={hausdorff.max_order}", hausdorff.passed, f"worst {hausdorff.worst_value:.3g}")

    worst_gap = 0.0
    for z in AGREEMENT_POINTS:
        series = complexfn.m_series(u, z)
        gap = abs(series.value - complexfn.m_integral(spec, z).value)
        worst_gap = max(worst_gap, gap - max(thresholds.METHOD_AGREEMENT_TOL, series.remainder_bound))
    record("method_agreement", worst_gap <= 0.0,
           f"series vs integral within max({thresholds.METHOD_AGREEMENT_TOL:g}, remainder) at {len(AGREEMENT_POINTS)} points")

    a = wold_map.ar_from_ma(u)
    error = float(np.max(np.abs(wold_map.ma_from_ar(a).u - u.u)))
    record("round_trip", error <= ROUND_TRIP_TOL, f"max |u - ma(ar(u))| = {error:.3g}")

    try:
        table = complexfn.abel_limit(spec)
        record("abel_monotone", table.monotone, f"a(r_24) = {table.a_r[-1]:.15g}")
    except ExtrapolationError as e:
        record("abel_monotone", False, e.detail)

    try:
        a1 = wold_map.persistence(spec)
        ratio_gap = densities.mean_ratio_gap(spec)
        if math.isinf(ratio_gap):
            record("persistence_routes", a1 == 1.0, "long memory: a(1) = 1")
        else:
            other = ratio_gap / densities.mean_inverse_gap(spec)
            tol = thresholds.QUADRATURE_TOL if is_generic(spec) else thresholds.CLOSED_FORM_TOL
            record("persistence_routes", abs(a1 - other) <= tol,
                   f"1 - 1/E[1/(1-phi)] = {a1:.15g}, E[phi/(1-phi)]/E[1/(1-phi)] = {other:.15g}")
    except IndeterminateError as e:
        record("persistence_routes", False, e.detail)

    if spec.family == "uniform":
        n = min(K, complexfn.STIRLING_EXACT_LIMIT)
        exact = complexfn.uniform_ar_stirling(n).a
        error = float(np.max(np.abs(exact - a.a[:n])))
        record("stirling", error <= thresholds.CLOSED_FORM_TOL, f"max |a_k - |I_k|/k!| = {error:.3g}")

    return checks
