"""
In-memory numeric result records.

Arrays stay numpy arrays; `to_dict` gives JSON-ready plain values.
"""
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from aggmem.errors import DomainError, PoleError


@dataclass(frozen=True)
class MomentSequence:
    """
    Noncentral moments u_0 = 1, u_1, ..., u_K of the mixing law.

    `u[k]` is E[phi^k]; `exactness` is "closed-form", "quadrature",
    "recurrence" (recovered from AR coefficients) or "empirical".
    """
    u: np.ndarray
    exactness: str = "closed-form"
    quadrature_error: float = 0.0

    @property
    def K(self) -> int:
        return len(self.u) - 1

    def to_rows(self) -> List[Tuple[int, float]]:
        return [(k, float(self.u[k])) for k in range(1, self.K + 1)]


@dataclass(frozen=True)
class ARCoefficients:
    """
    Autoregressive coefficients a_1..a_K of the limit aggregate.

    `a[k - 1]` is a_k and `partial_sums[k - 1]` is S_k = a_1 + ... + a_k.
    """
    a: np.ndarray
    partial_sums: np.ndarray
    source: Optional[MomentSequence] = None

    @property
    def K(self) -> int:
        return len(self.a)

    def coefficient(self, k: int) -> float:
        if k < 1 or k > self.K:
            raise DomainError(f"coefficient index {k} outside 1..{self.K}")
        return float(self.a[k - 1])

    def to_rows(self) -> List[Tuple[int, float, float]]:
        return [(k, float(self.a[k - 1]), float(self.partial_sums[k - 1]))
                for k in range(1, self.K + 1)]


@dataclass(frozen=True)
class DiscPoint:
    """A point of the closed unit disc other than z = 1"""
    z: complex

    def __post_init__(self):
        z = complex(self.z)
        object.__setattr__(self, "z", z)
        if z == 1:
            raise PoleError("z = 1 is a pole of m; use abel_limit for a(1)")
        if abs(z) > 1.0 + 1e-15:
            raise DomainError(f"|z| = {abs(z)!r} lies outside the closed unit disc")

    @property
    def on_boundary(self) -> bool:
        return abs(self.z) >= 1.0 - 1e-15


@dataclass(frozen=True)
class SeriesValue:
    """Evaluated generating function with the method that produced it"""
    value: complex
    method: str
    remainder_bound: float = 0.0


@dataclass
class AbelTable:
    """Values a(r_j), m(r_j) on r_j = 1 - 2^-j and the extrapolated limit"""
    levels: np.ndarray
    r: np.ndarray
    a_r: np.ndarray
    m_r: np.ndarray
    estimate: float
    method: str
    monotone: bool

    def m_increment_ratio(self, lag: int = 10) -> Optional[float]:
        """(m_J - m_{J-1}) / (m_{J-lag} - m_{J-lag-1}); None if undefined"""
        if len(self.m_r) < lag + 2:
            return None
        late = self.m_r[-1] - self.m_r[-2]
        early = self.m_r[-1 - lag] - self.m_r[-2 - lag]
        if early <= 0:
            return None
        return float(late / early)

    def to_rows(self) -> List[Tuple[int, float, float]]:
        return [(int(j), float(r), float(a)) for j, r, a in zip(self.levels, self.r, self.a_r)]


@dataclass
class InjectivityReport:
    """Outcome of the circle checks on |z| = r"""
    r: float
    n_angles: int
    decreasing: Optional[bool]
    antisymmetric: bool
    im_positive: Optional[bool]
    violations: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def vacuous(self) -> bool:
        return self.decreasing is None

    @property
    def passed(self) -> bool:
        return (self.decreasing is not False and self.antisymmetric
                and self.im_positive is not False)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["passed"] = self.passed
        data["vacuous"] = self.vacuous
        return data


@dataclass
class HausdorffResult:
    """Complete-monotonicity check of a moment sequence"""
    passed: bool
    max_order: int
    worst_value: float
    worst_at: Optional[Tuple[int, int]]

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class CrossSectionMoments:
    """Mean, variance, skewness and kurtosis of phi recovered from a_1..a_4"""
    mean: float
    variance: float
    skewness: float
    kurtosis: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class TruncationGap:
    """Distance of a truncated AR(K) from the unit-sum constraint"""
    K: int
    partial_sum: float
    gap: float
    persistence: float
    gap_to_persistence: float
    abel_at_matched_r: float
    discrepancy: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class Autocovariance:
    """Theoretical autocovariances gamma(0..H) and their truncation level"""
    gamma: np.ndarray
    truncation: int
    tail_bound: Optional[float]

    @property
    def acf(self) -> np.ndarray:
        return self.gamma / self.gamma[0]


@dataclass
class SampleACF:
    """Biased sample autocovariance and its normalized version"""
    acov: np.ndarray
    acf: np.ndarray


@dataclass
class PanelRun:
    """
    Simulated aggregate path with the draws and configuration that made it.

    `panel` (N x T) is kept only when the config asks for it.
    """
    aggregate: np.ndarray
    phi_draws: np.ndarray
    config: Any
    burn_in_max: int
    panel: Optional[np.ndarray] = None

    def provenance(self) -> Dict[str, Any]:
        return {
            "config": self.config.model_dump(mode="json"),
            "burn_in_max": self.burn_in_max,
        }
