"""
Pydantic schemas: mixing-distribution specs, panel configuration and the
JSON reports emitted by the CLI.
"""
import logging
import math
import warnings
from datetime import datetime
from enum import Enum
from typing import Annotated, Any, Callable, Dict, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, field_validator, model_validator
from scipy import integrate

from aggmem import thresholds
from aggmem.errors import SquareSummabilityWarning

logger = logging.getLogger("aggmem.schemas")


class MemoryClass(str, Enum):
    SHORT = "ShortMemory"
    LONG = "LongMemory"


class SpecBase(BaseModel):
    """Common configuration for all distribution specs"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    def describe(self) -> str:
        return self.family


class BetaSpec(SpecBase):
    """Beta(p, q) on [0, 1)"""
    family: Literal["beta"] = "beta"
    p: float = Field(gt=0)
    q: float = Field(gt=0)

    @model_validator(mode="after")
    def flag_square_summability(self):
        # sum u_k^2 < inf needs q > 1/2 for the L2 limit of the aggregate
        if self.q <= 0.5:
            message = (f"Beta(p={self.p}, q={self.q}): q <= 1/2 makes sum u_k^2 diverge; "
                       "the L2 aggregate limit is not guaranteed")
            logger.warning(message)
            warnings.warn(message, SquareSummabilityWarning, stacklevel=2)
        return self

    def describe(self) -> str:
        return f"Beta({self.p:g}, {self.q:g})"


class UniformSpec(SpecBase):
    """Uniform on [0, 1)"""
    family: Literal["uniform"] = "uniform"

    def describe(self) -> str:
        return "Uniform"


class PolynomialSpec(SpecBase):
    """Polynomial density f(x) = sum c_s x^s on [0, 1]"""
    family: Literal["polynomial"] = "polynomial"
    c: List[float] = Field(min_length=1)

    @field_validator("c")
    @classmethod
    def check_density(cls, c: List[float]) -> List[float]:
        if not all(math.isfinite(v) for v in c):
            raise ValueError("polynomial coefficients must be finite")

        mass = math.fsum(cs / (s + 1) for s, cs in enumerate(c))
        if abs(mass - 1.0) > thresholds.POLY_NORMALIZATION_TOL:
            raise ValueError(
                f"polynomial density must integrate to one: sum c_s/(s+1) = {mass!r}"
            )

        grid = np.linspace(0.0, 1.0, thresholds.POLY_GRID_POINTS)
        values = np.polynomial.polynomial.polyval(grid, c)
        worst = int(np.argmin(values))
        if values[worst] < -thresholds.POLY_NONNEG_SLACK:
            raise ValueError(
                f"polynomial density is negative at x = {grid[worst]:.6g} (f = {values[worst]:.6g})"
            )
        return list(c)

    @property
    def f1(self) -> float:
        """Density value at x = 1"""
        return math.fsum(self.c)

    def density(self, x):
        return np.polynomial.polynomial.polyval(x, self.c)

    def describe(self) -> str:
        return "Polynomial[" + ", ".join(f"{v:g}" for v in self.c) + "]"


class DiracSpec(SpecBase):
    """Point mass at phi0"""
    family: Literal["dirac"] = "dirac"
    phi0: float = Field(ge=0, lt=1)

    def describe(self) -> str:
        return f"Dirac({self.phi0:g})"


class TabulatedSpec(SpecBase):
    """Generic density given by values on a grid, linearly interpolated"""
    family: Literal["tabulated"] = "tabulated"
    x: List[float] = Field(min_length=2)
    f: List[float] = Field(min_length=2)

    @model_validator(mode="after")
    def check_table(self):
        x = np.asarray(self.x, dtype=float)
        f = np.asarray(self.f, dtype=float)
        if x.shape != f.shape:
            raise ValueError("tabulated density needs as many values as grid points")
        if np.any(np.diff(x) <= 0):
            raise ValueError("tabulated grid must be strictly increasing")
        if x[0] != 0.0 or x[-1] != 1.0:
            raise ValueError("tabulated grid must span [0, 1]")
        if np.any(f < 0) or not np.all(np.isfinite(f)):
            raise ValueError("tabulated density must be finite and non-negative")

        # Trapezoid is exact for the piecewise-linear interpolant
        mass = float(np.sum(np.diff(x) * (f[1:] + f[:-1]) / 2.0))
        if abs(mass - 1.0) > thresholds.GENERIC_NORMALIZATION_TOL:
            raise ValueError(f"tabulated density must integrate to one, got {mass!r}")
        return self

    def density(self, x):
        return np.interp(x, self.x, self.f)

    def describe(self) -> str:
        return f"Tabulated[{len(self.x)} knots]"


class GenericSpec(SpecBase):
    """Generic bounded density supplied as a Python callable"""
    model_config = ConfigDict(frozen=True, extra="forbid", arbitrary_types_allowed=True)

    family: Literal["generic"] = "generic"
    density: Callable[..., Any] = Field(exclude=True)
    label: str = "generic"

    @model_validator(mode="after")
    def check_normalized(self):
        mass, _ = integrate.quad(lambda t: float(self.density(t)), 0.0, 1.0, limit=200)
        if abs(mass - 1.0) > thresholds.GENERIC_NORMALIZATION_TOL:
            raise ValueError(f"generic density must integrate to one, got {mass!r}")
        return self

    def describe(self) -> str:
        return f"Generic({self.label})"


DistributionSpec = Annotated[
    Union[BetaSpec, UniformSpec, PolynomialSpec, DiracSpec, TabulatedSpec, GenericSpec],
    Field(discriminator="family"),
]

_spec_adapter = TypeAdapter(DistributionSpec)


def parse_spec(data: Dict[str, Any]) -> DistributionSpec:
    """Build a spec from its JSON object form"""
    return _spec_adapter.validate_python(data)


def spec_to_dict(spec: DistributionSpec) -> Dict[str, Any]:
    """JSON object form of a spec (callables are dropped)"""
    return spec.model_dump(mode="json")


def is_generic(spec: DistributionSpec) -> bool:
    return spec.family in ("generic", "tabulated")


class PanelConfig(BaseModel):
    """Configuration of a simulated panel of random AR(1) units"""
    model_config = ConfigDict(frozen=True, extra="forbid", arbitrary_types_allowed=True)

    spec: DistributionSpec
    N: int = Field(ge=1)
    T: int = Field(ge=1)
    burn_in: int = Field(default=thresholds.DEFAULT_BURN_IN, ge=0)
    sigma_eps: float = Field(default=1.0, ge=0)
    sigma_eta: float = Field(default=1.0, ge=0)
    seed: int = Field(ge=0, lt=2**64)
    seed_source: Literal["cli", "env", "default", "config"] = "config"
    weights: Literal["equal"] = "equal"
    retain_panel: bool = False

    @model_validator(mode="after")
    def check_noise(self):
        if self.sigma_eps == 0 and self.sigma_eta == 0:
            raise ValueError("sigma_eps and sigma_eta cannot both be zero")
        return self


class PersistenceReport(BaseModel):
    """JSON report for the persistence a(1)"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    spec: DistributionSpec
    a1_limit: float
    memory_class: MemoryClass
    method: str


class AbelSummary(BaseModel):
    """Condensed Abel table for reports"""
    levels: List[int]
    r: List[float]
    a_r: List[float]
    estimate: float
    method: str
    monotone: bool
    m_increment_ratio: Optional[float] = None


class HausdorffSummary(BaseModel):
    passed: bool
    max_order: int
    worst_value: float
    worst_at: Optional[List[int]] = None


class MemoryReport(BaseModel):
    """Combined long-memory evidence for one spec"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    spec: DistributionSpec
    memory_class: Optional[MemoryClass]
    persistence: Optional[float]
    partial_sums: Dict[int, float]
    matched_discrepancy: Dict[int, float]
    abel: Optional[AbelSummary]
    cesaro: Dict[int, float]
    hausdorff: HausdorffSummary
    channels: Dict[str, str]
    verdict: Literal["consistent", "inconsistent", "inconclusive"]
    consistent: bool

    @model_validator(mode="after")
    def check_unit_root(self):
        if self.memory_class is not None and self.persistence is not None:
            is_long = self.memory_class == MemoryClass.LONG
            if is_long != (self.persistence == 1.0):
                raise ValueError("memory class and persistence disagree on the unit root")
        return self


class StudyRow(BaseModel):
    N: int
    variances: List[float]
    mean_variance: float


class StudyReport(BaseModel):
    """Variance scaling of the aggregate across cross-section sizes"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    spec: DistributionSpec
    T: int
    seeds: List[int]
    sigma_eps: float
    sigma_eta: float
    rows: List[StudyRow]
    loglog_slope: Optional[float]
    common_variance: float
    monotone_decrease: bool
    approaches_from_above: bool


class RunBase(BaseModel):
    """Fields stored for one recorded run"""
    command: str
    spec_json: str
    config_json: Optional[str] = None
    seed: Optional[int] = None
    seed_source: Optional[str] = None
    n_units: Optional[int] = None
    n_periods: Optional[int] = None
    summary_json: Optional[str] = None


class RunCreate(RunBase):
    """Schema for recording a new run"""
    pass


class RunResponse(RunBase):
    """Schema for listing recorded runs"""
    id: int
    created_at: datetime

    model_config = ConfigDict(from_attributes=True)
