"""
Monte Carlo simulation of a panel of random AR(1) units

    x_{i,t} = phi_i x_{i,t-1} + eps_t + eta_{i,t}

and of its equal-weight aggregate X_{N,t} = (1/N) sum_i x_{i,t}.

Random streams are derived from the seed by position, never by call order:
spawn key (0,) draws phi, (1,) the common shock, (2, i) unit i's own shock.
Units are reduced in fixed chunks and the chunk sums are combined in index
order, so the aggregate is bit-identical for any number of worker threads.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.interpolate import PchipInterpolator
from scipy.signal import lfilter

from aggmem import densities, thresholds
from aggmem.config import get_worker_count
from aggmem.errors import ConstantPathError, DomainError
from aggmem.results import Autocovariance, MomentSequence, PanelRun, SampleACF
from aggmem.schemas import DistributionSpec, PanelConfig, StudyReport, StudyRow
from aggmem.summation import exact_dot

logger = logging.getLogger("aggmem.panel_sim")

_PHI_STREAM = 0
_COMMON_STREAM = 1
_UNIT_STREAM = 2
_BELOW_ONE = np.nextafter(1.0, 0.0)


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


# ---------------------------------------------------------------------------
# Cross-sectional draws

def _inverse_cdf(grid: np.ndarray, cdf: np.ndarray) -> PchipInterpolator:
    """Monotone spline of x against F(x); flat stretches of F are dropped"""
    cdf = cdf / cdf[-1]
    keep = np.concatenate(([True], np.diff(cdf) > 0))
    return PchipInterpolator(cdf[keep], grid[keep])


def _polynomial_sampler(c: Sequence[float]) -> PchipInterpolator:
    grid = np.linspace(0.0, 1.0, thresholds.POLY_SAMPLING_KNOTS)
    # F(x) = sum c_s x^(s+1) / (s+1), exact on the knots
    cdf = P.polyval(grid, P.polyint(c))
    return _inverse_cdf(grid, np.maximum.accumulate(cdf))


def _generic_sampler(density) -> PchipInterpolator:
    f = densities.vectorize_density(density)
    grid = np.linspace(0.0, 1.0, thresholds.POLY_SAMPLING_KNOTS)
    order = 8
    x, w = densities._gauss_legendre_panels(order, grid)
    cells = (w * np.maximum(f(x), 0.0)).reshape(-1, order).sum(axis=1)
    cdf = np.concatenate(([0.0], np.cumsum(cells)))
    return _inverse_cdf(grid, cdf)


def draw_phi(spec: DistributionSpec, N: int, seed: int) -> np.ndarray:
    """N draws from the mixing law, all in [0, 1), reproducible from the seed"""
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    rng = _rng(seed, _PHI_STREAM)

    if spec.family == "dirac":
        return np.full(N, float(spec.phi0))
    if spec.family == "uniform":
        phi = rng.random(N)
    elif spec.family == "beta":
        phi = rng.beta(spec.p, spec.q, N)
    elif spec.family == "polynomial":
        phi = _polynomial_sampler(spec.c)(rng.random(N))
    else:
        phi = _generic_sampler(spec.density)(rng.random(N))
    return np.clip(phi, 0.0, _BELOW_ONE)


def empirical_cross_moments(phi_draws: np.ndarray, K: int) -> MomentSequence:
    """(1/N) sum_i phi_i^k for k = 0..K, each sum correctly rounded"""
    phi = np.asarray(phi_draws, dtype=float)
    if phi.size == 0:
        raise DomainError("need at least one draw")
    if K < 1:
        raise DomainError(f"order must be >= 1, got {K}")

    u = np.ones(K + 1)
    power = phi.copy()
    for k in range(1, K + 1):
        u[k] = math.fsum(power) / phi.size
        power *= phi
    return MomentSequence(u=u, exactness="empirical")


# ---------------------------------------------------------------------------
# Panel simulation

def unit_burn_in(phi: np.ndarray, burn_in: int) -> np.ndarray:
    """
    Burn-in per unit: `burn_in`, raised to ceil(10 / (1 - phi_i)) when
    phi_i > 0.999 and capped at 10^6.
    """
    burn = np.full(phi.shape, int(burn_in), dtype=np.int64)
    hot = phi > thresholds.BURN_IN_PHI_THRESHOLD
    if not hot.any():
        return burn

    # 1 - phi carries rounding error; round the quotient before taking the ceiling
    scaled = np.ceil(np.round(thresholds.BURN_IN_SCALE / (1.0 - phi[hot]), 6))
    capped = scaled > thresholds.BURN_IN_CAP
    if capped.any():
        logger.warning("burn-in capped at %d for %d unit(s) with phi within %.3g of 1",
                       thresholds.BURN_IN_CAP, int(capped.sum()), float(1.0 - phi[hot].max()))
    scaled = np.minimum(scaled, thresholds.BURN_IN_CAP).astype(np.int64)
    burn[hot] = np.maximum(burn[hot], scaled)
    logger.info("burn-in raised for %d unit(s), longest %d", int(hot.sum()), int(burn.max()))
    return burn


def _simulate_chunk(cfg: PanelConfig, phi: np.ndarray, burn: np.ndarray,
                    common: np.ndarray, start: int, stop: int):
    """Sum of unit paths start..stop-1 in index order (and the paths if kept)"""
    T = cfg.T
    longest = len(common) - T
    total = np.zeros(T)
    rows = [] if cfg.retain_panel else None

    for i in range(start, stop):
        b = int(burn[i])
        shocks = common[longest - b:].copy()
        if cfg.sigma_eta > 0:
            shocks += cfg.sigma_eta * _rng(cfg.seed, _UNIT_STREAM, i).standard_normal(b + T)
        path = lfilter([1.0], [1.0, -phi[i]], shocks)[b:]
        total += path
        if rows is not None:
            rows.append(path)
    return total, rows


def simulate_panel(cfg: PanelConfig, workers: Optional[int] = None) -> PanelRun:
    """
    Simulate N units for T periods after burn-in, each started at zero.

    The common shock path is shared by every unit; units with longer
    burn-in reach further back into it.
    """
    workers = get_worker_count(workers)
    phi = draw_phi(cfg.spec, cfg.N, cfg.seed)
    burn = unit_burn_in(phi, cfg.burn_in)
    longest = int(burn.max())

    common = np.zeros(longest + cfg.T)
    if cfg.sigma_eps > 0:
        common = cfg.sigma_eps * _rng(cfg.seed, _COMMON_STREAM).standard_normal(longest + cfg.T)

    bounds = [(s, min(s + thresholds.UNIT_CHUNK, cfg.N)) for s in range(0, cfg.N, thresholds.UNIT_CHUNK)]
    logger.debug("simulating %d units in %d chunk(s) on %d thread(s)", cfg.N, len(bounds), workers)

    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_simulate_chunk, cfg, phi, burn, common, s, e) for s, e in bounds]
            parts = [f.result() for f in futures]
    else:
        parts = [_simulate_chunk(cfg, phi, burn, common, s, e) for s, e in bounds]

    total = np.zeros(cfg.T)
    for chunk_total, _ in parts:
        total += chunk_total
    aggregate = total / cfg.N

    panel = None
    if cfg.retain_panel:
        panel = np.vstack([row for _, rows in parts for row in rows])

    return PanelRun(aggregate=aggregate, phi_draws=phi, config=cfg,
                    burn_in_max=longest, panel=panel)


# ---------------------------------------------------------------------------
# Autocovariances

def theoretical_acov(u: MomentSequence, sigma_eps: float, H: int) -> Autocovariance:
    """
    gamma(h) = sigma^2 sum_k u_k u_{k+h} for h = 0..H, truncated at K.

    tail_bound is the budget sigma^2 u_K^2 K; for long-memory laws it does
    not bound the error and only the truncation level is meaningful.
    """
    values = np.asarray(u.u, dtype=float)
    K = len(values) - 1
    if H < 0 or H >= K:
        raise DomainError(f"lag range 0..{H} needs H < K = {K}")

    var = sigma_eps * sigma_eps
    gamma = np.array([var * exact_dot(values[:K + 1 - h], values[h:]) for h in range(H + 1)])
    return Autocovariance(gamma=gamma, truncation=K, tail_bound=var * values[-1] ** 2 * K)


def mean_individual_acov(u: MomentSequence, sigma_eps: float, H: int) -> Autocovariance:
    """
    Cross-sectional mean of the unit autocovariances,
    sigma^2 E[phi^h / (1 - phi^2)] = sigma^2 sum_j u_{h+2j}, truncated at K.

    This is not the autocovariance of the limit aggregate.
    """
    values = np.asarray(u.u, dtype=float)
    K = len(values) - 1
    if H < 0 or H >= K:
        raise DomainError(f"lag range 0..{H} needs H < K = {K}")

    var = sigma_eps * sigma_eps
    gamma = np.array([var * math.fsum(values[h::2]) for h in range(H + 1)])
    return Autocovariance(gamma=gamma, truncation=K, tail_bound=None)


def idiosyncratic_variance(phi_draws: np.ndarray, sigma_eta: float) -> float:
    """Variance of the idiosyncratic part of the aggregate, sigma_eta^2 mean(1/(1-phi^2)) / N"""
    phi = np.asarray(phi_draws, dtype=float)
    if phi.size == 0:
        raise DomainError("need at least one draw")
    return sigma_eta * sigma_eta * math.fsum(1.0 / (1.0 - phi * phi)) / phi.size ** 2


def sample_acf(path: np.ndarray, H: int) -> SampleACF:
    """Biased sample autocovariance (divisor T) and autocorrelation up to lag H"""
    x = np.asarray(path, dtype=float)
    T = x.size
    if H < 0:
        raise DomainError(f"lag must be >= 0, got {H}")
    if T <= 10 * H:
        raise DomainError(f"sample ACF up to lag {H} needs T > {10 * H}, got T = {T}")
    if np.ptp(x) == 0:
        raise ConstantPathError("path is constant; autocorrelation is undefined beyond lag 0")

    x = x - x.mean()
    acov = np.array([np.dot(x[:T - h], x[h:]) / T for h in range(H + 1)])
    return SampleACF(acov=acov, acf=acov / acov[0])


# ---------------------------------------------------------------------------
# Aggregation study

def common_variance(spec: DistributionSpec, sigma_eps: float, K: int = 20000) -> float:
    """sigma_eps^2 sum_{k>=0} u_k^2, the variance of the limit aggregate"""
    u = densities.moments(spec, K).u
    return sigma_eps * sigma_eps * exact_dot(u, u)


def aggregation_convergence_study(spec: DistributionSpec, N_list: Sequence[int], T: int,
                                  seeds: Sequence[int], sigma_eps: float = 0.0,
                                  sigma_eta: float = 1.0,
                                  burn_in: int = thresholds.DEFAULT_BURN_IN,
                                  workers: Optional[int] = None) -> StudyReport:
    """
    Aggregate variance across cross-section sizes and seeds.

    With sigma_eps = 0 the variance follows c/N (log-log slope near -1);
    with a common shock it decreases towards the common-part variance.
    """
    N_list = [int(n) for n in N_list]
    if not N_list or any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise DomainError(f"N_list must be strictly increasing, got {N_list}")
    if len(seeds) < 2:
        raise DomainError("the study needs at least two seeds")

    rows: List[StudyRow] = []
    for N in N_list:
        variances = []
        for seed in seeds:
            cfg = PanelConfig(spec=spec, N=N, T=T, burn_in=burn_in, sigma_eps=sigma_eps,
                              sigma_eta=sigma_eta, seed=int(seed))
            run = simulate_panel(cfg, workers=workers)
            variances.append(float(np.var(run.aggregate)))
        rows.append(StudyRow(N=N, variances=variances, mean_variance=math.fsum(variances) / len(variances)))
        logger.info("study N=%d: mean variance %.6g over %d seeds", N, rows[-1].mean_variance, len(seeds))

    means = np.array([row.mean_variance for row in rows])
    slope = None
    if len(rows) >= 2 and np.all(means > 0):
        slope = float(np.polyfit(np.log(N_list), np.log(means), 1)[0])

    target = common_variance(spec, sigma_eps) if sigma_eps > 0 else 0.0
    excess = means - target
    return StudyReport(
        spec=spec, T=T, seeds=[int(s) for s in seeds], sigma_eps=sigma_eps, sigma_eta=sigma_eta,
        rows=rows, loglog_slope=slope, common_variance=target,
        monotone_decrease=bool(np.all(np.diff(means) < 0)),
        approaches_from_above=bool(excess[0] > 0 and abs(excess[-1]) < excess[0]),
    )
