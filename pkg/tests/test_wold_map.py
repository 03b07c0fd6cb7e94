import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from aggmem import complexfn, densities, wold_map
from aggmem.errors import DegenerateDistributionError, DomainError
from aggmem.results import MomentSequence
from aggmem.schemas import BetaSpec, DiracSpec, MemoryClass, PolynomialSpec


def test_uniform_first_coefficients(uniform):
    a = wold_map.ar_coefficients(uniform, 3)
    assert_allclose(a.a, [1 / 2, 1 / 12, 1 / 24], rtol=1e-14)
    assert_allclose(a.partial_sums, [1 / 2, 7 / 12, 15 / 24], rtol=1e-14)


def test_beta_first_four_coefficients(beta23):
    a = wold_map.ar_coefficients(beta23, 4)
    assert_allclose(a.a, [0.4, 0.04, 16 / 875, 0.0104], rtol=1e-12)


def test_dirac_has_only_first_coefficient():
    a = wold_map.ar_coefficients(DiracSpec(phi0=0.3), 20)
    assert a.a[0] == 0.3
    assert np.max(np.abs(a.a[1:])) < 1e-15


def test_round_trip(family):
    u = densities.moments(family, 200)
    back = wold_map.ma_from_ar(wold_map.ar_from_ma(u))
    assert back.exactness == "recurrence"
    assert np.max(np.abs(back.u - u.u)) < 1e-10


def test_coefficients_nonnegative_and_sums_bounded(family):
    a = wold_map.ar_coefficients(family, 400)
    assert np.min(a.a) > -1e-13
    assert np.all(np.diff(a.partial_sums) >= -1e-13)
    assert a.partial_sums[-1] <= 1.0 + 1e-9


def test_coefficient_accessor(beta23):
    a = wold_map.ar_coefficients(beta23, 5)
    assert a.coefficient(1) == pytest.approx(0.4)
    with pytest.raises(DomainError):
        a.coefficient(6)


def test_empty_sequences_rejected():
    with pytest.raises(DomainError):
        wold_map.ar_from_ma(MomentSequence(u=np.array([1.0])))
    with pytest.raises(DomainError):
        wold_map.ma_from_ar([])


# ---------------------------------------------------------------------------
# Persistence

@pytest.mark.parametrize("p,q,expected", [
    (2, 3, 0.5),
    (1, 2, 0.5),
    (0.5, 1.5, 0.5 / 1.0),
    (2, 1, 1.0),
    (1, 0.8, 1.0),
])
def test_beta_persistence(p, q, expected):
    assert wold_map.persistence(BetaSpec(p=p, q=q)) == pytest.approx(expected, abs=1e-15)


def test_persistence_other_families(uniform, hump, dirac05, generic_hump):
    assert wold_map.persistence(uniform) == 1.0
    assert wold_map.persistence(hump) == pytest.approx(2 / 3, abs=1e-14)
    assert wold_map.persistence(dirac05) == 0.5
    assert wold_map.persistence(generic_hump) == pytest.approx(2 / 3, abs=1e-9)
    assert wold_map.persistence(PolynomialSpec(c=[0, 2])) == 1.0


def test_persistence_report(beta23, uniform):
    report = wold_map.persistence_report(beta23)
    assert report.a1_limit == 0.5
    assert report.memory_class == MemoryClass.SHORT
    assert report.method == "closed form"

    report = wold_map.persistence_report(uniform)
    assert report.a1_limit == 1.0
    assert report.memory_class == MemoryClass.LONG


def test_partial_sums_approach_persistence(beta23, hump):
    for spec in (beta23, hump):
        S = wold_map.partial_sum_trajectory(wold_map.ar_coefficients(spec, 5000))
        assert S[-1] == pytest.approx(wold_map.persistence(spec), abs=1e-3)


@pytest.mark.slow
def test_uniform_partial_sums_creep_towards_one(uniform):
    S = wold_map.partial_sum_trajectory(wold_map.ar_coefficients(uniform, wold_map.LONG_ORDER))
    assert S[49] < S[199] < S[999] < S[4999] < 1.0
    assert S[4999] > 0.8


# ---------------------------------------------------------------------------
# Random recurrence and disaggregation

def test_random_recurrence_matches_moment_route(beta23):
    rng = np.random.default_rng(7)
    phi = rng.beta(2, 3, size=200_000)
    empirical = wold_map.random_ar_recurrence(phi, 4)
    exact = wold_map.ar_coefficients(beta23, 4).a
    assert_allclose(empirical, exact, atol=5e-3)


def test_random_recurrence_is_exact_on_sample_moments():
    phi = np.array([0.1, 0.4, 0.7, 0.9])
    sample_u = MomentSequence(u=np.array([np.mean(phi ** k) for k in range(7)]), exactness="empirical")
    assert_allclose(wold_map.random_ar_recurrence(phi, 6), wold_map.ar_from_ma(sample_u).a, atol=1e-14)


def test_disaggregate_beta(beta23):
    a = wold_map.ar_coefficients(beta23, 4).a
    m = wold_map.disaggregate_moments(*a)
    assert m.mean == pytest.approx(0.4, abs=1e-14)
    assert m.variance == pytest.approx(0.04, abs=1e-14)
    assert m.skewness == pytest.approx(2 / 7, abs=1e-10)
    assert m.kurtosis == pytest.approx(33 / 14, abs=1e-9)


def test_disaggregate_uniform(uniform):
    a = wold_map.ar_coefficients(uniform, 4).a
    m = wold_map.disaggregate_moments(*a)
    assert m.mean == pytest.approx(0.5, abs=1e-15)
    assert m.variance == pytest.approx(1 / 12, abs=1e-15)
    assert m.skewness == pytest.approx(0.0, abs=1e-12)
    assert m.kurtosis == pytest.approx(9 / 5, abs=1e-10)


def test_disaggregate_degenerate_keeps_mean(dirac05):
    a = wold_map.ar_coefficients(dirac05, 4).a
    with pytest.raises(DegenerateDistributionError) as info:
        wold_map.disaggregate_moments(*a)
    assert info.value.mean == 0.5


def test_disaggregate_needs_higher_coefficients():
    with pytest.raises(DomainError):
        wold_map.disaggregate_moments(0.4, 0.04)


def test_cesaro_weighted_decays(beta23):
    a = wold_map.ar_coefficients(beta23, 1600)
    values = [wold_map.cesaro_weighted(a, n) for n in (100, 400, 1600)]
    assert values[0] > values[1] > values[2]
    with pytest.raises(DomainError):
        wold_map.cesaro_weighted(a, 1601)
    assert math.isfinite(values[-1])


BETA_GRID = [BetaSpec(p=p, q=q) for p in (0.5, 1.0, 2.0, 4.0) for q in (1.5, 2.0, 3.0)]


@pytest.mark.parametrize("spec", BETA_GRID, ids=lambda s: s.describe())
def test_beta_grid_persistence_and_partial_sums(spec):
    expected = spec.p / (spec.p + spec.q - 1.0)
    assert wold_map.persistence(spec) == pytest.approx(expected, abs=1e-12)
    S = wold_map.ar_coefficients(spec, 500).partial_sums
    assert S[-1] <= expected + 1e-12
    if spec.q >= 2:
        assert S[-1] == pytest.approx(expected, abs=0.05)


def test_uniform_coefficients_positive(uniform):
    assert np.all(wold_map.ar_coefficients(uniform, 200).a > 0)


@pytest.mark.parametrize("spec", BETA_GRID, ids=lambda s: s.describe())
def test_beta_gap_to_persistence_shrinks(spec):
    expected = spec.p / (spec.p + spec.q - 1.0)
    S = wold_map.ar_coefficients(spec, 200).partial_sums
    gaps = [abs(S[K - 1] - expected) for K in (50, 100, 200)]
    assert gaps[0] > gaps[1] > gaps[2]


def test_truncated_generating_function_matches_a_of_z(family):
    a = wold_map.ar_coefficients(family, 600)
    k = np.arange(1, a.K + 1)
    tol = 1e-9 if a.source is not None and a.source.exactness == "quadrature" else 1e-12
    for r in np.linspace(0.1, 0.9, 9):
        truncated = math.fsum(a.a * r ** k)
        assert truncated == pytest.approx(complexfn.a_of_z(family, r).value.real, abs=tol)


def test_beta23_generating_function_at_point_nine(beta23):
    a = wold_map.ar_coefficients(beta23, 600)
    truncated = math.fsum(a.a * 0.9 ** np.arange(1, 601))
    assert truncated == pytest.approx(complexfn.a_of_z(beta23, 0.9).value.real, abs=1e-12)
