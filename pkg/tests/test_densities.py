import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from pydantic import ValidationError

from aggmem import densities
from aggmem.errors import DomainError, NumericalIntegrityError, SquareSummabilityWarning
from aggmem.schemas import (
    BetaSpec,
    DiracSpec,
    GenericSpec,
    MemoryClass,
    PanelConfig,
    PolynomialSpec,
    TabulatedSpec,
    UniformSpec,
    parse_spec,
    spec_to_dict,
)


def test_beta_moments_recurrence():
    u = densities.beta_moments(2, 3, 3).u
    assert_allclose(u, [1.0, 0.4, 0.2, 0.8 / 7], rtol=1e-15)


def test_beta_one_one_is_uniform_bit_for_bit():
    assert np.array_equal(densities.beta_moments(1, 1, 50).u, densities.uniform_moments(50).u)


def test_uniform_moments():
    u = densities.uniform_moments(4).u
    assert_allclose(u, [1, 1 / 2, 1 / 3, 1 / 4, 1 / 5], rtol=1e-15)


def test_polynomial_moments_hump():
    u = densities.poly_moments([0, 6, -6], 4).u
    expected = [6.0 / ((k + 2) * (k + 3)) for k in range(5)]
    assert_allclose(u, expected, rtol=1e-14)


def test_polynomial_constant_density_matches_uniform():
    assert_allclose(densities.poly_moments([1.0], 30).u, densities.uniform_moments(30).u, rtol=1e-15)


def test_dirac_moments_exact():
    assert list(densities.dirac_moments(0.5, 3).u) == [1.0, 0.5, 0.25, 0.125]


def test_generic_moments_by_quadrature():
    u = densities.generic_moments(lambda x: 2.0 * x, 6)
    assert u.exactness == "quadrature"
    assert_allclose(u.u, [2.0 / (k + 2) for k in range(7)], atol=1e-12)
    assert u.quadrature_error < 1e-12


def test_moments_dispatch(family):
    u = densities.moments(family, 20)
    assert u.K == 20
    assert u.u[0] == 1.0
    assert np.all(np.diff(u.u) <= 0)
    assert np.all(u.u >= 0)


@pytest.mark.parametrize("K", [0, -1, 2.5])
def test_invalid_order(K):
    with pytest.raises(DomainError):
        densities.uniform_moments(K)


def test_beta_rejects_nonpositive_parameters():
    with pytest.raises(DomainError):
        densities.beta_moments(0, 1, 5)


def test_monotone_enforcement():
    clamped = densities._enforce_monotone([1.0, 0.5, 0.5 + 1e-13], 1e-9)
    assert clamped[2] == 0.5
    with pytest.raises(NumericalIntegrityError):
        densities._enforce_monotone([1.0, 0.5, 0.6], 1e-9)


# ---------------------------------------------------------------------------
# Spec validation

def test_polynomial_must_be_normalized():
    with pytest.raises(ValidationError, match="integrate to one"):
        PolynomialSpec(c=[1.0, 1.0])


def test_polynomial_must_be_nonnegative():
    # 4 - 6x integrates to one but is negative near 1
    with pytest.raises(ValidationError, match="negative"):
        PolynomialSpec(c=[4.0, -6.0])


def test_dirac_outside_unit_interval():
    with pytest.raises(ValidationError):
        DiracSpec(phi0=1.0)


def test_beta_square_summability_warning():
    with pytest.warns(SquareSummabilityWarning):
        BetaSpec(p=1, q=0.4)


def test_tabulated_density_validation():
    spec = TabulatedSpec(x=[0.0, 0.5, 1.0], f=[0.0, 1.0, 2.0])
    assert_allclose(spec.density(np.array([0.25, 0.75])), [0.5, 1.5])
    with pytest.raises(ValidationError):
        TabulatedSpec(x=[0.0, 1.0], f=[1.0, 2.0])
    with pytest.raises(ValidationError):
        TabulatedSpec(x=[0.0, 0.7, 0.5, 1.0], f=[1.0, 1.0, 1.0, 1.0])


def test_generic_density_normalization():
    with pytest.raises(ValidationError):
        GenericSpec(density=lambda x: 3.0 * x)


def test_spec_json_round_trip():
    for spec in (BetaSpec(p=2, q=3), UniformSpec(), PolynomialSpec(c=[0, 2]), DiracSpec(phi0=0.3)):
        assert parse_spec(spec_to_dict(spec)) == spec


def test_panel_config_needs_some_noise(uniform):
    with pytest.raises(ValidationError):
        PanelConfig(spec=uniform, N=10, T=10, sigma_eps=0, sigma_eta=0, seed=1)


# ---------------------------------------------------------------------------
# Short vs. long memory

def test_mean_inverse_gap_closed_forms(beta23, uniform, hump, dirac05):
    assert densities.mean_inverse_gap(beta23) == pytest.approx(2.0, abs=1e-15)
    assert math.isinf(densities.mean_inverse_gap(uniform))
    assert densities.mean_inverse_gap(hump) == pytest.approx(3.0, abs=1e-14)
    assert densities.mean_inverse_gap(dirac05) == 2.0


def test_mean_ratio_gap_is_an_independent_route(beta23, hump, dirac05):
    for spec in (beta23, hump, dirac05):
        assert densities.mean_ratio_gap(spec) == pytest.approx(densities.mean_inverse_gap(spec) - 1.0, abs=1e-13)


def test_generic_short_memory_gap(generic_hump):
    assert densities.mean_inverse_gap(generic_hump) == pytest.approx(3.0, abs=1e-9)
    assert densities.memory_class(generic_hump) == MemoryClass.SHORT


def test_generic_long_memory_detected():
    spec = GenericSpec(density=lambda x: 2.0 * np.asarray(x), label="2x")
    assert math.isinf(densities.mean_inverse_gap(spec))
    assert densities.memory_class(spec) == MemoryClass.LONG


@pytest.mark.parametrize("p,q,expected", [
    (2, 3, MemoryClass.SHORT),
    (0.5, 1.5, MemoryClass.SHORT),
    (2, 1, MemoryClass.LONG),
    (1, 0.8, MemoryClass.LONG),
])
def test_beta_memory_class(p, q, expected):
    assert densities.memory_class(BetaSpec(p=p, q=q)) == expected


def test_polynomial_memory_class_follows_f1():
    assert densities.memory_class(PolynomialSpec(c=[0, 6, -6])) == MemoryClass.SHORT
    assert densities.memory_class(PolynomialSpec(c=[0, 2])) == MemoryClass.LONG


def test_beta_generating_limit():
    assert densities.beta_generating_limit(2, 3) == 2.0
    assert math.isinf(densities.beta_generating_limit(1, 0.5))


@pytest.mark.parametrize("c", [[0, 2], [0, 6, -6], [3, -6, 3]])
def test_polynomial_diagonal_sums_add_up(c):
    K = 60
    s1, s2, s3 = densities.polynomial_diagonal_sums(c, K)
    direct = math.fsum(densities.poly_moments(c, K).u)
    assert s1 + s2 + s3 == pytest.approx(direct, abs=1e-12)


def test_diagonal_sum_carries_the_divergence():
    _, s2_small, _ = densities.polynomial_diagonal_sums([0, 2], 100)
    _, s2_large, _ = densities.polynomial_diagonal_sums([0, 2], 10000)
    expected = 2.0 * math.fsum(1.0 / (n + 1) for n in range(101, 10001))
    assert s2_large - s2_small == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(2.0 * math.log(10001 / 101), abs=2e-2)
    _, s2_zero, _ = densities.polynomial_diagonal_sums([0, 6, -6], 100)
    assert s2_zero == pytest.approx(0.0, abs=1e-12)


def test_diagonal_sums_need_k_above_degree():
    with pytest.raises(DomainError):
        densities.polynomial_diagonal_sums([0, 6, -6], 2)
