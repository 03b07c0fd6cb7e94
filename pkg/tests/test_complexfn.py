import math
from fractions import Fraction

import numpy as np
import pytest
from numpy.testing import assert_allclose

from aggmem import complexfn, densities, wold_map
from aggmem.errors import (
    DomainError,
    ExtrapolationError,
    MethodDomainError,
    PoleError,
    UnsupportedEvaluationError,
)
from aggmem.schemas import BetaSpec, DiracSpec, PolynomialSpec, UniformSpec

INTERIOR = [0.3, -0.7, 0.6j, 0.8 * np.exp(2.0j), 0.9 * np.exp(-0.4j), 0.55 + 0.55j]


def test_dirac_closed_form():
    z = np.array(INTERIOR)
    assert_allclose(complexfn.m_values(DiracSpec(phi0=0.5), z), 0.5 * z / (1 - 0.5 * z), rtol=1e-15)


def test_uniform_boundary_value(uniform):
    assert complexfn.m_values(uniform, -1)[0] == pytest.approx(math.log(2.0) - 1.0, abs=1e-15)


def test_series_and_integral_agree(family):
    u = densities.moments(family, 2000)
    for z in INTERIOR:
        series = complexfn.m_series(u, z)
        integral = complexfn.m_integral(family, z)
        assert series.remainder_bound < 1e-12
        assert abs(series.value - integral.value) < 1e-9


@pytest.mark.parametrize("degree", [24, 30, 40])
def test_series_and_integral_agree_for_high_degree_polynomials(degree):
    # density (d + 1) x^d
    spec = PolynomialSpec(c=[0.0] * degree + [degree + 1.0])
    u = densities.moments(spec, 2000)
    for z in INTERIOR + [0.5, -0.5, 0.95j]:
        series = complexfn.m_series(u, z)
        integral = complexfn.m_integral(spec, z)
        assert abs(series.value - integral.value) < max(1e-9, series.remainder_bound)


def test_beta_one_one_matches_uniform_on_the_disc(uniform):
    flat = BetaSpec(p=1, q=1)
    z = np.concatenate([np.array(INTERIOR), np.exp(1j * np.array([0.5, 2.0, np.pi, 4.0]))])
    assert_allclose(complexfn.m_values(flat, z), complexfn.m_values(uniform, z), atol=1e-11)


def test_beta_real_axis_uses_hypergeometric(beta23):
    value = complexfn.m_integral(beta23, 0.75)
    assert value.method == "closed-form"
    series = complexfn.m_series(densities.moments(beta23, 400), 0.75)
    assert value.value == pytest.approx(series.value, abs=1e-12)


def test_a_of_z_small_argument(beta23):
    # a(z) = a_1 z + O(z^2)
    z = 1e-4
    assert complexfn.a_of_z(beta23, z).value == pytest.approx(0.4 * z, rel=1e-3)


def test_pole_and_outside_points(beta23):
    with pytest.raises(PoleError):
        complexfn.m_values(beta23, 1.0)
    with pytest.raises(PoleError):
        complexfn.a_of_z(beta23, 1)
    with pytest.raises(DomainError):
        complexfn.m_values(beta23, 1.5j)


def test_series_needs_open_disc(beta23):
    u = densities.moments(beta23, 50)
    with pytest.raises(MethodDomainError):
        complexfn.m_series(u, -1)


def test_heavy_beta_boundary_unsupported():
    spec = BetaSpec(p=1, q=0.8)
    with pytest.raises(UnsupportedEvaluationError):
        complexfn.m_values(spec, -1)
    # the open disc is fine
    assert np.isfinite(complexfn.m_values(spec, -0.9)[0])


def test_grid_sweep_columns(hump):
    grid = complexfn.default_disc_grid(radii=(0.5, 0.9), n_angles=16)
    table = complexfn.grid_sweep(hump, grid)
    assert table.shape == (32, 6)
    m = table[:, 2] + 1j * table[:, 3]
    a = table[:, 4] + 1j * table[:, 5]
    assert_allclose(a, m / (1 + m), rtol=1e-14)


def test_default_grid_excludes_one():
    grid = complexfn.default_disc_grid(radii=(0.5, 1.0), n_angles=8)
    assert 1 not in grid
    assert len(grid) == 15


# ---------------------------------------------------------------------------
# Abel limits

def test_beta_abel_limit(beta23):
    table = complexfn.abel_limit(beta23)
    assert table.monotone
    assert table.method == "aitken"
    assert table.estimate == pytest.approx(0.5, abs=1e-6)
    assert list(table.levels) == list(range(4, 25))


def test_dirac_abel_limit_is_exact_after_acceleration(dirac05):
    assert complexfn.abel_limit(dirac05).estimate == pytest.approx(0.5, abs=1e-12)


def test_polynomial_abel_limit(hump):
    assert complexfn.abel_limit(hump).estimate == pytest.approx(2 / 3, abs=1e-5)


def test_uniform_abel_is_raw_and_logarithmic(uniform):
    table = complexfn.abel_limit(uniform)
    assert table.method == "raw"
    # a(1 - 2^-24) = 1 - (1 - 2^-24) / (24 log 2)
    assert table.estimate == pytest.approx(0.9399, abs=1e-4)
    assert table.m_increment_ratio() == pytest.approx(1.0, abs=2e-3)


def test_m_abel_table_bounded_iff_short_memory(beta23, uniform):
    short = [m for _, _, m in complexfn.m_abel_table(beta23)]
    long_ = [m for _, _, m in complexfn.m_abel_table(uniform)]
    assert short[-1] == pytest.approx(1.0, abs=1e-6)
    assert long_[-1] - long_[-2] == pytest.approx(math.log(2.0), abs=1e-5)


def test_non_monotone_table_raises(beta23, monkeypatch):
    levels, _ = complexfn.abel_levels()
    wobbly = np.linspace(0.1, 0.9, len(levels))
    wobbly[10] = 0.05
    monkeypatch.setattr(complexfn, "m_values", lambda spec, z: wobbly.astype(complex))
    with pytest.raises(ExtrapolationError) as info:
        complexfn.abel_limit(beta23)
    assert len(info.value.table) == len(levels)


# ---------------------------------------------------------------------------
# Analytic properties

def test_real_part_positivity(family):
    assert complexfn.re_positivity_check(family) > 0


@pytest.mark.parametrize("r", [0.5, 0.9, 0.99])
def test_circle_injectivity(family, r):
    report = complexfn.circle_injectivity_check(family, r, n_angles=360)
    assert report.passed, report.violations


def test_injectivity_vacuous_for_dirac_at_zero():
    report = complexfn.circle_injectivity_check(DiracSpec(phi0=0.0), 0.5)
    assert report.vacuous
    assert report.passed


def test_injectivity_radius_domain(beta23):
    with pytest.raises(DomainError):
        complexfn.circle_injectivity_check(beta23, 1.0)


# ---------------------------------------------------------------------------
# Stirling route for the uniform law

def test_stirling_rows():
    rows = complexfn.stirling_first_kind(4)
    assert rows[3] == [0, 2, -3, 1]
    assert rows[4] == [0, -6, 11, -6, 1]


def test_scaled_integrals_are_exact_rationals():
    values = complexfn.scaled_falling_factorial_integrals(3)
    assert values == [Fraction(1, 2), Fraction(-1, 12), Fraction(1, 24)]


def test_uniform_stirling_matches_moment_route():
    stirling = complexfn.uniform_ar_stirling(30)
    recurrence = wold_map.ar_coefficients(UniformSpec(), 30)
    assert_allclose(stirling.a, recurrence.a, rtol=1e-9)


def test_stirling_beyond_exact_limit_logs(caplog):
    with caplog.at_level("INFO", logger="aggmem.complexfn"):
        values = complexfn.scaled_falling_factorial_integrals(25, exact_limit=20)
    assert isinstance(values[19], Fraction)
    assert isinstance(values[24], float)
    assert "exact Stirling arithmetic stops" in caplog.text


def test_uniform_abel_table_matches_closed_form(uniform):
    table = complexfn.abel_limit(uniform)
    closed = 1.0 + table.r / np.log(1.0 - table.r)
    assert_allclose(table.a_r, closed, rtol=0, atol=1e-10)


def test_heavy_beta_positivity_on_interior_grid():
    assert complexfn.re_positivity_check(BetaSpec(p=1, q=0.8)) > 0
