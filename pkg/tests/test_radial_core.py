"""
Tests del núcleo radial: dominios, mallas, perfiles y normas
"""

import math

import numpy as np
import pytest

from kirchhoff_lab.errors import ConfigError
from kirchhoff_lab.radial_core import (
    MIN_CELLS,
    DomainSpec,
    RadialProfile,
    build_grid,
    build_piecewise_grid,
    c1_norm,
    critical_exponent,
    geometric_ladder,
    gradient_sup_norm,
    lebesgue_norm,
    log_slope_fit,
    parallel_map,
    sobolev_norm,
    sobolev_norm_p,
    sup_norm,
)

from tests.conftest import sine_profile


# Dominios
def test_domain_validation():
    """Dominios mal formados se rechazan con ConfigError"""
    with pytest.raises(ConfigError):
        DomainSpec("cube", 3, 1.0, 2.0)
    with pytest.raises(ConfigError):
        DomainSpec("ball", 0, 1.0, 2.0)
    with pytest.raises(ConfigError):
        DomainSpec("ball", 2.5, 1.0, 2.0)
    with pytest.raises(ConfigError):
        DomainSpec("interval", 2, 1.0, 2.0)
    with pytest.raises(ConfigError):
        DomainSpec("ball", 3, -1.0, 2.0)
    with pytest.raises(ConfigError):
        DomainSpec("ball", 3, 1.0, 1.0)


def test_surface_factor_and_volume(ball3):
    """ω_2 = 4π y |B_1| = 4π/3 en R^3"""
    assert ball3.surface_factor == pytest.approx(4.0 * math.pi)
    assert ball3.volume == pytest.approx(4.0 * math.pi / 3.0)
    assert DomainSpec("ball", 2, 1.0, 2.0).surface_factor == pytest.approx(2.0 * math.pi)
    assert DomainSpec("interval", 1, 2.0, 2.0).surface_factor == 1.0


def test_critical_exponent(ball3):
    """p* = pN/(N-p) y error cuando N <= p"""
    assert critical_exponent(ball3) == pytest.approx(6.0)
    assert DomainSpec("ball", 4, 1.0, 2.0).critical_exponent == pytest.approx(4.0)
    assert not DomainSpec("ball", 2, 1.0, 2.0).has_critical_exponent
    with pytest.raises(ConfigError):
        critical_exponent(DomainSpec("ball", 2, 1.0, 2.0))


def test_radial_half(interval_pi, ball3):
    """Un intervalo (0, R) se trabaja como bola de dimensión 1 y radio R/2"""
    half = interval_pi.radial_half()
    assert half.kind == "ball"
    assert half.N == 1
    assert half.R == pytest.approx(math.pi / 2.0)
    assert half.surface_factor == pytest.approx(2.0)
    assert ball3.radial_half() is ball3


# Mallas
def test_grid_shape_and_grading(ball3):
    """Nodos graduados hacia el origen, extremos exactos"""
    grid = build_grid(ball3, 50, grading=2.0)
    assert grid.cells == 50
    assert grid.nodes[0] == 0.0
    assert grid.radius == pytest.approx(1.0)
    assert np.all(np.diff(grid.widths) > 0)
    assert grid.nodes[1] == pytest.approx((1.0 / 50) ** 2)

    boundary = build_grid(ball3, 50, grading=2.0, toward="boundary")
    assert np.all(np.diff(boundary.widths) < 0)


def test_grid_rejects_bad_arguments(ball3):
    """Pocas celdas, graduación < 1 o sentido desconocido"""
    with pytest.raises(ConfigError):
        build_grid(ball3, MIN_CELLS - 1)
    with pytest.raises(ConfigError):
        build_grid(ball3, 20, grading=0.5)
    with pytest.raises(ConfigError):
        build_grid(ball3, 20, toward="centro")
    with pytest.raises(ConfigError):
        build_grid(ball3, 20, radius=0.0)


def test_quadrature_is_exact_for_polynomials(ball3):
    """∫_0^1 ρ^k ρ^{N-1} dρ = 1/(k+N) para polinomios de grado moderado"""
    grid = build_grid(ball3, 12, grading=1.7)
    for k in range(6):
        value = grid.integrate(grid.quad_points**k)
        assert value == pytest.approx(1.0 / (k + 3), rel=1e-13)
    assert np.sum(grid.cell_moments) == pytest.approx(1.0 / 3.0)


def test_scaled_grid(ball3):
    """Escalar la malla escala el volumen radial por factor^N"""
    grid = build_grid(ball3, 16)
    big = grid.scaled(2.0)
    assert big.radius == pytest.approx(2.0)
    assert big.integrate(np.ones_like(big.quad_points)) == pytest.approx(8.0 / 3.0)


def test_piecewise_grid_keeps_breakpoints(ball3):
    """Los puntos de quiebre aparecen como nodos"""
    grid = build_piecewise_grid(ball3, [0.0, 0.3, 1.0], [10, 20], gradings=[1.0, 2.0],
                                towards=["origin", "boundary"])
    assert grid.cells == 30
    assert np.any(np.isclose(grid.nodes, 0.3, rtol=0, atol=1e-15))
    with pytest.raises(ConfigError):
        build_piecewise_grid(ball3, [0.0, 0.5, 0.4], [5, 5])
    with pytest.raises(ConfigError):
        build_piecewise_grid(ball3, [0.0, 0.5, 1.0], [5])


# Perfiles y normas
@pytest.mark.parametrize("i", [1, 2, 5])
def test_sine_norms(i):
    """‖φ_i‖²_W = i², ‖φ_i‖_2 = 1 y sup = √(2/π)"""
    domain, u = sine_profile(i, cells=1680)
    assert sobolev_norm_p(u, domain) == pytest.approx(i**2, rel=1e-10)
    assert sobolev_norm(u, domain) == pytest.approx(float(i), rel=1e-10)
    assert lebesgue_norm(u, 2.0, domain) == pytest.approx(1.0, rel=1e-10)
    assert sup_norm(u) == pytest.approx(math.sqrt(2.0 / math.pi), rel=1e-6)
    assert gradient_sup_norm(u) == pytest.approx(i * math.sqrt(2.0 / math.pi), rel=1e-12)
    assert c1_norm(u) == pytest.approx((1 + i) * math.sqrt(2.0 / math.pi), rel=1e-6)


def test_hermite_matches_analytic(ball3):
    """La interpolación de Hermite converge a la norma exacta"""
    grid = build_grid(ball3, 200)
    rho = grid.nodes
    u = RadialProfile.from_values(grid, 1.0 - rho**2, -2.0 * rho)
    # ‖∇u‖² = 4π∫4ρ²·ρ² dρ = 16π/5
    assert sobolev_norm_p(u, ball3) == pytest.approx(16.0 * math.pi / 5.0, rel=1e-12)
    assert u.representation == "hermite"
    assert u.dirichlet


def test_piecewise_linear_profile(ball3):
    """P1 reproduce funciones lineales y detecta la condición de Dirichlet"""
    grid = build_grid(ball3, 40)
    u = RadialProfile.piecewise_linear(grid, 1.0 - grid.nodes)
    assert u.representation == "p1"
    assert u.dirichlet
    assert np.allclose(u.quad_derivatives, -1.0)
    assert sobolev_norm_p(u, ball3) == pytest.approx(4.0 * math.pi / 3.0)

    v = RadialProfile.piecewise_linear(grid, np.ones_like(grid.nodes))
    assert not v.dirichlet
    with pytest.raises(ConfigError):
        RadialProfile.piecewise_linear(grid, [1.0, 2.0])


def test_profile_arithmetic(ball3, rng):
    """Combinaciones lineales nodo a nodo y parte positiva"""
    grid = build_grid(ball3, 30)
    for _ in range(5):
        a = rng.normal(size=grid.nodes.size)
        b = rng.normal(size=grid.nodes.size)
        t = float(rng.uniform(-3, 3))
        u = RadialProfile.piecewise_linear(grid, a)
        v = RadialProfile.piecewise_linear(grid, b)
        assert np.allclose((u + v).values, a + b)
        assert np.allclose((u - v).quad_values, u.quad_values - v.quad_values)
        assert np.allclose((t * u).values, t * a)
        assert np.allclose((u * t).quad_derivatives, t * u.quad_derivatives)
        pos = u.positive_part()
        assert np.all(pos.values >= 0)
        assert np.all(pos.quad_values >= 0)
    assert RadialProfile.zero(grid).is_zero()


def test_profile_rejects_nonfinite(ball3):
    """Un perfil con NaN no se construye"""
    grid = build_grid(ball3, 10)
    values = np.zeros_like(grid.nodes)
    values[3] = np.nan
    with pytest.raises(ConfigError):
        RadialProfile.piecewise_linear(grid, values)


def test_sum_on_different_grids(ball3):
    u = RadialProfile.zero(build_grid(ball3, 10))
    v = RadialProfile.zero(build_grid(ball3, 12))
    with pytest.raises(ConfigError):
        u + v


def test_lebesgue_norm_rejects_small_exponent(ball3):
    u = RadialProfile.zero(build_grid(ball3, 10))
    with pytest.raises(ConfigError):
        lebesgue_norm(u, 0.5, ball3)
    with pytest.raises(ConfigError):
        lebesgue_norm(u, math.inf, ball3)


def test_table_columns(ball3):
    grid = build_grid(ball3, 10)
    u = RadialProfile.piecewise_linear(grid, 1.0 - grid.nodes)
    cols = u.table()
    assert set(cols) == {"rho", "u", "du"}
    assert len(cols["rho"]) == 11


# Utilidades
def test_log_slope_fit_recovers_power_law():
    """y = 3 x^{-1.5} da pendiente -1.5 y residuo ~ 0"""
    x = np.geomspace(1e-3, 1.0, 12)
    slope, intercept, residual = log_slope_fit(x, 3.0 * x**-1.5)
    assert slope == pytest.approx(-1.5, abs=1e-12)
    assert math.exp(intercept) == pytest.approx(3.0, rel=1e-12)
    assert residual < 1e-10
    with pytest.raises(ConfigError):
        log_slope_fit([1.0], [1.0])


def test_geometric_ladder():
    ladder = geometric_ladder(1.0, 0.5, 4)
    assert ladder == [1.0, 0.5, 0.25, 0.125]
    with pytest.raises(ConfigError):
        geometric_ladder(1.0, 0.5, 1)
    with pytest.raises(ConfigError):
        geometric_ladder(1.0, 1.0, 3)
    with pytest.raises(ConfigError):
        geometric_ladder(-1.0, 2.0, 3)


@pytest.mark.parametrize("threads", [1, 4])
def test_parallel_map_keeps_order(threads):
    """El resultado no depende del número de hilos"""
    assert parallel_map(lambda k: k * k, range(20), threads) == [k * k for k in range(20)]


def test_norms_are_absolutely_homogeneous(rng):
    """‖cu‖ = |c|·‖u‖ para W, L^s y sup en 200 casos al azar"""
    for _ in range(200):
        N = int(rng.integers(1, 6))
        domain = DomainSpec("ball", N, rng.uniform(0.5, 3.0), rng.uniform(1.2, 4.0))
        grid = build_grid(domain, int(rng.integers(20, 120)), rng.uniform(1.0, 2.0))
        k = rng.uniform(-1.0, 1.0, size=3)
        w = (np.arange(3) + 0.5) * math.pi / domain.R

        def u(x, k=k, w=w):
            return np.cos(x[..., None] * w) @ k

        def du(x, k=k, w=w):
            return -np.sin(x[..., None] * w) @ (k * w)

        profile = RadialProfile.from_function(grid, u, du, dirichlet=True)
        c = rng.uniform(0.1, 5.0) * rng.choice([-1.0, 1.0])
        s = rng.uniform(1.0, 8.0)
        scaled = profile.scale(c)
        assert sobolev_norm(scaled, domain) == pytest.approx(abs(c) * sobolev_norm(profile, domain), rel=1e-12)
        assert lebesgue_norm(scaled, s, domain) == pytest.approx(
            abs(c) * lebesgue_norm(profile, s, domain), rel=1e-12
        )
        assert sup_norm(scaled) == pytest.approx(abs(c) * sup_norm(profile), rel=1e-14)
