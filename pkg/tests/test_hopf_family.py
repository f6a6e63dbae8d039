"""
Tests de la familia sin lema de Hopf y del ejemplo de senos
"""

import math

import numpy as np
import pytest

from kirchhoff_lab.errors import ConfigError, NumericalError
from kirchhoff_lab.hopf_family import (
    UNIT_BALL,
    CompactSupportProfile,
    family_parameters,
    scale_family,
    scaling_defects,
    shoot_compact_support,
    sine_example,
    verify_family,
)
from kirchhoff_lab.radial_core import RadialProfile, build_grid, sobolev_norm_p


@pytest.fixture
def bump_phi():
    """Perfil sintético (1 - (ρ/ρ₀)²)² con soporte en [0, 1/2]; no es solución"""
    rho0 = 0.5
    grid = build_grid(UNIT_BALL, 200, radius=rho0)
    support = RadialProfile.from_function(
        grid,
        lambda r: (1.0 - (r / rho0) ** 2) ** 2,
        lambda r: -4.0 * r / rho0**2 * (1.0 - (r / rho0) ** 2),
        dirichlet=True,
    )
    return CompactSupportProfile(
        q=1.2, varpi=1.4, b0=1.0, d=1.0, rho0=rho0, profile=support,
        support=support, flat_residual=0.0,
    )


@pytest.mark.parametrize("i", [1, 2, 3])
def test_sine_example(i):
    """‖φ_i‖²_W = i², sup = √(2/π) y norma C¹ = (1 + i)√(2/π)"""
    report = sine_example(i)
    assert report.W2_defect < 1e-9 * i**2
    assert report.sup == pytest.approx(math.sqrt(2.0 / math.pi), rel=1e-6)
    assert report.C1 == pytest.approx((1 + i) * math.sqrt(2.0 / math.pi), rel=1e-6)
    assert report.residual < 1e-7
    assert report.summary()["provenance"] == "computed"


def test_sine_example_rejects_bad_index():
    with pytest.raises(ConfigError):
        sine_example(0)
    with pytest.raises(ConfigError):
        sine_example(1.5)


def test_family_parameters():
    """N = 3, r = 5, ϖ = 1.4: α = (1/2)(6-5)/(5-1.4)"""
    params = family_parameters(3, 5.0, 1.4, 1.2, 3.0, 2.0)
    assert params.two_star == pytest.approx(6.0)
    assert params.alpha == pytest.approx(0.5 / 3.6)
    assert params.E == pytest.approx((2.0**3 * 3.0) ** (1.0 / 3.6))
    assert not params.critical
    lam = 10.0
    assert params.mu(lam) == pytest.approx(lam ** (-params.alpha) / params.E)
    assert params.a(lam) == pytest.approx(params.mu(lam) ** 0.2 / 3.0)


def test_family_parameters_critical_and_errors():
    critical = family_parameters(3, 6.0, 1.4, 1.2, 1.0, 1.0)
    assert critical.critical
    assert critical.alpha == 0.0
    with pytest.raises(ConfigError):
        family_parameters(2, 5.0, 1.4, 1.2, 1.0, 1.0)
    with pytest.raises(ConfigError, match="family.r"):
        family_parameters(3, 2.5, 1.4, 1.2, 1.0, 1.0)
    with pytest.raises(ConfigError, match="family.r"):
        family_parameters(3, 7.0, 1.4, 1.2, 1.0, 1.0)


def test_scale_family_exact_factors(bump_phi):
    """sup escala con μ, sup|∇| con μλ y ‖·‖²_W con μ²λ^{2-N}"""
    scaled = scale_family(bump_phi, 2.0, 3.0)
    assert scaled.grid.radius == pytest.approx(0.25)
    assert np.allclose(scaled.values, 3.0 * bump_phi.support.values)
    defects = scaling_defects(bump_phi, scaled, 2.0, 3.0)
    assert max(defects.values()) < 1e-12
    base = sobolev_norm_p(bump_phi.support, UNIT_BALL)
    assert sobolev_norm_p(scaled, UNIT_BALL) == pytest.approx(9.0 * 2.0 ** -1 * base, rel=1e-12)


def test_scale_family_errors(bump_phi):
    with pytest.raises(ConfigError, match="excede"):
        scale_family(bump_phi, 0.4, 1.0)
    with pytest.raises(ConfigError):
        scale_family(bump_phi, 2.0, 0.0)


def test_verify_family_rejects_non_solution(bump_phi):
    """Un perfil que no resuelve la ecuación deja residuo grande"""
    params = family_parameters(3, 5.0, 1.4, 1.2, 1.0, bump_phi.W_norm)
    with pytest.raises(NumericalError):
        verify_family(params, bump_phi, [1.0, 10.0])
    with pytest.raises(ConfigError):
        verify_family(params, bump_phi, [0.5, 10.0])


def test_shoot_compact_support_validation():
    with pytest.raises(ConfigError):
        shoot_compact_support(q=1.4, varpi=1.2)
    with pytest.raises(ConfigError):
        shoot_compact_support(q=1.2, varpi=2.5)
    with pytest.raises(ConfigError):
        shoot_compact_support(b0=0.0)


@pytest.mark.slow
def test_compact_support_family():
    """Perfil plano con soporte dentro de la bola y familia con sup acotado"""
    phi = shoot_compact_support()
    assert 0.0 < phi.rho0 < 1.0
    assert phi.flat_residual < 1e-6 * phi.d
    outside = phi.profile.grid.nodes > phi.rho0
    assert np.all(phi.profile.values[outside] == 0.0)

    params = family_parameters(3, 5.0, phi.varpi, phi.q, phi.b0, phi.W_norm)
    report = verify_family(params, phi, [1.0, 10.0, 100.0, 1000.0])
    assert report.sup_slope == pytest.approx(-params.alpha, abs=1e-9)
    assert report.sup_bounded
    assert report.c1_slope > 0
    assert report.max_identity_defect < 1e-9
    assert report.a_constant is None
    assert all(row["scaling_defect"] < 1e-12 for row in report.rows())
