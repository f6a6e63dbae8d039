"""
Tests de los instantones de Sobolev, el corte y sus asintóticas
"""

import math

import numpy as np
import pytest

from kirchhoff_lab.errors import ConfigError
from kirchhoff_lab.instanton import (
    InstantonParams,
    beta_for_alpha,
    cutoff_derivative,
    cutoff_value,
    instanton_profile,
    instanton_value,
    normalization_constant,
    predicted_eta,
    predicted_slope,
    psi_profile,
    regime,
    sobolev_level,
    truncated_profile,
    verify_asymptotics,
    verify_sobolev_level,
    verify_truncation_rates,
)
from kirchhoff_lab.radial_core import DomainSpec, build_grid, geometric_ladder, lebesgue_norm_s, sobolev_norm_p

# En R^3 con p = 2: C = √3 y S = 3(π/2)^{4/3}
SOBOLEV_S3 = 3.0 * (math.pi / 2.0) ** (4.0 / 3.0)
LEVEL_3 = 3.0 * math.sqrt(3.0) * math.pi**2 / 4.0


def test_normalization_constant_closed_form(ball3):
    """C_{3,2} = √3 para cualquier escala ε"""
    assert normalization_constant(ball3) == pytest.approx(math.sqrt(3.0), rel=1e-9)
    assert normalization_constant(ball3, eps=1e-3) == pytest.approx(math.sqrt(3.0), rel=1e-8)


def test_sobolev_level_closed_form(ball3):
    C, level, S = sobolev_level(ball3)
    assert level == pytest.approx(LEVEL_3, rel=1e-9)
    assert S == pytest.approx(SOBOLEV_S3, rel=1e-9)


def test_instanton_requires_critical_exponent():
    with pytest.raises(ConfigError):
        sobolev_level(DomainSpec("ball", 2, 1.0, 2.0))
    with pytest.raises(ConfigError):
        normalization_constant(DomainSpec("ball", 3, 1.0, 3.0))


def test_cutoff_shape():
    """ξ_m vale 1 en B_{1/(2m)}, 0 fuera de B_{1/m}, pendiente máxima 3m"""
    m = 4.0
    rho = np.linspace(0.0, 0.5, 2001)
    xi = cutoff_value(m, rho)
    assert np.all(xi[rho <= 0.125] == 1.0)
    assert np.all(xi[rho >= 0.25] == 0.0)
    assert np.all(np.diff(xi) <= 0.0)
    assert np.max(np.abs(cutoff_derivative(m, rho))) == pytest.approx(3.0 * m, rel=1e-6)
    with pytest.raises(ConfigError):
        cutoff_value(0.0, rho)


def test_params_validation(ball3):
    with pytest.raises(ConfigError):
        InstantonParams.create(0.0, 1.0, ball3)
    with pytest.raises(ConfigError):
        InstantonParams.from_beta(0.1, 1.0, ball3)
    params = InstantonParams.from_beta(1e-2, 0.5, ball3)
    assert params.m == pytest.approx(10.0)
    assert params.support_radius == pytest.approx(0.1)
    assert params.asymptotic


def test_psi_profile_support(ball3):
    """ψ_ε coincide con Φ_ε en B_{ε^β/2} y se anula en el borde del soporte"""
    eps, beta = 1e-3, 0.9
    psi = psi_profile(eps, beta, ball3)
    params = InstantonParams.from_beta(eps, beta, ball3)
    inner = psi.grid.nodes <= 0.5 * eps**beta
    assert np.allclose(psi.values[inner], instanton_value(params, psi.grid.nodes[inner]), rtol=1e-14)
    assert psi.values[-1] == pytest.approx(0.0, abs=1e-14)
    assert psi.grid.radius == pytest.approx(eps**beta)
    assert psi.dirichlet


def test_truncated_profile_rejects_large_support(ball3):
    with pytest.raises(ConfigError, match="excede"):
        truncated_profile(0.1, 0.5, ball3)


def test_regimes_and_orders():
    """Umbral N(p-1)/(N-p) = 3 en R^3 con p = 2"""
    assert regime(3, 2.0, 4.0) == 1
    assert regime(3, 2.0, 3.0) == 2
    assert regime(3, 2.0, 2.0) == 3
    assert predicted_slope(3, 2.0, 4.0, 0.9) == pytest.approx(1.0)
    assert predicted_slope(3, 2.0, 3.0, 0.9) == pytest.approx(1.5)
    assert predicted_eta(3, 2.0, 4.0, 1e-2, 10.0) == pytest.approx(1e-2)
    with pytest.raises(ConfigError):
        predicted_eta(3, 2.0, 6.0, 1e-2, 10.0)


def test_beta_for_alpha():
    """La pérdida (1-β)(s(N-p)/(p-1) - N)⁺ no supera α/2"""
    beta = beta_for_alpha(3, 2.0, 1.0, 0.03125)
    assert 0.9 <= beta < 1.0
    assert (1.0 - beta) * max(0.0, 3.0 - 1.0) <= 0.03125 / 2.0 + 1e-15
    assert beta_for_alpha(3, 2.0, 4.0, 0.1) == 0.9
    with pytest.raises(ConfigError):
        beta_for_alpha(3, 2.0, 1.0, 0.0)


def test_verify_asymptotics_regime_one(ball3):
    """log‖ψ_ε‖_5^5 crece con pendiente N - (N-p)s/p = 1/2"""
    ladder = geometric_ladder(1e-2, 0.1, 3)
    report = verify_asymptotics(5.0, ladder, 0.5, ball3)
    assert report.regime == 1
    assert report.predicted_slope == pytest.approx(0.5)
    assert report.fitted_slope == pytest.approx(0.5, abs=0.05)
    assert report.lower_constant > 0
    assert [row["eps"] for row in report.rows()] == ladder
    assert report.summary()["regime"] == 1


def test_verify_asymptotics_critical_gap(ball3):
    """En s = p* se informa la brecha con S^{N/p}"""
    report = verify_asymptotics(6.0, geometric_ladder(1e-2, 0.1, 3), 0.5, ball3)
    assert report.gap_predicted_slope == pytest.approx(1.5)
    assert len(report.gap_values) == 3
    assert all("gap" in row for row in report.rows())


def test_verify_asymptotics_rejects_short_ladder(ball3):
    with pytest.raises(ConfigError, match="décadas"):
        verify_asymptotics(4.0, [1e-2, 5e-3], 0.9, ball3)
    with pytest.raises(ConfigError):
        verify_asymptotics(7.0, geometric_ladder(1e-2, 0.1, 3), 0.9, ball3)


def test_verify_sobolev_level(ball3):
    """La brecha relativa decrece como (εm)^{(N-p)/(p-1)} = ε^{1/2}"""
    report = verify_sobolev_level(geometric_ladder(1e-2, 0.1, 3), 0.5, ball3)
    assert report.level == pytest.approx(LEVEL_3, rel=1e-9)
    assert report.final_gap < report.relative_gaps[0]
    assert report.eps0 is not None
    assert report.gap_slope == pytest.approx(report.predicted_gap_slope, abs=0.15)
    assert len(report.rows()) == 3


def test_truncation_rates(ball3):
    """Gradiente ~ (εm)^1, norma crítica ~ (εm)^3 y cota de sándwich"""
    report = verify_truncation_rates(1e-2, [10.0, 5.0, 2.5, 1.25, 1.0], ball3)
    assert report.predicted_gradient_slope == pytest.approx(1.0)
    assert report.predicted_critical_slope == pytest.approx(3.0)
    assert report.gradient_slope == pytest.approx(1.0, abs=0.1)
    assert report.critical_slope == pytest.approx(3.0, abs=0.3)
    assert report.sandwich_holds
    assert report.sandwich_s == pytest.approx(4.0)


def test_truncated_norms_below_whole_space(ball3):
    """Truncar reduce la norma crítica"""
    _, level, _ = sobolev_level(ball3)
    u = truncated_profile(1e-2, 2.0, ball3)
    assert lebesgue_norm_s(u, 6.0, ball3) < level
    assert sobolev_norm_p(u, ball3) > 0.5 * level


def test_instanton_profile_without_cutoff(ball3):
    """N = 3, p = 2: Φ_ε(0) = (C/ε)^{1/2} y Φ_ε > 0 en toda la bola"""
    params = InstantonParams.create(0.01, 2.0, ball3)
    grid = build_grid(ball3, 100)
    phi = instanton_profile(params, grid)
    assert phi.values[0] == pytest.approx(math.sqrt(params.C_norm / 0.01), rel=1e-12)
    assert np.all(phi.values > 0)
    assert np.all(phi.derivatives[1:] < 0)
