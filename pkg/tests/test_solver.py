"""
Tests de los solvers variacionales y de los escenarios
"""

import math

import numpy as np
import pytest
from scipy.special import beta as beta_fn

from kirchhoff_lab.errors import ConfigError
from kirchhoff_lab.functionals import MinPower, Nonlinearity, PurePower, evaluate_J
from kirchhoff_lab.shooting import make_report
from kirchhoff_lab.solver import (
    DescentConfig,
    DiscreteProblem,
    PathConfig,
    ScenarioConfig,
    ScenarioReport,
    coercive_scenario,
    geometry_certificate,
    minimize_J_plus,
    mountain_pass,
    multiplicity_scenario,
    noncoercive_scenario,
    not_pure_power_scenario,
    scenario_rows,
    sphere_estimate,
)

CUBIC_ZERO = math.sqrt(2.0) * beta_fn(0.25, 0.5) / 4.0


def test_configs_validation():
    with pytest.raises(ConfigError):
        DescentConfig(tol=0.0)
    with pytest.raises(ConfigError):
        DescentConfig(ball_radius=-1.0)
    with pytest.raises(ConfigError):
        PathConfig(nodes=8)
    config = ScenarioConfig.from_dict(
        {"descent": {"cells": 300, "other": 1}, "path": {"nodes": 20}, "cross_validate": False}
    )
    assert config.descent.cells == 300
    assert config.path.nodes == 20
    assert not config.cross_validate


def test_interval_problem_uses_half_ball(interval_pi):
    """(0, π) se discretiza como bola N = 1 de radio π/2; el bulto tiene norma 1"""
    problem = DiscreteProblem(PurePower(4.0, 2.0), Nonlinearity.linear(), interval_pi, cells=200)
    assert problem.domain.kind == "ball"
    assert problem.domain.R == pytest.approx(math.pi / 2.0)
    U = problem.bump()
    assert problem.norm(U) == pytest.approx(1.0, rel=1e-12)
    assert problem.free[0] == 0
    assert problem.free[-1] == problem.grid.nodes.size - 2


def test_gradient_is_weak_residual(ball3):
    """Diferencias centradas de J⁺ discreto frente al vector residuo"""
    problem = DiscreteProblem(PurePower(4.0, 2.0), Nonlinearity.model(2.0, 3.0, 2.0), ball3, cells=40)
    U = 3.0 * problem.bump()
    vector = problem.residual(U).vector
    h = 1e-6
    for k in (0, 7, 20, 38):
        e = np.zeros_like(U)
        e[k] = h
        numeric = (problem.energy(U + e) - problem.energy(U - e)) / (2 * h)
        assert numeric == pytest.approx(vector[k], rel=1e-5, abs=1e-8)


def test_newton_direction_solves_band_plus_rank_one(ball3):
    """H·dx = -g con H por diferencias centradas del residuo a lo largo de dx"""
    problem = DiscreteProblem(PurePower(4.0, 2.0), Nonlinearity.power(1.0, 4.0), ball3, cells=40)
    U = 3.0 * problem.bump()
    g = problem.residual(U).vector
    dx = problem.newton_direction(U, g)
    assert dx[-1] == 0.0
    h = 1e-6 / float(np.max(np.abs(dx)))
    Hdx = (problem.residual(U + h * dx).vector - problem.residual(U - h * dx).vector) / (2 * h)
    free = problem.free
    scale = float(np.max(np.abs(g[free])))
    np.testing.assert_allclose(Hdx[free], -g[free], rtol=0, atol=1e-5 * scale)


def test_energy_matches_direct_evaluation(ball3):
    term, nonlin = PurePower(5.0, 2.0), Nonlinearity.model(2.0, 3.0, 1.0)
    problem = DiscreteProblem(term, nonlin, ball3, cells=60)
    U = 2.0 * problem.bump()
    direct = evaluate_J(problem.profile(U), term, nonlin.with_positive_part(True), ball3)
    assert problem.energy(U) == pytest.approx(direct, rel=1e-14)
    assert problem.ray(U).J(1.0) == pytest.approx(direct, rel=1e-10)


def test_minimize_linear_kirchhoff(interval_pi):
    """M(t) = t, f(u) = u: mínimo φ_1 normalizado, J⁺ = -1/4"""
    term = PurePower(4.0, 2.0)
    config = DescentConfig(cells=400)
    problem = DiscreteProblem(term, Nonlinearity.linear(), interval_pi, cells=400)
    init = problem.profile(0.5 * problem.bump())
    report = minimize_J_plus(term, Nonlinearity.linear(), interval_pi, init, config, problem)
    assert report.kind == "global-min"
    assert report.J_plus == pytest.approx(-0.25, rel=1e-4)
    assert report.norms["W"] == pytest.approx(1.0, rel=1e-4)
    assert report.gamma == pytest.approx(1.0, rel=1e-4)
    assert report.d == pytest.approx(math.sqrt(2.0 / math.pi), rel=1e-3)
    assert report.notes["nonnegative"]
    energies = [row["J"] for row in report.log if "J" in row]
    assert all(b <= a + 1e-12 for a, b in zip(energies, energies[1:]))


def test_minimize_from_origin_is_degenerate(ball3):
    problem = DiscreteProblem(PurePower(4.0, 2.0), Nonlinearity.linear(), ball3, cells=40)
    report = minimize_J_plus(
        PurePower(4.0, 2.0), Nonlinearity.linear(), ball3, problem.profile(0.0 * problem.bump()),
        DescentConfig(cells=40), problem,
    )
    assert report.degenerate
    assert report.notes["degenerate_critical_point"]


def test_minimize_rejects_init_outside_ball(ball3):
    problem = DiscreteProblem(PurePower(4.0, 2.0), Nonlinearity.linear(), ball3, cells=40)
    with pytest.raises(ConfigError):
        minimize_J_plus(
            PurePower(4.0, 2.0), Nonlinearity.linear(), ball3, problem.profile(5.0 * problem.bump()),
            DescentConfig(cells=40, ball_radius=1.0), problem,
        )


def test_mountain_pass_requires_negative_endpoint(interval_pi):
    problem = DiscreteProblem(PurePower(2.0, 2.0), Nonlinearity.power(1.0, 4.0), interval_pi, cells=100)
    with pytest.raises(ConfigError, match="J⁺"):
        mountain_pass(
            PurePower(2.0, 2.0), Nonlinearity.power(1.0, 4.0), interval_pi,
            problem.profile(0.1 * problem.bump()), problem=problem,
        )


@pytest.mark.slow
def test_mountain_pass_cubic(interval_pi):
    """M ≡ 1, f = u³: el punto de silla es la solución positiva de u'' + u³ = 0"""
    term, nonlin = PurePower(2.0, 2.0), Nonlinearity.power(1.0, 4.0)
    problem = DiscreteProblem(term, nonlin, interval_pi, cells=400)
    endpoint = problem.profile(10.0 * problem.bump())
    assert problem.energy(problem.project(endpoint)) < 0
    report = mountain_pass(term, nonlin, interval_pi, endpoint, PathConfig(), problem)
    assert report.kind == "mountain-pass"
    assert report.d == pytest.approx(CUBIC_ZERO / (math.pi / 2.0), rel=1e-3)
    assert report.J_plus > 0
    assert report.J_plus == pytest.approx(0.25 * report.norms["W"] ** 2, rel=1e-6)
    assert report.notes["level"] <= report.notes["initial_max"] * (1 + 1e-9)


def test_coercive_scenario_without_negative_energy(ball3):
    """λ diminuto: J⁺ >= 0 en todos los rayos de la familia, no hay minimizador"""
    config = ScenarioConfig(descent=DescentConfig(cells=200))
    scenario = coercive_scenario(PurePower(5.0, 2.0), Nonlinearity.model(2.0, 3.0, 1e-6), ball3, config)
    assert scenario.case == "subcritical"
    assert scenario.notes["inf_negative"] is False
    assert scenario.solutions == {}
    assert scenario.summary()["scenario"] == "coercive"


def test_scenario_argument_errors(ball3):
    nonlin = Nonlinearity.model(2.0, 3.0, 1.0)
    with pytest.raises(ConfigError, match="r > varpi"):
        coercive_scenario(PurePower(3.0, 2.0), nonlin, ball3)
    with pytest.raises(ConfigError):
        coercive_scenario(PurePower(5.0, 2.0), Nonlinearity.linear(), ball3)
    with pytest.raises(ConfigError):
        noncoercive_scenario(PurePower(5.0, 2.0), Nonlinearity.model(2.0, 4.0, 1.0), ball3)
    with pytest.raises(ConfigError):
        noncoercive_scenario(PurePower(3.0, 2.0), Nonlinearity.model(2.0, 7.0, 1.0), ball3)
    with pytest.raises(ConfigError):
        not_pure_power_scenario(PurePower(3.0, 2.0), nonlin, ball3)
    with pytest.raises(ConfigError):
        not_pure_power_scenario(MinPower(7.0, 4.0, 2.0), nonlin, ball3)


def test_geometry_requires_ordered_exponents(ball3):
    """Se requiere q < σ < r < ϖ"""
    nonlin = Nonlinearity.model(2.0, 5.0, 1.0, mu=1.0, sigma=4.5)
    with pytest.raises(ConfigError, match="sigma"):
        geometry_certificate(PurePower(4.0, 2.0), nonlin, ball3)
    with pytest.raises(ConfigError):
        multiplicity_scenario(PurePower(4.0, 2.0), nonlin, ball3,
                              config=ScenarioConfig(descent=DescentConfig(cells=60)))


def test_sphere_estimate_bounded_by_bump(ball3):
    problem = DiscreteProblem(PurePower(3.0, 2.0), Nonlinearity.model(2.0, 4.0, 1.0), ball3, cells=100)
    for rho in (0.1, 1.0):
        assert sphere_estimate(problem, rho) <= problem.ray(problem.bump()).J(rho) + 1e-15


def test_scenario_rows_carry_provenance(ball3):
    term, nonlin = PurePower(4.0, 2.0), Nonlinearity.linear()
    problem = DiscreteProblem(term, nonlin, ball3, cells=40)
    report = make_report(problem.profile(problem.bump()), term, nonlin, ball3, "global-min")
    scenario = ScenarioReport("coercive", "subcritical", {"global-min": report})
    rows = scenario_rows([scenario, scenario])
    assert len(rows) == 2
    assert rows[0]["provenance"] == "computed"
    assert rows[0]["scenario"] == "coercive"
    assert rows[0]["kind"] == "global-min"


def _assert_converged(report, kind):
    assert report.kind == kind
    assert report.residual < 1e-8
    assert not report.degenerate


def _assert_cross_validated(scenario, label):
    xval = scenario.cross_validation[label]
    assert "error" not in xval
    assert xval["rel_gamma"] < 1e-3
    assert xval["rel_d"] < 1e-3


@pytest.mark.slow
def test_coercive_subcritical_two_solutions(ball3):
    """r = 4 en (ϖ, p*) con λ grande: minimizador global con J⁺ < 0 y paso con J⁺ > 0"""
    config = ScenarioConfig(descent=DescentConfig(cells=400))
    scenario = coercive_scenario(PurePower(4.0, 2.0), Nonlinearity.model(2.0, 3.0, 50.0), ball3, config)
    assert scenario.case == "subcritical"
    assert scenario.notes["inf_negative"] is True
    minimum = scenario.solutions["global-min"]
    saddle = scenario.solutions["mountain-pass"]
    _assert_converged(minimum, "global-min")
    _assert_converged(saddle, "mountain-pass")
    assert minimum.J_plus < 0 < saddle.J_plus
    assert minimum.consistency_defect < 1e-6
    assert saddle.consistency_defect < 1e-6
    for label in ("global-min", "mountain-pass"):
        _assert_cross_validated(scenario, label)


@pytest.mark.slow
def test_noncoercive_pass_level_positive(ball3):
    """q < r < ϖ: un único paso de montaña con nivel positivo"""
    config = ScenarioConfig(descent=DescentConfig(cells=400))
    scenario = noncoercive_scenario(PurePower(3.0, 2.0), Nonlinearity.model(2.0, 4.0, 1.0), ball3, config)
    saddle = scenario.solutions["mountain-pass"]
    _assert_converged(saddle, "mountain-pass")
    assert saddle.J_plus > 0
    assert saddle.notes["level"] <= saddle.notes["initial_max"] * (1 + 1e-9)
    _assert_cross_validated(scenario, "mountain-pass")


@pytest.mark.slow
def test_multiplicity_three_ordered_solutions(ball3):
    """Geometría certificada: mínimo interior, paso bajo y paso alto distintos"""
    nonlin = Nonlinearity.model(2.0, 4.0, 1.0, mu=1.0, sigma=2.5)
    config = ScenarioConfig(descent=DescentConfig(cells=300))
    scenario = multiplicity_scenario(PurePower(3.0, 2.0), nonlin, ball3, config=config)
    assert scenario.certificate is not None and scenario.certificate.holds
    _assert_converged(scenario.solutions["inner-min"], "local-min")
    _assert_converged(scenario.solutions["low-pass"], "mountain-pass")
    _assert_converged(scenario.solutions["high-pass"], "mountain-pass")
    assert scenario.notes["levels_ordered"]
    assert scenario.notes["distinct"] is True
    assert all(dist > 1e-3 for dist in scenario.notes["distances"].values())
    assert scenario.summary()["certificate"]["holds"] is True


@pytest.mark.slow
def test_not_pure_power_supercritical_pass(ball3):
    """min{s^{r1-p}, s^{r2-p}} con r1 > p*: paso de montaña con J⁺ > 0 y testigos analíticos"""
    config = ScenarioConfig(cross_validate=False, descent=DescentConfig(cells=300))
    scenario = not_pure_power_scenario(
        MinPower(7.0, 2.5, 2.0), Nonlinearity.model(2.0, 3.0, 1.0), ball3, config
    )
    assert scenario.case == "r1>p*"
    assert scenario.notes["sphere_holds"]
    saddle = scenario.solutions["mountain-pass"]
    _assert_converged(saddle, "mountain-pass")
    assert saddle.J_plus > 0
    assert "witness_negative" in scenario.notes
    assert scenario.cross_validation == {}
