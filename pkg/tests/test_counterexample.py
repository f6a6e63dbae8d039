"""
Tests del contraejemplo: presupuesto de exponentes, traza y sondas de minimalidad
"""

import numpy as np
import pytest

from kirchhoff_lab.counterexample import (
    critical_regime,
    default_ladder,
    exponent_budget,
    exponent_triple,
    probe_family,
    probe_local_minimum,
    t_segment,
    trace_counterexample,
)
from kirchhoff_lab.errors import ConfigError
from kirchhoff_lab.functionals import Nonlinearity, PurePower
from kirchhoff_lab.radial_core import DomainSpec

TERM = PurePower(7.0, 2.0)
NONLIN = Nonlinearity.model(2.0, 3.0, 1.0)


def test_budget_defaults():
    """N = 3, p = 2, q = 2, ϖ = 3, r = 7: σ en (3/8, 1/2), α < (ϖ-q)(1/2-σ)"""
    budget = exponent_budget(3, 2.0, 2.0, 3.0, 7.0)
    assert budget.p_star == pytest.approx(6.0)
    assert budget.sigma_interval == pytest.approx((0.375, 0.5))
    assert budget.sigma == pytest.approx(0.4375)
    assert budget.alpha == pytest.approx(0.03125)
    assert budget.beta == pytest.approx(1.0 - 0.03125 / 2.0)
    assert budget.to_dict()["alpha_bound"] == pytest.approx(0.0625)


def test_exponent_triple_ordering():
    """e3 < e2 < e1: la ganancia domina para ε pequeño"""
    budget = exponent_budget(3, 2.0, 2.0, 3.0, 7.0)
    e1, e2, e3 = exponent_triple(budget)
    assert (e1, e2, e3) == pytest.approx((3.0625, 2.84375, 2.8125))
    assert e3 < e2 < e1


def test_budget_rejects_bad_exponents():
    with pytest.raises(ConfigError, match="r > p"):
        exponent_budget(3, 2.0, 2.0, 3.0, 6.0)
    with pytest.raises(ConfigError, match="varpi"):
        exponent_budget(3, 2.0, 2.0, 7.0, 8.0)
    with pytest.raises(ConfigError, match="q < varpi"):
        exponent_budget(3, 2.0, 3.0, 3.0, 7.0)
    with pytest.raises(ConfigError, match="N > p"):
        exponent_budget(2, 2.0, 1.0, 1.5, 7.0)
    with pytest.raises(ConfigError, match="sigma"):
        exponent_budget(3, 2.0, 2.0, 3.0, 7.0, sigma=0.3)
    with pytest.raises(ConfigError, match="alpha"):
        exponent_budget(3, 2.0, 2.0, 3.0, 7.0, alpha=0.1)


def test_default_ladder():
    ladder = default_ladder()
    assert len(ladder) == 30
    assert ladder[0] == pytest.approx(1e-1)
    assert ladder[-1] == pytest.approx(1e-30)


def test_critical_regime(ball3):
    assert critical_regime(ball3, 7.0) == "supercritical"
    assert critical_regime(ball3, 6.0) == "subcritical"


def test_trace_turns_negative(ball3):
    """J(ε^σψ_ε) < 0 en la cola de la escalera y la cota de tres términos se cumple"""
    budget = exponent_budget(3, 2.0, 2.0, 3.0, 7.0)
    report = trace_counterexample(budget, None, TERM, NONLIN, ball3)
    assert report.eps_star is not None
    assert report.J[-1] < 0
    assert all(j < 0 for e, j in zip(report.eps, report.J) if e <= report.eps_star)
    assert report.inequality_holds
    assert report.C_fit > 0 and report.c_fit > 0
    assert report.w_norm[-1] < report.w_norm[0]
    rows = report.rows()
    assert len(rows) == 30
    assert {row["provenance"] for row in rows} == {"computed"}
    summary = report.summary()
    assert summary["e3"] == pytest.approx(2.8125)
    assert summary["sup_slope_predicted"] == pytest.approx(0.4375 - 0.5)


def test_trace_rejects_short_ladder(ball3):
    budget = exponent_budget(3, 2.0, 2.0, 3.0, 7.0)
    with pytest.raises(ConfigError):
        trace_counterexample(budget, [1e-3], TERM, NONLIN, ball3)


def test_t_segment_starts_positive(ball3):
    """Para t pequeño domina la absorción: J(tψ_ε) > 0"""
    budget = exponent_budget(3, 2.0, 2.0, 3.0, 7.0)
    segment = t_segment(budget, 1e-20, TERM, NONLIN, ball3)
    assert segment.initially_positive
    assert len(segment.rows()) == 241
    with pytest.raises(ConfigError):
        t_segment(budget, 1e-20, TERM, NONLIN, ball3, t_max=0.0)


def test_probe_family_composition(ball3):
    """20 instantones, 4 perfiles propios y 8 bultos"""
    family = probe_family(ball3, seed=3)
    labels = [m.label for m in family]
    assert len(family) == 32
    assert sum(label.startswith("instanton") for label in labels) == 20
    assert sum(label.startswith("eigen") for label in labels) == 4
    again = probe_family(ball3, seed=3)
    for a, b in zip(family[-8:], again[-8:]):
        assert np.array_equal(a.profile.values, b.profile.values)
    other = probe_family(ball3, seed=4)
    assert not np.array_equal(family[-1].profile.values, other[-1].profile.values)


def test_probe_family_on_interval(interval_pi):
    """Sin exponente crítico no hay instantones"""
    family = probe_family(interval_pi, eigen_count=2, bump_count=3)
    assert len(family) == 5


def test_probe_refutes_in_sobolev_topology(ball3):
    """Con r > p* el origen no es mínimo local en W"""
    verdict = probe_local_minimum(TERM, NONLIN, ball3, "W", 0.5, thetas=np.logspace(-12.0, 0.0, 97))
    assert verdict.verdict == "refuted"
    assert verdict.min_relative < -1e-10
    assert verdict.witness_label.startswith("instanton")
    assert verdict.witness_norm <= 0.5 + 1e-12
    assert verdict.witness_profile is not None


@pytest.mark.parametrize("topology", ["Linf", "C1"])
def test_probe_consistent_in_sup_topologies(ball3, topology):
    """|u| <= 1/2 fuerza F(u) < 0, luego J > 0 en toda la bola"""
    verdict = probe_local_minimum(TERM, NONLIN, ball3, topology, 0.5)
    assert verdict.verdict == "consistent-with-minimum"
    assert verdict.witness_label is None
    assert verdict.min_J > 0
    assert verdict.summary()["evaluations"] == 32 * 49


def test_probe_arguments(ball3):
    with pytest.raises(ConfigError):
        probe_local_minimum(TERM, NONLIN, ball3, "L2", 0.5)
    with pytest.raises(ConfigError):
        probe_local_minimum(TERM, NONLIN, ball3, "W", 0.0)
    with pytest.raises(ConfigError):
        probe_local_minimum(TERM, NONLIN, ball3, "W", 0.5, family=[])


def test_budget_in_higher_dimension():
    """N = 4, p = 2: p* = 4 y decaimiento 1"""
    budget = exponent_budget(4, 2.0, 1.5, 4.0, 5.0)
    assert budget.p_star == pytest.approx(4.0)
    assert budget.decay == pytest.approx(1.0)
    assert budget.sigma_interval[0] == pytest.approx(0.0)
    assert DomainSpec("ball", 4, 1.0, 2.0).critical_exponent == pytest.approx(4.0)


@pytest.mark.parametrize("topology", ["W", "Linf"])
def test_ball_consistent_below_critical_exponent(ball3, topology):
    """r = 3 < p*: con las mismas (q, ϖ, λ) ninguna bola contiene J < 0"""
    verdict = probe_local_minimum(
        PurePower(3.0, 2.0), NONLIN, ball3, topology, 0.5, thetas=np.logspace(-12.0, 0.0, 97)
    )
    assert verdict.verdict == "consistent-with-minimum"
    assert verdict.min_J >= -1e-10
    assert verdict.witness_label is None
    assert verdict.witness_profile is None


def test_budget_dominance_on_random_exponents(rng):
    """min(e1, e2) > e3 en 300 presupuestos admisibles al azar"""
    for _ in range(300):
        N = int(rng.integers(2, 7))
        p = rng.uniform(1.1, min(4.0, N - 0.2))
        pstar = p * N / (N - p)
        q = rng.uniform(1.0, pstar - 0.1)
        varpi = rng.uniform(q + 0.05, pstar)
        r = pstar + rng.uniform(0.01, 10.0)
        budget = exponent_budget(N, p, q, varpi, r)
        e1, e2, e3 = exponent_triple(budget)
        lo, hi = budget.sigma_interval
        assert lo < budget.sigma < hi
        assert e3 < min(e1, e2)
        assert e2 - e3 == pytest.approx(budget.alpha_bound - budget.alpha, rel=1e-9, abs=1e-12)
        assert e1 - e3 == pytest.approx((r - varpi) * (budget.sigma - lo), rel=1e-9, abs=1e-12)


def test_gain_dominates_without_fixed_order_between_e1_e2():
    """r apenas por encima de p*: e3 < e1 < e2, la ganancia sigue dominando"""
    e1, e2, e3 = exponent_triple(exponent_budget(3, 2.0, 1.0, 5.9, 6.01))
    assert e3 < e1 < e2
