"""
Tests de las hipótesis estructurales y los paquetes de existencia
"""

import pytest

from kirchhoff_lab.errors import ConfigError
from kirchhoff_lab.functionals import Affine, Nonlinearity, PurePower, Tabulated
from kirchhoff_lab.hypotheses import (
    NOT_APPLICABLE,
    SAMPLED,
    SYMBOLIC,
    VIOLATED,
    SampleBox,
    c1_condition_exponents,
    check_hypotheses,
    general_existence_check,
    growth_at_infinity,
    growth_at_zero,
    r_tilde_for,
)

BOX = SampleBox(per_decade=50)


def test_sample_box_validation():
    with pytest.raises(ConfigError):
        SampleBox(s_min=1.0, s_max=0.5)
    with pytest.raises(ConfigError):
        SampleBox(per_decade=0)
    assert BOX.s_samples(upper=1.0)[-1] == pytest.approx(1.0)


def test_growth_exponents():
    assert growth_at_zero(PurePower(5.0, 2.0)) == 5.0
    assert growth_at_infinity(Affine(1.0, 1.0, 2.0)) == 4.0
    assert growth_at_zero(Affine(0.0, 1.0, 2.0)) == 4.0
    assert growth_at_zero(Tabulated([0.0, 1.0], [0.0, 1.0], 2.0)) is None
    assert growth_at_zero(Tabulated([0.0, 1.0], [0.0, 1.0], 2.0), SampleBox(r=4.0)) == 4.0


def test_r_tilde():
    nonlin = Nonlinearity.model(2.0, 4.0, 1.0)
    assert r_tilde_for(PurePower(3.0, 2.0), nonlin) == pytest.approx(3.5)
    assert r_tilde_for(PurePower(4.0, 2.0), nonlin) is None


def test_coercive_package(ball3):
    """r = 7 > p* = 6 con q = 2 < ϖ = 3: todo se cumple simbólicamente"""
    term = PurePower(7.0, 2.0)
    nonlin = Nonlinearity.model(2.0, 3.0, 1.0)
    report = check_hypotheses(term, nonlin, ball3, BOX)
    for name in ("H0", "H1_tilde", "P_M_less", "P_F", "K_C", "K_M", "H_f"):
        assert report[name].status == SYMBOLIC, name
    assert report["P_F"].witnesses["C2"] == pytest.approx(1.0 / 3.0)
    assert report["K_AR_i"].status == NOT_APPLICABLE
    assert report.compactness == "PS"

    verdict = general_existence_check(term, nonlin, ball3, "coercive", BOX)
    assert verdict.verdict
    assert verdict.members["r_above_critical"]
    assert len(verdict.rows()) == len(verdict.members)


def test_mountain_pass_package(ball3):
    """r = 3 < ϖ = 4 < p*: Ambrosetti-Rabinowitz con r̃ = 3.5"""
    term = PurePower(3.0, 2.0)
    nonlin = Nonlinearity.model(2.0, 4.0, 1.0)
    report = check_hypotheses(term, nonlin, ball3, BOX)
    for name in ("K_AR_i", "K_AR_ii", "K_AR_iii", "Q_M_greater", "H_B"):
        assert report[name].status == SYMBOLIC, name
    assert report["K_C"].status == VIOLATED
    assert report.compactness == "PS"
    assert report.context["r_tilde"] == pytest.approx(3.5)

    assert general_existence_check(term, nonlin, ball3, "mountain-pass", BOX).verdict
    assert not general_existence_check(term, nonlin, ball3, "coercive", BOX).verdict


def test_c1_exponents_in_report(ball3):
    """Con r = 3, ℓ = 4 y ℓ̃ = 2 ambas condiciones se cumplen"""
    report = check_hypotheses(PurePower(3.0, 2.0), Nonlinearity.model(2.0, 4.0, 1.0), ball3, BOX)
    c1 = report["C1_exponents"]
    assert c1.status == SYMBOLIC
    assert c1.witnesses["rhs_growth"] == pytest.approx(1.25)
    assert c1.witnesses["rhs_absorption"] == pytest.approx(2.0 / 3.0)


def test_c1_condition_exponents(ball3):
    report = c1_condition_exponents(3.0, 2.0, 4.0, 2.0, ball3)
    assert report.holds_growth and report.holds_absorption
    assert report.exponent_absorption == pytest.approx(0.5)
    assert report.exponent_growth == pytest.approx(3.5)
    assert report.margin_growth == pytest.approx(3.0 - 1.25)

    tight = c1_condition_exponents(5.0, 2.0, 4.0, 1.5, ball3)
    assert not tight.holds_absorption
    assert tight.exponent_absorption < 0
    with pytest.raises(ConfigError):
        c1_condition_exponents(6.0, 2.0, 4.0, 2.0, ball3)
    with pytest.raises(ConfigError):
        c1_condition_exponents(3.0, 2.0, 7.0, 2.0, ball3)


def test_logarithmic_term_violations(ball3):
    """M̂ = log t no está acotada ni es positiva cerca de 0"""
    report = check_hypotheses(PurePower(0.0, 2.0), Nonlinearity.linear(), ball3, BOX)
    assert report["P_M_less"].status == VIOLATED
    assert report["P_M_zero"].status == VIOLATED
    assert not report.holds("P_M_star")


def test_supercritical_growth_violates_H0(ball3):
    report = check_hypotheses(PurePower(7.0, 2.0), Nonlinearity.power(1.0, 7.0), ball3, BOX)
    assert report["H0"].status == VIOLATED
    assert report["H1_tilde"].status == VIOLATED
    assert report.compactness == "none"


def test_tabulated_term_is_sampled(ball3):
    """M(t) = t en [0, 1]: M̂(s²)/p ~ s⁴/4, razón acotada en 0"""
    term = Tabulated([0.0, 1.0, 2.0], [0.0, 1.0, 2.0], 2.0)
    box = SampleBox(per_decade=50, r=4.0, s_max=1.0)
    report = check_hypotheses(term, Nonlinearity.model(2.0, 3.0, 1.0), ball3, box)
    assert report["P_M_less"].status == SAMPLED
    assert report["P_M_less"].witnesses["C1"] == pytest.approx(0.25)
    assert report["K_M"].status == SAMPLED


def test_affine_mountain_pass_lower_bound(ball3):
    report = check_hypotheses(Affine(1.0, 1.0, 2.0), Nonlinearity.model(2.0, 5.0, 1.0), ball3, BOX)
    assert report["Q_M_greater"].status == SAMPLED
    assert report["Q_M_greater"].witnesses["a1"] > 0


def test_rows_provenance(ball3):
    report = check_hypotheses(PurePower(7.0, 2.0), Nonlinearity.model(2.0, 3.0, 1.0), ball3, BOX)
    rows = report.rows()
    assert {row["provenance"] for row in rows} <= {"closed-form", "computed"}
    h0 = next(row for row in rows if row["hypothesis"] == "H0")
    assert h0["provenance"] == "closed-form"


def test_unknown_regime(ball3):
    with pytest.raises(ConfigError):
        general_existence_check(PurePower(7.0, 2.0), Nonlinearity.model(2.0, 3.0, 1.0), ball3, "other")
