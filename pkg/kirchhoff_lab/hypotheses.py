"""
Hipótesis estructurales
Comprobación simbólica (datos de potencias) o por muestreo de cada hipótesis
sobre M y F, condiciones de exponentes para mínimos C¹ y paquetes de
hipótesis de los teoremas generales de existencia
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .errors import ConfigError
from .functionals import Affine, KirchhoffTerm, MinPower, Nonlinearity, PurePower, Tabulated
from .radial_core import DomainSpec

logger = logging.getLogger(__name__)

SYMBOLIC = "holds-symbolically"
SAMPLED = "holds-on-samples"
VIOLATED = "violated"
NOT_APPLICABLE = "not-applicable"

HOLDING = (SYMBOLIC, SAMPLED)


@dataclass(frozen=True)
class SampleBox:
    """Rangos de muestreo logarítmico para s = ‖u‖_W y para v"""

    s_min: float = 1e-3
    s_max: float = 1e3
    v_min: float = 1e-3
    v_max: float = 1e3
    per_decade: int = 1000
    delta: float = 1.0
    r: Optional[float] = None

    def __post_init__(self) -> None:
        if not (0 < self.s_min < self.s_max and 0 < self.v_min < self.v_max):
            raise ConfigError("sample_box: se requieren rangos 0 < min < max")
        if self.per_decade < 1:
            raise ConfigError("sample_box.per_decade: se requiere al menos 1")

    def s_samples(self, upper: Optional[float] = None) -> np.ndarray:
        hi = self.s_max if upper is None else min(self.s_max, upper)
        return _log_samples(self.s_min, hi, self.per_decade)

    def v_samples(self) -> np.ndarray:
        return _log_samples(self.v_min, self.v_max, self.per_decade)


def _log_samples(lo: float, hi: float, per_decade: int) -> np.ndarray:
    if hi <= lo:
        return np.array([lo])
    count = max(2, int(math.ceil(math.log10(hi / lo) * per_decade)) + 1)
    return np.logspace(math.log10(lo), math.log10(hi), count)


@dataclass
class HypothesisResult:
    name: str
    status: str
    witnesses: Dict[str, Any] = field(default_factory=dict)
    detail: str = ""

    @property
    def holds(self) -> bool:
        return self.status in HOLDING

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "status": self.status,
            "witnesses": self.witnesses,
            "detail": self.detail,
        }


@dataclass
class HypothesisReport:
    """Resultado por hipótesis más el veredicto de compacidad (PS / Cerami)"""

    results: Dict[str, HypothesisResult]
    context: Dict[str, Any]
    compactness: str

    def __getitem__(self, name: str) -> HypothesisResult:
        return self.results[name]

    def holds(self, name: str) -> bool:
        return name in self.results and self.results[name].holds

    def rows(self) -> List[Dict[str, Any]]:
        rows = []
        for res in self.results.values():
            rows.append(
                {
                    "hypothesis": res.name,
                    "status": res.status,
                    "witnesses": ";".join(f"{k}={v}" for k, v in sorted(res.witnesses.items())),
                    "detail": res.detail,
                    "provenance": "closed-form" if res.status == SYMBOLIC else "computed",
                }
            )
        return rows


# Exponentes característicos
def _pstar(domain: DomainSpec) -> float:
    return domain.critical_exponent if domain.N > domain.p else math.inf


def growth_at_zero(term: KirchhoffTerm, box: Optional[SampleBox] = None) -> Optional[float]:
    """r tal que M̂(s^p) ~ s^r cerca de 0"""
    if isinstance(term, PurePower):
        return term.r
    if isinstance(term, MinPower):
        return term.r_hi
    if isinstance(term, Affine):
        return term.p if term.a > 0 else 2.0 * term.p
    if box is not None and box.r is not None:
        return box.r
    if isinstance(term, Tabulated) and term.m_samples[0] > 0:
        return term.p
    return None


def growth_at_infinity(term: KirchhoffTerm) -> Optional[float]:
    """r tal que M̂(s^p) ~ s^r para s grande"""
    if isinstance(term, PurePower):
        return term.r
    if isinstance(term, MinPower):
        return term.r_lo
    if isinstance(term, Affine):
        return 2.0 * term.p if term.b > 0 else term.p
    return None


def nonlinearity_exponents(nonlin: Nonlinearity) -> Dict[str, Optional[float]]:
    positive = [e for c, e in nonlin.pieces if c > 0]
    negative = [e for c, e in nonlin.pieces if c < 0]
    return {
        "varpi": max(positive) if positive else None,
        "q": min(negative) if negative else None,
        "top": nonlin.largest_exponent,
        "bottom": min(nonlin.exponents),
    }


def _leading_coefficient(nonlin: Nonlinearity, exponent: float) -> float:
    return sum(c for c, e in nonlin.pieces if e == exponent)


def r_tilde_for(term: KirchhoffTerm, nonlin: Nonlinearity) -> Optional[float]:
    """Punto medio del intervalo admisible (r, ϖ) o (ϖ, r) según el caso"""
    r_inf = growth_at_infinity(term)
    top = nonlin.largest_exponent
    if r_inf is None or r_inf == top:
        return None
    return 0.5 * (r_inf + top)


# Comprobaciones individuales
def _check_H0(nonlin: Nonlinearity, domain: DomainSpec) -> HypothesisResult:
    pstar = _pstar(domain)
    over = [e for c, e in nonlin.pieces if c > 0 and e > pstar]
    if over:
        return HypothesisResult(
            "H0", VIOLATED, {"exponent": max(over)}, "F crece más que |v|^{p*}"
        )
    C0 = sum(c / e for c, e in nonlin.pieces if c > 0) or 1.0
    return HypothesisResult("H0", SYMBOLIC, {"C0": C0})


def _check_growth_tilde(nonlin: Nonlinearity, domain: DomainSpec) -> HypothesisResult:
    pstar = _pstar(domain)
    top = nonlin.largest_exponent
    if top >= pstar:
        return HypothesisResult(
            "H1_tilde", VIOLATED, {"varpi_tilde": top}, "se requiere varpi_tilde < p*"
        )
    C = sum(abs(c) for c, _ in nonlin.pieces)
    return HypothesisResult("H1_tilde", SYMBOLIC, {"varpi_tilde": top, "C0_tilde": C})


def _bounded_at_zero(ratio: np.ndarray, per_decade: int) -> bool:
    # la razón no debe crecer más de un 5% en la primera década hacia 0
    ref = ratio[min(per_decade, ratio.size - 1)]
    return bool(np.all(np.isfinite(ratio)) and ratio[0] <= 1.05 * max(ref, 0.0) + 1e-300)


def _check_PM_less(term: KirchhoffTerm, r: Optional[float], box: SampleBox) -> HypothesisResult:
    name = "P_M_less"
    if r is None:
        return HypothesisResult(name, NOT_APPLICABLE, detail="exponente r desconocido")
    if isinstance(term, PurePower):
        if term.r == 0.0:
            return HypothesisResult(name, VIOLATED, {"s": box.s_min}, "M̂ = log t no acotada en 0")
        if term.r >= r:
            return HypothesisResult(name, SYMBOLIC, {"C1": 1.0 / term.r, "r": r})
        return HypothesisResult(name, VIOLATED, {"s": box.s_min}, "M̂(s^p) ~ s^{r_M} con r_M < r")
    s = box.s_samples(upper=1.0)
    ratio = np.asarray(term.m_hat(s**term.p)) / term.p / s**r
    if not _bounded_at_zero(ratio, box.per_decade):
        return HypothesisResult(name, VIOLATED, {"s": float(s[0])}, "razón creciente hacia 0")
    return HypothesisResult(name, SAMPLED, {"C1": float(np.max(ratio)), "r": r})


def _check_PF(nonlin: Nonlinearity, box: SampleBox) -> HypothesisResult:
    name = "P_F"
    exps = nonlinearity_exponents(nonlin)
    varpi, q = exps["varpi"], exps["bottom"]
    if varpi is None or varpi != exps["top"]:
        return HypothesisResult(name, VIOLATED, detail="sin término positivo dominante")
    C2 = _leading_coefficient(nonlin, varpi) / varpi
    C3 = 0.0
    for c, e in nonlin.pieces:
        if e == varpi or c >= 0:
            continue
        # |c|/e v^e <= |c|/e (v^q + v^varpi) para q <= e <= varpi
        C3 += abs(c) / e
        if e > q:
            C2 -= abs(c) / e
    if C2 > 0:
        return HypothesisResult(name, SYMBOLIC, {"C2": C2, "C3": C3, "varpi": varpi, "q": q})
    v = box.v_samples()
    C3 = sum(abs(c) / e for c, e in nonlin.pieces if c < 0)
    lower = (np.asarray(nonlin.F(v)) + C3 * v**q) / v**varpi
    C2s = float(np.min(lower))
    if C2s > 0:
        return HypothesisResult(name, SAMPLED, {"C2": C2s, "C3": C3, "varpi": varpi, "q": q})
    return HypothesisResult(name, VIOLATED, {"v": float(v[int(np.argmin(lower))])})


def _check_PM_zero(term: KirchhoffTerm, box: SampleBox, everywhere: bool) -> HypothesisResult:
    name = "P_M_star" if everywhere else "P_M_zero"
    if isinstance(term, PurePower):
        if term.r == 0.0:
            return HypothesisResult(name, VIOLATED, {"t": box.s_min**term.p}, "log t < 0 en (0, 1)")
        return HypothesisResult(name, SYMBOLIC)
    if isinstance(term, (MinPower, Affine)):
        return HypothesisResult(name, SYMBOLIC, detail="M >= 0")
    upper = None if everywhere else 1.0
    if isinstance(term, Tabulated):
        upper = term.t_samples[-1] ** (1.0 / term.p) if upper is None else min(upper, term.t_samples[-1] ** (1.0 / term.p))
    s = box.s_samples(upper=upper)
    values = np.asarray(term.m_hat(s**term.p))
    if np.all(values >= 0):
        return HypothesisResult(name, SAMPLED)
    return HypothesisResult(name, VIOLATED, {"t": float(s[int(np.argmin(values))] ** term.p)})


def _sign_change_radius(v: np.ndarray, good: np.ndarray) -> float:
    bad = np.nonzero(~good)[0]
    if bad.size == 0:
        return float(v[-1])
    return float(v[bad[0] - 1]) if bad[0] > 0 else 0.0


def _check_small_sign(nonlin: Nonlinearity, box: SampleBox, name: str, use_f: bool) -> HypothesisResult:
    """F <= 0 (P_F^0) o f·sign(v) <= 0 (H_f) para |v| pequeño"""
    bottom = min(nonlin.exponents)
    lead = _leading_coefficient(nonlin, bottom)
    v = box.v_samples()
    vals_pos = np.asarray(nonlin.f(v) if use_f else nonlin.F(v))
    vals_neg = np.asarray(-nonlin.f(-v) if use_f else nonlin.F(-v))
    good = (vals_pos <= 0) & (vals_neg <= 0)
    radius = _sign_change_radius(v, good)
    if lead < 0:
        return HypothesisResult(name, SYMBOLIC, {"radius": radius, "exponent": bottom})
    return HypothesisResult(name, VIOLATED, {"v": float(v[0])}, "término dominante positivo")


def _check_Qf(nonlin: Nonlinearity, domain: DomainSpec, box: SampleBox) -> HypothesisResult:
    name = "Q_f"
    pstar = _pstar(domain)
    positive = [e for c, e in nonlin.pieces if c > 0]
    ell = max([domain.p] + positive)
    if ell >= pstar:
        return HypothesisResult(name, VIOLATED, {"ell": ell}, "se requiere ell < p*")
    if all(e == ell for e in positive):
        D = max(sum(c for c, e in nonlin.pieces if c > 0), 1e-300)
        return HypothesisResult(name, SYMBOLIC, {"D": D, "ell": ell})
    v = box.v_samples()
    ratio = np.maximum(
        np.asarray(nonlin.f(v)) / v ** (ell - 1.0),
        -np.asarray(nonlin.f(-v)) / v ** (ell - 1.0),
    )
    if not _bounded_at_zero(ratio, box.per_decade):
        return HypothesisResult(name, VIOLATED, {"v": float(v[0]), "ell": ell})
    return HypothesisResult(name, SAMPLED, {"D": float(max(np.max(ratio), 1e-300)), "ell": ell})


def _check_QM_greater(term: KirchhoffTerm, domain: DomainSpec, box: SampleBox) -> HypothesisResult:
    name = "Q_M_greater"
    pstar = _pstar(domain)
    r_zero = growth_at_zero(term, box)
    if r_zero is None:
        return HypothesisResult(name, NOT_APPLICABLE, detail="comportamiento en 0 desconocido")
    if r_zero >= pstar:
        return HypothesisResult(name, VIOLATED, {"r": r_zero}, "se requiere r < p*")
    # con r_M <= p sirve cualquier r en (p, p*): s^{r_M - p} >= s^{r - p} si s < 1
    r = r_zero if r_zero > domain.p else 0.5 * (domain.p + min(pstar, 4.0 * domain.p))
    if isinstance(term, PurePower):
        return HypothesisResult(name, SYMBOLIC, {"a1": domain.p / r, "delta": box.delta, "r": r})
    s = box.s_samples(upper=box.delta ** (1.0 / term.p))
    a1 = float(np.min(domain.p * np.asarray(term.M(s**term.p)) / (r * s ** (r - term.p))))
    if a1 > 0:
        return HypothesisResult(name, SAMPLED, {"a1": a1, "delta": box.delta, "r": r})
    return HypothesisResult(name, VIOLATED, {"r": r})


def _kar_i(nonlin: Nonlinearity, r_tilde: float, box: SampleBox) -> HypothesisResult:
    name = "K_AR_i"
    coeffs = [(c * (r_tilde / e - 1.0), e) for c, e in nonlin.pieces]
    top = max(e for _, e in coeffs)
    lead = sum(k for k, e in coeffs if e == top)
    v = box.v_samples()
    g = sum(k * v**e for k, e in coeffs)
    C = max(float(np.max(g)), 0.0)
    if lead < 0 or all(k <= 0 for k, _ in coeffs):
        return HypothesisResult(name, SYMBOLIC, {"C": C, "r_tilde": r_tilde})
    return HypothesisResult(name, VIOLATED, {"v": float(v[-1]), "r_tilde": r_tilde})


def _kar_ii_iii(term: KirchhoffTerm, r_tilde: float, box: SampleBox) -> Tuple[HypothesisResult, HypothesisResult]:
    p = term.p
    if isinstance(term, PurePower):
        r = term.r
        if r == 0.0 or r_tilde <= r:
            bad = HypothesisResult("K_AR_ii", VIOLATED, {"r_tilde": r_tilde})
            return bad, HypothesisResult("K_AR_iii", VIOLATED, {"r_tilde": r_tilde})
        k = r_tilde / r - 1.0
        # k s^r >= beta s - 1 con beta = min_s (k s^r + 1)/s
        beta = k if r == 1.0 else (
            k * r * (1.0 / (k * (r - 1.0))) ** ((r - 1.0) / r) if r > 1.0 else 0.0
        )
        iii = HypothesisResult("K_AR_iii", SYMBOLIC, {"h": r, "beta": k, "C": 0.0})
        if r >= 1.0:
            return HypothesisResult("K_AR_ii", SYMBOLIC, {"beta": beta, "C": 1.0}), iii
        return HypothesisResult("K_AR_ii", VIOLATED, {"h": r}, "crecimiento sublineal"), iii

    upper = None
    if isinstance(term, Tabulated):
        upper = term.t_samples[-1] ** (1.0 / p)
    s = box.s_samples(upper=upper)
    g = (r_tilde / p) * np.asarray(term.m_hat(s**p)) - np.asarray(term.M(s**p)) * s**p
    C = max(0.0, -float(np.min(g))) + 1.0
    beta = float(np.min((g + C) / s))
    tail = s > s[-1] / 10.0
    h = None
    if np.all(g[tail] > 0):
        h = float(np.polyfit(np.log(s[tail]), np.log(g[tail]), 1)[0])
    ii_ok = beta > 0 and h is not None and h >= 1.0 - 0.05
    ii = HypothesisResult(
        "K_AR_ii",
        SAMPLED if ii_ok else VIOLATED,
        {"beta": beta, "C": C, "r_tilde": r_tilde},
    )
    if h is not None and h > 0:
        iii = HypothesisResult("K_AR_iii", SAMPLED, {"h": h, "C": C, "r_tilde": r_tilde})
    else:
        iii = HypothesisResult("K_AR_iii", VIOLATED, {"r_tilde": r_tilde})
    return ii, iii


def _check_KC(term: KirchhoffTerm, nonlin: Nonlinearity, box: SampleBox) -> HypothesisResult:
    name = "K_C"
    varpi_t = nonlin.largest_exponent
    r_inf = growth_at_infinity(term)
    if r_inf is None or r_inf <= varpi_t:
        return HypothesisResult(name, VIOLATED, {"varpi_tilde": varpi_t}, "M̂ no domina a F")
    r_tilde = 0.5 * (varpi_t + r_inf)
    if isinstance(term, PurePower):
        p, r = term.p, term.r
        s_star = (r_tilde / p) ** (1.0 / (r - r_tilde))
        C = max(s_star**r_tilde - (p / r) * s_star**r, 0.0)
        return HypothesisResult(name, SYMBOLIC, {"r_tilde": r_tilde, "C": C})
    s = box.s_samples()
    C = float(np.max(s**r_tilde - np.asarray(term.m_hat(s**term.p))))
    return HypothesisResult(name, SAMPLED, {"r_tilde": r_tilde, "C": max(C, 0.0)})


def _check_KM(term: KirchhoffTerm, box: SampleBox) -> HypothesisResult:
    name = "K_M"
    if isinstance(term, (PurePower, MinPower)):
        return HypothesisResult(name, SYMBOLIC)
    if isinstance(term, Affine):
        return HypothesisResult(name, SYMBOLIC, detail="a + bt > 0 para t > 0")
    ms = term.m_samples[1:] if isinstance(term, Tabulated) else np.asarray(term.M(box.s_samples() ** term.p))
    if np.all(ms > 0):
        return HypothesisResult(name, SAMPLED)
    return HypothesisResult(name, VIOLATED, detail="M se anula en t > 0")


def _check_HB(nonlin: Nonlinearity, r_tilde: Optional[float]) -> HypothesisResult:
    name = "H_B"
    if r_tilde is None:
        return HypothesisResult(name, NOT_APPLICABLE, detail="r_tilde indefinido")
    top = nonlin.largest_exponent
    if top > r_tilde and _leading_coefficient(nonlin, top) > 0:
        return HypothesisResult(name, SYMBOLIC, {"r_tilde": r_tilde, "exponent": top})
    return HypothesisResult(name, VIOLATED, {"r_tilde": r_tilde})


@dataclass
class C1ConditionReport:
    """Condiciones de exponentes para que un mínimo C¹ sea mínimo en W"""

    lhs_growth: float
    rhs_growth: float
    holds_growth: bool
    margin_growth: float
    rhs_absorption: float
    margin_absorption: float
    holds_absorption: bool
    exponent_absorption: float
    exponent_growth: float

    def to_dict(self) -> Dict[str, Any]:
        return dict(self.__dict__)


def c1_condition_exponents(
    r: float, p: float, ell: float, ell_tilde: float, domain: DomainSpec
) -> C1ConditionReport:
    """
    Balance entre la degeneración de M y el crecimiento de f

    (ℓ-1) > (r-p)(p*-1)/(p*-p) y ℓ̃-1 > (r-p)(p*-ℓ)/(p*-r); los exponentes
    (p*-r)/(p*-ℓ)(ℓ̃-1) - r + p y (p*-r)/(p*-ℓ)(ℓ-1) - r + p son positivos
    exactamente cuando se cumplen.
    """
    pstar = _pstar(domain)
    if not p <= r < pstar:
        raise ConfigError(f"c1_condition: se requiere p <= r < p* (r={r}, p*={pstar})")
    if not p <= ell < pstar:
        raise ConfigError(f"c1_condition: se requiere ell en [p, p*) (ell={ell})")
    rhs_growth = (r - p) * (pstar - 1.0) / (pstar - p)
    rhs_absorption = (r - p) * (pstar - ell) / (pstar - r)
    factor = (pstar - r) / (pstar - ell)
    return C1ConditionReport(
        lhs_growth=ell - 1.0,
        rhs_growth=rhs_growth,
        holds_growth=ell - 1.0 > rhs_growth,
        margin_growth=ell - 1.0 - rhs_growth,
        rhs_absorption=rhs_absorption,
        margin_absorption=ell_tilde - 1.0 - rhs_absorption,
        holds_absorption=ell_tilde - 1.0 > rhs_absorption,
        exponent_absorption=factor * (ell_tilde - 1.0) - r + p,
        exponent_growth=factor * (ell - 1.0) - r + p,
    )


def check_hypotheses(
    term: KirchhoffTerm,
    nonlin: Nonlinearity,
    domain: DomainSpec,
    sample_box: Optional[SampleBox] = None,
) -> HypothesisReport:
    """
    Evalúa todas las hipótesis estructurales

    Los datos de potencias se deciden simbólicamente; el resto por muestreo
    logarítmico (lo que nunca se presenta como prueba). Una violación es un
    resultado, no un error.

    Args:
        term (KirchhoffTerm): Término no local
        nonlin (Nonlinearity): No linealidad
        domain (DomainSpec): Dominio (fija p y p*)
        sample_box (SampleBox): Rangos y densidad de muestreo

    Returns:
        HypothesisReport: Resultado por hipótesis y veredicto de compacidad
    """
    box = sample_box or SampleBox()
    r_zero = growth_at_zero(term, box)
    r_tilde = r_tilde_for(term, nonlin)
    exps = nonlinearity_exponents(nonlin)
    logger.info(f"Comprobando hipótesis: {term!r}, piezas {list(nonlin.pieces)}")

    results: Dict[str, HypothesisResult] = {}
    for res in (
        _check_H0(nonlin, domain),
        _check_growth_tilde(nonlin, domain),
        _check_PM_less(term, r_zero, box),
        _check_PF(nonlin, box),
        _check_PM_zero(term, box, everywhere=False),
        _check_small_sign(nonlin, box, "P_F_zero", use_f=False),
        _check_PM_zero(term, box, everywhere=True),
        _check_Qf(nonlin, domain, box),
        _check_QM_greater(term, domain, box),
        _check_KM(term, box),
        _check_KC(term, nonlin, box),
        _check_small_sign(nonlin, box, "H_f", use_f=True),
        _check_HB(nonlin, r_tilde),
    ):
        results[res.name] = res

    r_inf = growth_at_infinity(term)
    if r_tilde is not None and r_inf is not None and r_inf < nonlin.largest_exponent:
        results["K_AR_i"] = _kar_i(nonlin, r_tilde, box)
        ii, iii = _kar_ii_iii(term, r_tilde, box)
        results["K_AR_ii"] = ii
        results["K_AR_iii"] = iii
    else:
        for name in ("K_AR_i", "K_AR_ii", "K_AR_iii"):
            results[name] = HypothesisResult(name, NOT_APPLICABLE, detail="requiere r < varpi")

    pstar = _pstar(domain)
    if (
        isinstance(term, PurePower)
        and domain.p <= term.r < pstar
        and exps["q"] is not None
    ):
        ell = max(domain.p, exps["varpi"] or domain.p)
        if ell < pstar:
            report = c1_condition_exponents(term.r, domain.p, ell, exps["q"], domain)
            status = SYMBOLIC if report.holds_growth and report.holds_absorption else VIOLATED
            results["C1_exponents"] = HypothesisResult(
                "C1_exponents", status, report.to_dict()
            )

    base = results["H1_tilde"].holds and results["K_M"].holds
    if base and (
        (results["K_AR_i"].holds and results["K_AR_ii"].holds) or results["K_C"].holds
    ):
        compactness = "PS"
    elif base and results["K_AR_i"].holds and results["K_AR_iii"].holds:
        compactness = "Cerami"
    else:
        compactness = "none"

    context = {
        "p": domain.p,
        "p_star": pstar,
        "r_zero": r_zero,
        "r_infinity": r_inf,
        "r_tilde": r_tilde,
        **exps,
    }
    logger.info(f"Condición de compacidad: {compactness}")
    return HypothesisReport(results, context, compactness)


@dataclass
class ExistenceVerdict:
    regime: str
    members: Dict[str, bool]
    verdict: bool
    report: HypothesisReport

    def rows(self) -> List[Dict[str, Any]]:
        return [
            {"regime": self.regime, "member": k, "holds": v, "provenance": "computed"}
            for k, v in self.members.items()
        ]


def general_existence_check(
    term: KirchhoffTerm,
    nonlin: Nonlinearity,
    domain: DomainSpec,
    regime: str,
    sample_box: Optional[SampleBox] = None,
) -> ExistenceVerdict:
    """
    Paquetes de hipótesis de los teoremas generales

    "coercive": PS + (P_M^<) + (P_F) con r > p* (mínimo global negativo).
    "mountain-pass": PS + (Q_M^>) con r < p* + (H_f) + (H_B).
    """
    report = check_hypotheses(term, nonlin, domain, sample_box)
    pstar = report.context["p_star"]
    r_zero = report.context["r_zero"]
    ps = report.compactness == "PS"
    if regime == "coercive":
        members = {
            "PS": ps,
            "K_C": report.holds("K_C"),
            "K_M": report.holds("K_M"),
            "P_M_less": report.holds("P_M_less"),
            "P_F": report.holds("P_F"),
            "r_above_critical": r_zero is not None and r_zero > pstar,
        }
    elif regime == "mountain-pass":
        members = {
            "PS": ps,
            "K_AR": report.holds("K_AR_i") and report.holds("K_AR_ii"),
            "K_M": report.holds("K_M"),
            "Q_M_greater": report.holds("Q_M_greater"),
            "H_f": report.holds("H_f"),
            "H_B": report.holds("H_B"),
        }
    else:
        raise ConfigError(f"regime: valor desconocido '{regime}'")
    verdict = all(members.values())
    logger.info(f"Existencia ({regime}): {'se cumplen' if verdict else 'no se cumplen'} las hipótesis")
    return ExistenceVerdict(regime, members, verdict, report)
