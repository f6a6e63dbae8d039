"""
Estimaciones a priori
Cota de Moser como ley de escala, decaimiento L^∞ de minimizadores con
restricción, interpolación Hölder-Young, umbral de no existencia y cotas de
crecimiento del paso de montaña general
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from .counterexample import probe_family
from .errors import ConfigError, NumericalError
from .functionals import (
    Affine,
    KirchhoffTerm,
    Nonlinearity,
    RayDecomposition,
    dual_norm,
    load_vector,
    weak_residual,
)
from .hypotheses import SampleBox, check_hypotheses, r_tilde_for
from .instanton import sobolev_level
from .radial_core import (
    DomainSpec,
    RadialProfile,
    build_grid,
    geometric_ladder,
    lebesgue_norm,
    lebesgue_norm_s,
    log_slope_fit,
    parallel_map,
    sobolev_norm,
    sup_norm,
)
from .shooting import BRENT_RTOL, shoot_local
from .solver import DiscreteProblem

logger = logging.getLogger(__name__)

REL_SLACK = 1e-12
TREND_TOLERANCE = 0.05
V_CEILING = 1e15


def _compare(label: str, lhs: float, rhs: float, **extra: Any) -> Dict[str, Any]:
    """lhs <= rhs con holgura relativa 1e-12"""
    slack = REL_SLACK * max(abs(lhs), abs(rhs))
    ratio = lhs / rhs if rhs != 0 else math.inf
    row = {"label": label, "lhs": lhs, "rhs": rhs, "ratio": ratio, "holds": lhs <= rhs + slack}
    row.update(extra)
    return row


@dataclass
class BoundReport:
    """Comparaciones lhs <= rhs de una familia, con constantes ajustadas"""

    family: str
    members: List[Dict[str, Any]]
    fitted: Dict[str, float] = field(default_factory=dict)
    verdict: str = "consistent"
    notes: Dict[str, Any] = field(default_factory=dict)

    @property
    def max_ratio(self) -> float:
        ratios = [m["ratio"] for m in self.members if math.isfinite(m["ratio"])]
        return max(ratios) if ratios else math.nan

    @property
    def holds(self) -> bool:
        return all(m["holds"] for m in self.members)

    @property
    def failures(self) -> List[Dict[str, Any]]:
        return [m for m in self.members if not m["holds"]]

    def rows(self) -> List[Dict[str, Any]]:
        return [dict(m, family=self.family, provenance="computed") for m in self.members]

    def summary(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "family": self.family,
            "verdict": self.verdict,
            "max_ratio": self.max_ratio,
            "members": len(self.members),
        }
        out.update(self.fitted)
        out.update(self.notes)
        return out


def _pstar(domain: DomainSpec) -> float:
    if not domain.has_critical_exponent:
        raise ConfigError(f"estimates: se requiere N > p (N={domain.N}, p={domain.p})")
    return domain.critical_exponent


def _trend(x: Sequence[float], y: Sequence[float]) -> float:
    lx = np.log(np.asarray(x, dtype=float))
    if lx.size < 2 or np.ptp(lx) < 1e-12:
        return 0.0
    return log_slope_fit(x, y)[0]


# Cota de Moser
@dataclass(frozen=True, eq=False)
class SolutionMember:
    """Solución de -Δ_p u = γ f(u) con u = 0 en el borde"""

    label: str
    profile: RadialProfile
    gamma: float
    nonlin: Nonlinearity


def shooting_family(
    nonlin: Nonlinearity,
    domain: DomainSpec,
    gammas: Sequence[float],
    heights: Sequence[float],
    cells: int = 800,
    tol: float = 1e-8,
) -> List[SolutionMember]:
    """Soluciones del problema local por disparo; cada (γ, d) debe aterrizar en u(R) = 0"""
    members = []
    for gamma in gammas:
        for d in heights:
            shot = shoot_local(gamma, nonlin, d, domain, stop_at_crossing=False, cells=cells, grading=1.0)
            if abs(shot.end_value) > tol * d:
                raise ConfigError(
                    f"shooting_family: (gamma={gamma:.6g}, d={d:.3g}) no es solución de Dirichlet "
                    f"(u(R) = {shot.end_value:.3e})"
                )
            assert shot.profile is not None
            members.append(SolutionMember(f"gamma={gamma:.6g} d={d:.3g}", shot.profile, gamma, nonlin))
    return members


def power_solution_family(
    nonlin: Nonlinearity,
    domain: DomainSpec,
    heights: Sequence[float],
    gamma_range: Tuple[float, float] = (1e-3, 1e4),
    samples: int = 64,
    cells: int = 800,
) -> List[SolutionMember]:
    """
    Soluciones positivas para f = c|v|^{e-2}v, c > 0

    Con u = d·w la altura solo reescala el multiplicador: γ(d) = γ(1)·d^{p-e},
    y γ(1) es la primera raíz de Dirichlet con d = 1.
    """
    if len(nonlin.pieces) != 1 or nonlin.pieces[0][0] <= 0:
        raise ConfigError("power_solution_family: se requiere f = c|v|^(e-2)v con c > 0")
    e = nonlin.pieces[0][1]
    p = domain.p

    def mismatch(g: float) -> float:
        shot = shoot_local(g, nonlin, 1.0, domain, stop_at_crossing=False, with_profile=False)
        return shot.end_value

    gs = np.geomspace(gamma_range[0], gamma_range[1], samples)
    values = [mismatch(float(g)) for g in gs]
    bracket = next(
        ((a, b) for a, b, fa, fb in zip(gs[:-1], gs[1:], values[:-1], values[1:]) if fa * fb < 0),
        None,
    )
    if bracket is None:
        raise NumericalError(
            "power_solution_family: sin cambio de signo en el rango de gamma",
            {"gamma_min": gamma_range[0], "gamma_max": gamma_range[1]},
        )
    gamma1 = float(brentq(mismatch, bracket[0], bracket[1], xtol=1e-15 * bracket[0], rtol=BRENT_RTOL))
    logger.info(f"Multiplicador de Dirichlet con d = 1: gamma = {gamma1:.12g}")
    members: List[SolutionMember] = []
    for d in heights:
        members.extend(shooting_family(nonlin, domain, [gamma1 * d ** (p - e)], [d], cells))
    return members


def _growth_constant_ok(member: SolutionMember, ell: float, L: float) -> bool:
    top = sup_norm(member.profile)
    v = np.linspace(-top, top, 2001)
    v = v[v != 0.0]
    g = member.gamma * np.asarray(member.nonlin.f(v)) * np.sign(v)
    return bool(np.all(g <= L * np.abs(v) ** (ell - 1.0) * (1.0 + REL_SLACK)))


def moser_bound_check(
    members: Sequence[SolutionMember],
    ell: float,
    L: float,
    domain: DomainSpec,
    threads: int = 1,
) -> BoundReport:
    """
    ‖u‖_∞ frente a L^{1/(p*-ℓ)}‖u‖_{p*}^{(p*-p)/(p*-ℓ)} sobre una familia de soluciones

    Cada miembro debe ser solución verificada (residuo débil relativo < 1e-6)
    y cumplir γf(v)·sgn(v) <= L|v|^{ℓ-1} en su rango.
    """
    rd = domain.radial_half()
    pstar = _pstar(rd)
    p = rd.p
    if not p <= ell < pstar:
        raise ConfigError(f"moser: se requiere p <= ell < p* (ell={ell}, p*={pstar:.6g})")
    if not L > 0:
        raise ConfigError("moser: se requiere L > 0")
    exponent = (pstar - p) / (pstar - ell)
    scale = L ** (1.0 / (pstar - ell))

    def evaluate(member: SolutionMember) -> Optional[Dict[str, Any]]:
        u = member.profile
        if u.is_zero():
            return None
        if not _growth_constant_ok(member, ell, L):
            raise ConfigError(f"moser: {member.label} no cumple f·sgn(v) <= L|v|^(ell-1)")
        check = weak_residual(u, Affine(1.0, 0.0, p), member.nonlin.scaled(member.gamma), rd)
        if check.relative >= 1e-6:
            raise ConfigError(
                f"moser: {member.label} no es solución verificada (residuo {check.relative:.3e})"
            )
        lhs = sup_norm(u)
        rhs = scale * lebesgue_norm(u, pstar, rd) ** exponent
        return {"label": member.label, "lhs": lhs, "rhs": rhs, "ratio": lhs / rhs, "holds": True}

    rows = [row for row in parallel_map(evaluate, members, threads) if row is not None]
    if not rows:
        raise NumericalError("moser: familia vacía (solo soluciones triviales)", {})
    C1 = max(row["ratio"] for row in rows)
    trend = _trend([row["lhs"] for row in rows], [row["ratio"] for row in rows])
    verdict = "growing" if trend > TREND_TOLERANCE else "consistent"
    logger.info(f"Moser: C1 ajustada {C1:.6g}, tendencia {trend:.3g}")
    return BoundReport(
        "moser",
        rows,
        fitted={"C1": C1, "ratio_trend": trend, "exponent": exponent, "L": L, "ell": ell},
        verdict=verdict,
    )


# Decaimiento L^∞ de minimizadores con restricción Q(u) <= ε
def _constrained_minimizer(
    problem: DiscreteProblem, ell: float, eps: float, U0: np.ndarray, tol: float, max_iter: int
) -> np.ndarray:
    """
    Descenso proyectado sobre {Q(u) = ‖u‖_ℓ^ℓ/ℓ <= ε}

    Q es ℓ-homogénea: la proyección es el reescalado u ↦ (ε/Q)^{1/ℓ}u.
    """
    rd = problem.domain

    def Q(U: np.ndarray) -> float:
        return lebesgue_norm_s(problem.profile(U), ell, rd) / ell

    def retract(U: np.ndarray) -> np.ndarray:
        q = Q(U)
        return U * (eps / q) ** (1.0 / ell) if q > eps else U

    U = retract(U0)
    J = problem.energy(U)
    for it in range(max_iter):
        info = problem.residual(U)
        g = info.vector
        active = Q(U) >= eps * (1.0 - 1e-10)
        if active:
            prof = problem.profile(U)
            qvec = load_vector(
                np.sign(prof.quad_values) * np.abs(prof.quad_values) ** (ell - 1.0),
                problem.grid,
                rd,
            )
            qn = dual_norm(qvec, problem.grid, rd)
            # componente tangente: g + μq con μ >= 0 (multiplicador)
            if qn > 0:
                mu = max(0.0, -float(np.dot(g, qvec)) / float(np.dot(qvec, qvec)))
                g = g + mu * qvec
        gnorm = dual_norm(g, problem.grid, rd)
        if gnorm <= tol * max(info.dual_norm, 1e-300) or gnorm <= 1e-14:
            return U
        direction = -problem.precondition(U, g)
        if float(np.dot(info.vector, direction)) >= 0:
            direction = -g
        t = 1.0
        while t >= 1e-12:
            trial = retract(U + t * direction)
            J_trial = problem.energy(trial)
            if J_trial < J:
                break
            t *= 0.5
        else:
            return U
        U, J = trial, J_trial
    raise NumericalError("linfty_decay: el descenso con restricción no convergió", {"eps": eps, "J": J})


def _growth_constant(nonlin: Nonlinearity, ell: float) -> float:
    """D = sup f(v)sgn(v)/|v|^{ℓ-1}; ConfigError si el cociente crece en 0 o en ∞"""
    v = np.geomspace(1e-8, 1e8, 321)
    ratios = [
        np.asarray(nonlin.f(v)) / v ** (ell - 1.0),
        -np.asarray(nonlin.f(-v)) / v ** (ell - 1.0),
    ]
    for ratio in ratios:
        at_zero = ratio[0] > 0 and ratio[0] > ratio[1] * (1.0 + 1e-9)
        at_infinity = ratio[-1] > 0 and ratio[-1] > ratio[-2] * (1.0 + 1e-9)
        if at_zero or at_infinity:
            raise ConfigError("linfty_decay: f·sgn(v) no está acotada por D|v|^(ell-1)")
    return float(max(np.max(ratios[0]), np.max(ratios[1])))


def linfty_decay_check(
    term: KirchhoffTerm,
    nonlin: Nonlinearity,
    ell: float,
    domain: DomainSpec,
    eps_ladder: Optional[Sequence[float]] = None,
    cells: int = 400,
    tol: float = 1e-6,
    max_iter: int = 4000,
) -> BoundReport:
    """
    Minimizadores v_ε de J en {Q <= ε}: pendiente log de ‖v‖_∞ frente a ‖v‖_W
    comparada con (p*-r)/(p*-ℓ)
    """
    rd = domain.radial_half()
    pstar = _pstar(rd)
    r = getattr(term, "r", None)
    if r is None:
        raise ConfigError("linfty_decay: el término requiere exponente r (pure_power)")
    if not rd.p <= ell < pstar:
        raise ConfigError(f"linfty_decay: se requiere p <= ell < p* (ell={ell})")
    D = _growth_constant(nonlin, ell)
    predicted = (pstar - r) / (pstar - ell)
    ladder = list(eps_ladder) if eps_ladder is not None else geometric_ladder(1e-2, 0.1, 5)

    problem = DiscreteProblem(term, nonlin, rd, cells, 1.5, positive_part=False)
    rows = []
    U = problem.bump()
    for eps in ladder:
        U = _constrained_minimizer(problem, ell, eps, U, tol, max_iter)
        prof = problem.profile(U)
        W = sobolev_norm(prof, rd)
        sup = sup_norm(prof)
        J = problem.energy(U)
        if W == 0.0 or sup == 0.0:
            continue
        rows.append({"label": f"eps={eps:.3g}", "lhs": sup, "rhs": W**predicted,
                     "ratio": sup / W**predicted, "holds": True, "W": W, "J": J, "eps": eps})
    if not rows:
        raise NumericalError("linfty_decay: familia degenerada (todos los miembros nulos)", {})
    slope = _trend([row["W"] for row in rows], [row["lhs"] for row in rows])
    consistent = slope >= predicted - TREND_TOLERANCE
    notes = {}
    if predicted < TREND_TOLERANCE:
        notes["degenerate_exponent"] = True
        logger.warning("Exponente (p*-r)/(p*-ell) casi nulo: la cota degenera con r cerca de p*")
    return BoundReport(
        "linfty-decay",
        rows,
        fitted={"slope": slope, "predicted": predicted, "D": D,
                "C": max(row["ratio"] for row in rows)},
        verdict="consistent" if consistent else "violated",
        notes=notes,
    )


# Interpolación y umbral de no existencia
EMBED_MODES = ("variational", "sobolev-holder", "user")
EMBED_LABELS = {"variational": "indicative", "sobolev-holder": "conservative", "user": "certified"}


def embedding_constant(
    domain: DomainSpec, r: float, mode: str = "variational", value: Optional[float] = None, seed: int = 0
) -> Tuple[float, str]:
    """
    Constante C de ‖u‖_r <= C‖u‖_W

    variational: cota inferior por maximización sobre instantones, perfiles
    propios, bultos y polinomios (1-(ρ/R)²)^k. sobolev-holder:
    |Ω|^{1/r-1/p*}S^{-1/p}, cota superior. user: valor dado.
    """
    rd = domain.radial_half()
    if mode not in EMBED_MODES:
        raise ConfigError(f"embed_estimate: modo desconocido '{mode}'")
    if mode == "user":
        if value is None or not value > 0:
            raise ConfigError("embed_estimate: el modo user requiere C > 0")
        return float(value), EMBED_LABELS[mode]
    if mode == "sobolev-holder":
        pstar = _pstar(rd)
        _, _, S = sobolev_level(rd)
        C = rd.volume ** (1.0 / r - 1.0 / pstar) * S ** (-1.0 / rd.p)
        return float(C), EMBED_LABELS[mode]

    members = [m.profile for m in probe_family(rd, seed, eps_values=[0.3, 0.1, 0.03, 0.01])]
    grid = build_grid(rd, 256, 1.0)
    R = rd.R
    for k in range(1, 5):
        members.append(
            RadialProfile.from_function(
                grid,
                lambda x, k=k: (1.0 - (x / R) ** 2) ** k,
                lambda x, k=k: -2.0 * k * x / R**2 * (1.0 - (x / R) ** 2) ** (k - 1),
                dirichlet=True,
            )
        )
    best = max(lebesgue_norm(u, r, rd) / sobolev_norm(u, rd) for u in members)
    return float(best), EMBED_LABELS[mode]


def interpolation_check(
    u: RadialProfile,
    q: float,
    varpi: float,
    r: float,
    domain: DomainSpec,
    C: Optional[float] = None,
    embed_estimate: str = "sobolev-holder",
) -> BoundReport:
    """
    ‖u‖_ϖ^ϖ <= ‖u‖_q^{q(r-ϖ)/(r-q)}‖u‖_r^{r(ϖ-q)/(r-q)} (Hölder) y la forma de
    Young con ‖u‖_r <= C‖u‖_W
    """
    rd = domain.radial_half()
    pstar = rd.critical_exponent if rd.has_critical_exponent else math.inf
    if not q < varpi < r <= pstar:
        raise ConfigError(f"interpolation: se requiere q < varpi < r <= p* ({q}, {varpi}, {r})")
    a = (r - varpi) / (r - q)
    b = (varpi - q) / (r - q)
    Lq = lebesgue_norm_s(u, q, rd)
    Lr = lebesgue_norm_s(u, r, rd)
    lhs = lebesgue_norm_s(u, varpi, rd)
    members = [
        _compare("holder", lhs, Lq**a * Lr**b),
        _compare("young", lhs, a * Lq + b * Lr),
    ]
    if C is None and rd.has_critical_exponent:
        C, label = embedding_constant(rd, r, embed_estimate)
    else:
        label = "certified" if C is not None else "unavailable"
    if C is not None:
        W = sobolev_norm(u, rd)
        members.append(_compare("young-sobolev", lhs, a * Lq + b * (C * W) ** r, C=C))
    return BoundReport(
        "interpolation",
        members,
        fitted={} if C is None else {"C": C},
        verdict="consistent" if all(m["holds"] for m in members) else "violated",
        notes={"embed_label": label},
    )


@dataclass(frozen=True)
class NonexistenceCertificate:
    """Λ₁ = min{(r-q)/((ϖ-q)C^r), (r-q)/(r-ϖ)} con la procedencia de C"""

    q: float
    varpi: float
    r: float
    C: float
    mode: str
    label: str

    @property
    def first_term(self) -> float:
        return (self.r - self.q) / ((self.varpi - self.q) * self.C**self.r)

    @property
    def second_term(self) -> float:
        return (self.r - self.q) / (self.r - self.varpi)

    @property
    def Lambda1(self) -> float:
        return min(self.first_term, self.second_term)

    def coefficients(self, lam: float) -> Tuple[float, float]:
        """(1 - λ(ϖ-q)C^r/(r-q), 1 - λ(r-ϖ)/(r-q))"""
        return (
            1.0 - lam * (self.varpi - self.q) / (self.r - self.q) * self.C**self.r,
            1.0 - lam * (self.r - self.varpi) / (self.r - self.q),
        )

    def excludes(self, lam: float) -> bool:
        return all(c > 0 for c in self.coefficients(lam))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "q": self.q,
            "varpi": self.varpi,
            "r": self.r,
            "C": self.C,
            "embed_estimate": self.mode,
            "label": self.label,
            "first_term": self.first_term,
            "second_term": self.second_term,
            "Lambda1": self.Lambda1,
        }


def nonexistence_threshold(
    q: float,
    varpi: float,
    r: float,
    domain: DomainSpec,
    embed_estimate: str = "variational",
    C: Optional[float] = None,
) -> NonexistenceCertificate:
    """Por debajo de Λ₁ la única solución no negativa del modelo es u = 0"""
    rd = domain.radial_half()
    pstar = rd.critical_exponent if rd.has_critical_exponent else math.inf
    if not q < varpi < r <= pstar:
        raise ConfigError(f"nonexistence: se requiere q < varpi < r <= p* ({q}, {varpi}, {r})")
    value, label = embedding_constant(rd, r, embed_estimate, C)
    cert = NonexistenceCertificate(q, varpi, r, value, embed_estimate, label)
    logger.info(f"Umbral de no existencia Lambda1 = {cert.Lambda1:.6g} ({label}, C = {value:.6g})")
    return cert


# Cotas de crecimiento
def growth_bounds_check(
    term: KirchhoffTerm,
    nonlin: Nonlinearity,
    domain: DomainSpec,
    r_tilde: Optional[float] = None,
    box: Optional[SampleBox] = None,
    A: float = 1.0,
    thresholds: Sequence[float] = (1.0, 10.0, 100.0),
) -> BoundReport:
    """
    M̂(s^p) <= D s^{r̃} para s >= s₀, M̂(t) → ∞ y F(v⁺) >= A v^{r̃} - E_A

    D = M̂(t₀)/t₀^{r̃/p} con t₀ el punto desde el que r̃M̂(t)/p - M(t)t >= 0.
    """
    box = box or SampleBox(per_decade=100)
    r_tilde = r_tilde if r_tilde is not None else r_tilde_for(term, nonlin)
    if r_tilde is None:
        raise ConfigError("growth_bounds: r_tilde indefinido para este par (M, f)")
    report = check_hypotheses(term, nonlin, domain, box)
    for name in ("K_M", "K_AR_ii"):
        if not report.holds(name):
            raise ConfigError(f"growth_bounds: la hipótesis {name} no se cumple")
    p = term.p
    s = box.s_samples()
    t = s**p
    m_hat = np.asarray(term.m_hat(t), dtype=float)
    g = (r_tilde / p) * m_hat - np.asarray(term.M(t), dtype=float) * t
    bad = np.nonzero(g < 0)[0]
    start = 0 if bad.size == 0 else int(bad[-1]) + 1
    if start >= s.size:
        raise ConfigError("growth_bounds: sin t0 en la caja de muestreo")
    one = int(np.searchsorted(s, 1.0))
    if start < one < s.size:
        start = one
    t0 = float(t[start])
    D = float(m_hat[start]) / t0 ** (r_tilde / p)

    members: List[Dict[str, Any]] = []
    upper = D * s[start:] ** r_tilde
    worst = int(np.argmax(m_hat[start:] / upper))
    members.append(
        _compare("M_hat_upper", float(m_hat[start + worst]), float(upper[worst]), s=float(s[start + worst]))
    )
    for level in thresholds:
        tail_min = np.minimum.accumulate(m_hat[::-1])[::-1]
        reached = np.nonzero(tail_min >= level)[0]
        if reached.size:
            s_big, floor = float(s[reached[0]]), float(tail_min[reached[0]])
        else:
            s_big, floor = math.nan, float(tail_min[-1])
        members.append(_compare(f"M_hat_diverges_{level:g}", level, floor, s_big=s_big))

    plus = nonlin.with_positive_part(True)
    v = np.concatenate([[0.0], box.v_samples()])
    F = np.asarray(plus.F(v), dtype=float)
    gap = F - A * v**r_tilde
    # el mínimo de F - Av^r̃ puede quedar por encima de v_max: se extiende el muestreo
    while gap[-1] < 0 and v[-1] < V_CEILING:
        extra = np.geomspace(v[-1], v[-1] * 1e3, 3 * box.per_decade + 1)[1:]
        v = np.concatenate([v, extra])
        F = np.asarray(plus.F(v), dtype=float)
        gap = F - A * v**r_tilde
    neg = np.nonzero(gap < 0)[0]
    if not neg.size:
        v_A = 0.0
    elif neg[-1] + 1 < v.size:
        v_A = float(v[neg[-1] + 1])
    else:
        v_A = math.inf
    E_A = float(max(0.0, -np.min(gap)))
    lower = A * v**r_tilde - E_A
    worst_f = int(np.argmax(lower - F))
    members.append(_compare("F_lower", float(lower[worst_f]), float(F[worst_f]), v=float(v[worst_f])))

    verdict = "consistent" if all(m["holds"] for m in members) else "violated"
    if verdict == "violated":
        logger.warning(f"Cotas de crecimiento violadas: {[m['label'] for m in members if not m['holds']]}")
    return BoundReport(
        "growth-bounds",
        members,
        fitted={"D": D, "t0": t0, "s0": float(s[start]), "E_A": E_A, "A": A, "v_A": v_A, "r_tilde": r_tilde},
        verdict=verdict,
    )


def ray_certificate(
    term: KirchhoffTerm,
    nonlin: Nonlinearity,
    domain: DomainSpec,
    r_tilde: Optional[float] = None,
    box: Optional[SampleBox] = None,
) -> BoundReport:
    """
    Cota J⁺(tψ) <= -D t^{r̃}/p + E_A|B| con A = 2D/(p‖ψ‖_{r̃}^{r̃}) y T con J⁺(Tψ) < 0
    """
    rd = domain.radial_half()
    box = box or SampleBox(per_decade=100)
    r_tilde = r_tilde if r_tilde is not None else r_tilde_for(term, nonlin)
    if r_tilde is None:
        raise ConfigError("ray_certificate: r_tilde indefinido para este par (M, f)")
    grid = build_grid(rd, 512, 1.0)
    k = 0.5 * math.pi / rd.R
    bump = RadialProfile.from_function(
        grid, lambda x: np.cos(k * x), lambda x: -k * np.sin(k * x), dirichlet=True
    )
    psi = bump.scale(1.0 / sobolev_norm(bump, rd))
    p = rd.p
    first = growth_bounds_check(term, nonlin, domain, r_tilde, box)
    D = first.fitted["D"]
    A = 2.0 * D / (p * lebesgue_norm_s(psi, r_tilde, rd))
    growth = growth_bounds_check(term, nonlin, domain, r_tilde, box, A=A)
    E_A = growth.fitted["E_A"]
    s0 = growth.fitted["s0"]
    volume = rd.volume

    T = max(s0, (2.0 * p * E_A * volume / D) ** (1.0 / r_tilde)) * 1.01
    ray = RayDecomposition.of(psi, term, nonlin.with_positive_part(True), rd)
    members = list(growth.members)
    for t in np.geomspace(s0, T, 60):
        bound = -D * t**r_tilde / p + E_A * volume
        members.append(_compare(f"ray_bound t={t:.4g}", ray.J(float(t)), bound, t=float(t)))
    J_T = ray.J(T)
    members.append(_compare("far_point_negative", J_T, 0.0, T=T))
    return BoundReport(
        "ray-certificate",
        members,
        fitted={"D": D, "A": A, "E_A": E_A, "T": T, "J_T": J_T, "r_tilde": r_tilde},
        verdict="consistent" if all(m["holds"] for m in members) else "violated",
    )
