"""
Contraejemplo Hölder / Sobolev
Presupuesto de exponentes (σ, α, β), comparación de los tres exponentes,
sucesión testigo ε^σψ_ε y sondas de minimalidad por muestreo
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from .errors import ConfigError, NumericalError
from .functionals import (
    KirchhoffTerm,
    Nonlinearity,
    RayDecomposition,
)
from .hypotheses import SampleBox, check_hypotheses
from .instanton import beta_for_alpha, psi_profile, sobolev_level
from .radial_core import (
    DomainSpec,
    RadialGrid,
    RadialProfile,
    build_grid,
    c1_norm,
    critical_exponent,
    geometric_ladder,
    log_slope_fit,
    parallel_map,
    sobolev_norm,
    sup_norm,
)

logger = logging.getLogger(__name__)

DEFAULT_LADDER = (1e-1, 1e-1, 30)
PROBE_TOLERANCE = 1e-10


@dataclass(frozen=True)
class ExponentBudget:
    """Exponentes (N, p, q, ϖ, r) con los parámetros σ, α, β de la construcción"""

    N: int
    p: float
    q: float
    varpi: float
    r: float
    sigma: float
    alpha: float
    beta: float

    @property
    def p_star(self) -> float:
        return self.p * self.N / (self.N - self.p)

    @property
    def decay(self) -> float:
        """(N-p)/p"""
        return (self.N - self.p) / self.p

    @property
    def sigma_interval(self) -> Tuple[float, float]:
        lo = self.decay * (self.p_star - self.varpi) / (self.r - self.varpi)
        return lo, self.decay

    @property
    def alpha_bound(self) -> float:
        return (self.varpi - self.q) * (self.decay - self.sigma)

    def to_dict(self) -> Dict[str, Any]:
        lo, hi = self.sigma_interval
        return {
            "N": self.N,
            "p": self.p,
            "q": self.q,
            "varpi": self.varpi,
            "r": self.r,
            "sigma": self.sigma,
            "alpha": self.alpha,
            "beta": self.beta,
            "p_star": self.p_star,
            "sigma_lo": lo,
            "sigma_hi": hi,
            "alpha_bound": self.alpha_bound,
        }


def exponent_budget(
    N: int,
    p: float,
    q: float,
    varpi: float,
    r: float,
    sigma: Optional[float] = None,
    alpha: Optional[float] = None,
    beta: Optional[float] = None,
) -> ExponentBudget:
    """
    Construye el presupuesto de exponentes

    σ por defecto es el punto medio de su intervalo admisible, α la mitad de
    su cota superior y β el valor que limita la pérdida del exponente de
    ‖ψ_ε‖_q^q a α/2.

    Args:
        N (int): Dimensión (N > p)
        p (float): Exponente del p-Laplaciano
        q (float): Exponente de absorción
        varpi (float): Exponente de la reacción positiva
        r (float): Exponente del término no local

    Returns:
        ExponentBudget: Presupuesto validado
    """
    if N <= p:
        raise ConfigError(f"exponent_budget: se requiere N > p (N={N}, p={p})")
    pstar = p * N / (N - p)
    if not r > pstar:
        raise ConfigError(f"exponent_budget: se requiere r > p* (r={r}, p*={pstar:g})")
    if not pstar >= varpi:
        raise ConfigError(f"exponent_budget: se requiere p* >= varpi (varpi={varpi})")
    if not varpi > q:
        raise ConfigError(f"exponent_budget: se requiere q < varpi (q={q}, varpi={varpi})")
    if not q >= 1:
        raise ConfigError(f"exponent_budget: se requiere q >= 1 (q={q})")

    decay = (N - p) / p
    lo = decay * (pstar - varpi) / (r - varpi)
    sigma = 0.5 * (lo + decay) if sigma is None else float(sigma)
    if not lo < sigma < decay:
        raise ConfigError(
            f"exponent_budget.sigma: se requiere {lo:g} < sigma < {decay:g} (sigma={sigma})"
        )
    bound = (varpi - q) * (decay - sigma)
    alpha = 0.5 * bound if alpha is None else float(alpha)
    if not 0 < alpha < bound:
        raise ConfigError(
            f"exponent_budget.alpha: se requiere 0 < alpha < {bound:g} (alpha={alpha})"
        )
    beta = beta_for_alpha(N, p, q, alpha) if beta is None else float(beta)
    if not 0 < beta < 1:
        raise ConfigError(f"exponent_budget.beta: se requiere 0 < beta < 1 (beta={beta})")
    budget = ExponentBudget(int(N), float(p), float(q), float(varpi), float(r), sigma, alpha, beta)
    logger.info(f"Presupuesto: sigma={sigma:.6g}, alpha={alpha:.6g}, beta={beta:.6g}")
    return budget


def exponent_triple(budget: ExponentBudget) -> Tuple[float, float, float]:
    """(e1, e2, e3) = (rσ, N + q(σ - (N-p)/p) - α, N + ϖ(σ - (N-p)/p))"""
    b = budget
    e1 = b.r * b.sigma
    e2 = b.N + b.q * (b.sigma - b.decay) - b.alpha
    e3 = b.N + b.varpi * (b.sigma - b.decay)
    return e1, e2, e3


def default_ladder() -> List[float]:
    """Escalera por defecto 10^-1, ..., 10^-30"""
    return geometric_ladder(*DEFAULT_LADDER)


def _split_terms(ray: RayDecomposition, t: float) -> Tuple[float, float, float]:
    """(principal, absorción, ganancia) con J(tψ) = A + B - G"""
    A = float(ray.term.m_hat(t**ray.p * ray.W)) / ray.p
    B = sum(-(c / e) * t**e * L for c, e, L in ray.pieces if c < 0)
    G = sum((c / e) * t**e * L for c, e, L in ray.pieces if c > 0)
    return A, B, G


@dataclass
class TraceReport:
    """Traza de la sucesión ε^σψ_ε"""

    budget: ExponentBudget
    exponents: Tuple[float, float, float]
    eps: List[float]
    w_norm: List[float]
    sup: List[float]
    J: List[float]
    principal: List[float]
    absorption: List[float]
    gain: List[float]
    eps_star: Optional[float]
    C_fit: float
    c_fit: float
    w_bound: List[float]
    sup_slope: float
    w_slope: float
    sobolev_level: float

    @property
    def inequality_holds(self) -> bool:
        e1, e2, e3 = self.exponents
        return all(
            J + self.c_fit * e**e3 <= self.C_fit * (e**e1 + e**e2) * (1 + 1e-12)
            for e, J in zip(self.eps, self.J)
        )

    @property
    def w_bound_holds(self) -> bool:
        return all(w <= b * (1 + 1e-12) for w, b in zip(self.w_norm, self.w_bound))

    def below_star(self) -> List[int]:
        if self.eps_star is None:
            return []
        return [i for i, e in enumerate(self.eps) if e <= self.eps_star]

    @property
    def small_norm_below_star(self) -> bool:
        """Norma W por debajo del 25% de su máximo en toda la cola negativa"""
        top = max(self.w_norm)
        return all(self.w_norm[i] < 0.25 * top for i in self.below_star())

    def rows(self) -> List[Dict[str, Any]]:
        e1, e2, e3 = self.exponents
        rows = []
        for i, e in enumerate(self.eps):
            rows.append(
                {
                    "eps": e,
                    "w_norm": self.w_norm[i],
                    "sup_norm": self.sup[i],
                    "J": self.J[i],
                    "principal": self.principal[i],
                    "absorption": self.absorption[i],
                    "gain": self.gain[i],
                    "upper_bound": self.C_fit * (e**e1 + e**e2),
                    "lower_gain": self.c_fit * e**e3,
                    "w_bound": self.w_bound[i],
                    "provenance": "computed",
                }
            )
        return rows

    def summary(self) -> Dict[str, Any]:
        e1, e2, e3 = self.exponents
        return {
            "budget": self.budget.to_dict(),
            "e1": e1,
            "e2": e2,
            "e3": e3,
            "eps_star": self.eps_star,
            "C_fit": self.C_fit,
            "c_fit": self.c_fit,
            "inequality_holds": self.inequality_holds,
            "w_bound_holds": self.w_bound_holds,
            "small_norm_below_star": self.small_norm_below_star,
            "sup_slope": self.sup_slope,
            "sup_slope_predicted": self.budget.sigma - self.budget.decay,
            "w_slope": self.w_slope,
        }


def trace_counterexample(
    budget: ExponentBudget,
    eps_ladder: Optional[Sequence[float]],
    term: KirchhoffTerm,
    nonlin: Nonlinearity,
    domain: DomainSpec,
    threads: int = 1,
    check: bool = True,
) -> TraceReport:
    """
    Evalúa J(ε^σψ_ε) y los tres términos de la cota sobre una escalera

    ε* es el mayor ε de la escalera a partir del cual J < 0 en todos los
    puntos menores. Las constantes C y c se ajustan a los datos:
    C = max (A + B)/(ε^{e1} + ε^{e2}), c = min G/ε^{e3}.
    """
    ladder = sorted((float(e) for e in (eps_ladder or default_ladder())), reverse=True)
    if len(ladder) < 2:
        raise ConfigError("eps_ladder: se requieren al menos dos valores")
    if check:
        report = check_hypotheses(term, nonlin, domain, SampleBox(per_decade=100))
        for name in ("P_M_less", "P_F"):
            if not report.holds(name):
                raise ConfigError(f"trace_counterexample: no se cumple la hipótesis {name}")

    def evaluate(eps: float) -> Tuple[float, float, float, float, float, float]:
        try:
            psi = psi_profile(eps, budget.beta, domain)
            ray = RayDecomposition.of(psi, term, nonlin, domain)
        except NumericalError as e:
            logger.error(f"Error durante la traza en eps={eps:g}: {e}")
            raise
        t = eps**budget.sigma
        A, B, G = _split_terms(ray, t)
        return t * ray.W ** (1.0 / domain.p), t * sup_norm(psi), ray.J(t), A, B, G

    logger.info(f"Traza del contraejemplo sobre {len(ladder)} valores de eps")
    results = parallel_map(evaluate, ladder, threads)
    w_norm = [r[0] for r in results]
    sup = [r[1] for r in results]
    J = [r[2] for r in results]
    A = [r[3] for r in results]
    B = [r[4] for r in results]
    G = [r[5] for r in results]

    eps_star: Optional[float] = None
    for e, j in zip(reversed(ladder), reversed(J)):
        if j < 0:
            eps_star = e
        else:
            break
    if eps_star is None:
        raise NumericalError(
            "sin cambio de signo de J en la escalera; extienda la escalera",
            {"eps_min": ladder[-1], "J_min_eps": J[-1]},
        )

    e1, e2, e3 = exponent_triple(budget)
    C_fit = max((a + b) / (e**e1 + e**e2) for e, a, b in zip(ladder, A, B))
    c_fit = min(g / e**e3 for e, g in zip(ladder, G))
    _, level, _ = sobolev_level(domain)
    w_bound = [e**budget.sigma * (2.0 * level) ** (1.0 / domain.p) for e in ladder]

    report_ = TraceReport(
        budget=budget,
        exponents=(e1, e2, e3),
        eps=ladder,
        w_norm=w_norm,
        sup=sup,
        J=J,
        principal=A,
        absorption=B,
        gain=G,
        eps_star=eps_star,
        C_fit=C_fit,
        c_fit=c_fit,
        w_bound=w_bound,
        sup_slope=log_slope_fit(ladder, sup)[0],
        w_slope=log_slope_fit(ladder, w_norm)[0],
        sobolev_level=level,
    )
    logger.info(f"eps* = {eps_star:.3e}; C = {C_fit:.4g}, c = {c_fit:.4g}")
    return report_


@dataclass
class TSegmentReport:
    eps: float
    t: List[float]
    J: List[float]
    initially_positive: bool
    first_sign_change: Optional[float]

    def rows(self) -> List[Dict[str, Any]]:
        return [
            {"eps": self.eps, "t": t, "J": j, "provenance": "computed"}
            for t, j in zip(self.t, self.J)
        ]


def t_segment(
    budget: ExponentBudget,
    eps: float,
    term: KirchhoffTerm,
    nonlin: Nonlinearity,
    domain: DomainSpec,
    t_max: float = 1.0,
    samples: int = 241,
) -> TSegmentReport:
    """J(tψ_ε) para t en (0, t_max]: positivo para t pequeño y primer cambio de signo"""
    if t_max <= 0:
        raise ConfigError("t_segment.t_max: se requiere t_max > 0")
    ray = RayDecomposition.of(psi_profile(eps, budget.beta, domain), term, nonlin, domain)
    ts = np.logspace(math.log10(t_max) - 12.0, math.log10(t_max), samples)
    values = ray.values(ts)
    negative = np.nonzero(values < 0)[0]
    first: Optional[float] = None
    if negative.size:
        i = int(negative[0])
        first = float(ts[0]) if i == 0 else float(brentq(ray.J, ts[i - 1], ts[i], xtol=1e-14 * ts[i]))
    return TSegmentReport(
        eps=float(eps),
        t=[float(t) for t in ts],
        J=[float(v) for v in values],
        initially_positive=bool(values[0] > 0),
        first_sign_change=first,
    )


# Sondas de minimalidad
TOPOLOGIES = ("Linf", "C1", "W")


@dataclass(frozen=True, eq=False)
class ProbeMember:
    """Perfil base de la familia; se escala a norma θ·radio"""

    label: str
    profile: RadialProfile


def _topology_norm(u: RadialProfile, topology: str, domain: DomainSpec) -> float:
    if topology == "Linf":
        return sup_norm(u)
    if topology == "C1":
        return c1_norm(u)
    if topology == "W":
        return sobolev_norm(u, domain)
    raise ConfigError(f"probe.topology: valor desconocido '{topology}'")


def _analytic(
    grid: RadialGrid, f: Callable[[np.ndarray], np.ndarray], df: Callable[[np.ndarray], np.ndarray]
) -> RadialProfile:
    return RadialProfile.from_function(grid, f, df, dirichlet=True)


def probe_family(
    domain: DomainSpec,
    seed: int = 0,
    eps_values: Optional[Sequence[float]] = None,
    beta: float = 0.9,
    eigen_count: int = 4,
    bump_count: int = 8,
) -> List[ProbeMember]:
    """
    Familia estructurada: instantones truncados, perfiles propios y
    combinaciones aleatorias de bultos (semilla fija)
    """
    R = domain.R
    members: List[ProbeMember] = []
    for eps in eps_values or [10.0 ** (-k) for k in range(1, 21)]:
        if domain.has_critical_exponent and eps**beta <= R:
            members.append(ProbeMember(f"instanton eps={eps:.3g}", psi_profile(eps, beta, domain)))

    grid = build_grid(domain, 256, 1.0)
    for j in range(1, eigen_count + 1):
        if domain.kind == "interval":
            w = j * math.pi / R
            member = _analytic(grid, lambda r, w=w: np.sin(w * r), lambda r, w=w: w * np.cos(w * r))
        else:
            w = (2 * j - 1) * math.pi / (2.0 * R)
            member = _analytic(grid, lambda r, w=w: np.cos(w * r), lambda r, w=w: -w * np.sin(w * r))
        members.append(ProbeMember(f"eigen j={j}", member))

    rng = np.random.default_rng(seed)
    for b in range(bump_count):
        amps = rng.uniform(-1.0, 1.0, 3)
        centers = rng.uniform(0.0, R, 3)
        widths = rng.uniform(0.05, 0.5, 3) * R

        def f(r: np.ndarray, a=amps, c=centers, w=widths) -> np.ndarray:
            env = 1.0 - (r / R) ** 2
            return env * sum(ai * np.exp(-((r - ci) / wi) ** 2) for ai, ci, wi in zip(a, c, w))

        def df(r: np.ndarray, a=amps, c=centers, w=widths) -> np.ndarray:
            env = 1.0 - (r / R) ** 2
            denv = -2.0 * r / R**2
            g = sum(ai * np.exp(-((r - ci) / wi) ** 2) for ai, ci, wi in zip(a, c, w))
            dg = sum(
                -2.0 * ai * (r - ci) / wi**2 * np.exp(-((r - ci) / wi) ** 2)
                for ai, ci, wi in zip(a, c, w)
            )
            return denv * g + env * dg

        members.append(ProbeMember(f"bump #{b}", _analytic(grid, f, df)))
    return members


@dataclass
class ProbeVerdict:
    topology: str
    radius: float
    min_J: float
    min_relative: float
    verdict: str
    witness_label: Optional[str]
    witness_scale: Optional[float]
    witness_norm: Optional[float]
    witness_profile: Optional[RadialProfile] = field(default=None, repr=False)
    evaluations: int = 0

    def summary(self) -> Dict[str, Any]:
        return {
            "topology": self.topology,
            "radius": self.radius,
            "min_J": self.min_J,
            "min_relative": self.min_relative,
            "verdict": self.verdict,
            "witness": self.witness_label,
            "witness_norm": self.witness_norm,
            "evaluations": self.evaluations,
        }


def probe_local_minimum(
    term: KirchhoffTerm,
    nonlin: Nonlinearity,
    domain: DomainSpec,
    topology: str,
    radius: float,
    family: Optional[Sequence[ProbeMember]] = None,
    thetas: Optional[Sequence[float]] = None,
    tol: float = PROBE_TOLERANCE,
    threads: int = 1,
) -> ProbeVerdict:
    """
    Sonda de minimalidad del origen en la bola de la topología dada

    Cada miembro se escala a norma θ·radio (θ en (0, 1]) y se evalúa J. Se refuta
    cuando J(tψ) < -tol·(|A| + |B| + |G|) para algún miembro.
    Nunca se afirma minimalidad: solo "consistent-with-minimum" o "refuted".
    """
    if topology not in TOPOLOGIES:
        raise ConfigError(f"probe.topology: valor desconocido '{topology}'")
    if radius <= 0:
        raise ConfigError("probe.radius: se requiere radius > 0")
    members = list(family) if family is not None else probe_family(domain)
    if not members:
        raise ConfigError("probe.family: familia vacía")
    theta = np.asarray(thetas if thetas is not None else np.logspace(-12.0, 0.0, 49))

    def scan(member: ProbeMember) -> Tuple[float, float, float, float, float]:
        base = _topology_norm(member.profile, topology, domain)
        if base == 0.0:
            return math.inf, math.inf, 0.0, 0.0, math.inf
        ray = RayDecomposition.of(member.profile, term, nonlin, domain)
        ts = theta * radius / base
        values = ray.values(ts)
        # J relativo a la suma de los módulos de sus tres partes
        mags = np.array([sum(abs(x) for x in _split_terms(ray, float(t))) for t in ts])
        rel = np.divide(values, mags, out=np.zeros_like(values), where=mags > 0)
        i = int(np.argmin(rel))
        return float(rel[i]), float(values[i]), float(ts[i]), float(theta[i] * radius), float(np.min(values))

    results = parallel_map(scan, members, threads)
    best = int(np.argmin([r[0] for r in results]))
    min_rel, _, scale, norm, _ = results[best]
    min_J = min(r[4] for r in results)
    verdict = "consistent-with-minimum" if min_rel >= -tol else "refuted"
    witness = members[best]
    logger.info(
        f"Sonda {topology} (radio {radius:g}): min J = {min_J:.3e}, "
        f"relativo {min_rel:.3e} -> {verdict}"
    )
    return ProbeVerdict(
        topology=topology,
        radius=float(radius),
        min_J=min_J,
        min_relative=min_rel,
        verdict=verdict,
        witness_label=witness.label if verdict == "refuted" else None,
        witness_scale=scale if verdict == "refuted" else None,
        witness_norm=norm if verdict == "refuted" else None,
        witness_profile=witness.profile.scale(scale) if verdict == "refuted" else None,
        evaluations=len(members) * theta.size,
    )


def critical_regime(domain: DomainSpec, r: float) -> str:
    """'supercritical' si r > p*, si no 'subcritical'"""
    return "supercritical" if r > critical_exponent(domain) else "subcritical"
