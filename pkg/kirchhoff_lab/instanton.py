"""
Instantones de Sobolev
Perfil Φ_ε, corte ξ_m, familia truncada Φ_{ε,m}, familia reequilibrada
ψ_ε = Φ_{ε,ε^{-β}} y verificación de las asintóticas de sus normas
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import quad

from .errors import ConfigError, NumericalError
from .radial_core import (
    DomainSpec,
    RadialGrid,
    RadialProfile,
    build_piecewise_grid,
    critical_exponent,
    lebesgue_norm_s,
    log_slope_fit,
    parallel_map,
    sobolev_norm_p,
)

logger = logging.getLogger(__name__)

DEFAULT_BETA = 0.9
FAR_FIELD = 1.0e3
INNER_CELLS = 400
RAMP_CELLS = 100
INNER_GRADING = 4.0


def _exponents(N: int, p: float) -> Tuple[float, float]:
    """(k, a) = ((N-p)/p, p/(p-1))"""
    return (N - p) / p, p / (p - 1.0)


def _tail(coef: float, power: float, m: float, a: float, T: float) -> float:
    # ∫_T^∞ coef·t^power·(1 - m·t^{-a}) dt, dos términos del binomio
    lead = -(T ** (power + 1.0)) / (power + 1.0)
    corr = -(T ** (power + 1.0 - a)) / (power + 1.0 - a)
    return coef * (lead - m * corr)


def _whole_space_integrals(N: int, p: float, eps: float) -> Tuple[float, float]:
    """
    ∫|∇Φ_ε|^p y ∫Φ_ε^{p*} en R^N con C_{N,p} = 1 (sin el factor ω_{N-1})

    Cuadratura adaptativa en [0, 10³ε] con puntos de ruptura logarítmicos y
    corrección analítica de la cola de potencias.
    """
    k, a = _exponents(N, p)
    pstar = p * N / (N - p)
    amp = eps ** (k / (p - 1.0))

    def grad_integrand(rho: float) -> float:
        t = rho / eps
        d = amp * k * a * t ** (a - 1.0) * (1.0 + t**a) ** (-k - 1.0) * eps ** (-a * k) / eps
        return abs(d) ** p * rho ** (N - 1)

    def crit_integrand(rho: float) -> float:
        t = rho / eps
        phi = amp * eps ** (-a * k) * (1.0 + t**a) ** (-k)
        return phi**pstar * rho ** (N - 1)

    breaks = eps * np.array([0.0, 1e-2, 1e-1, 1.0, 10.0, 100.0, FAR_FIELD])
    grad = 0.0
    crit = 0.0
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        for name, integrand in (("gradiente", grad_integrand), ("crítica", crit_integrand)):
            value, err = quad(integrand, lo, hi, epsabs=0.0, epsrel=1e-13, limit=400)
            if not math.isfinite(value) or err > 1e-9 * max(abs(value), 1e-300):
                raise NumericalError(
                    f"cuadratura {name} sin convergencia",
                    {"eps": eps, "tramo": (float(lo), float(hi)), "error": err},
                )
            if name == "gradiente":
                grad += value
            else:
                crit += value

    # Colas en la variable t = ρ/ε; ambas integrales son invariantes por escala
    g_pow = p * (a - 1.0) + N - 1 - a * p * (k + 1.0)
    c_pow = N - 1 - a * N
    grad += _tail((k * a) ** p, g_pow, p * (k + 1.0), a, FAR_FIELD)
    crit += _tail(1.0, c_pow, float(N), a, FAR_FIELD)
    return grad, crit


@lru_cache(maxsize=64)
def _normalization(N: int, p: float, eps: float) -> Tuple[float, float, float]:
    grad, crit = _whole_space_integrals(N, p, eps)
    C = (grad / crit) ** (1.0 / p)
    return C, grad, crit


def normalization_constant(domain: DomainSpec, eps: float = 1.0) -> float:
    """
    Constante C_{N,p} tal que ‖∇Φ_ε‖_p^p = ‖Φ_ε‖_{p*}^{p*} en R^N

    Args:
        domain (DomainSpec): Dominio con N > p
        eps (float): Escala usada para las integrales (el resultado no depende de ella)

    Returns:
        float: C_{N,p} > 0
    """
    critical_exponent(domain)
    if eps <= 0:
        raise ConfigError("instanton.eps: se requiere eps > 0")
    C, _, _ = _normalization(domain.N, float(domain.p), float(eps))
    logger.debug(f"C_(N,p) = {C!r} (N={domain.N}, p={domain.p}, eps={eps})")
    return C


def sobolev_level(domain: DomainSpec) -> Tuple[float, float, float]:
    """
    Nivel de Sobolev

    Returns:
        Tuple[float, float, float]: (C_{N,p}, S^{N/p}, S)
    """
    critical_exponent(domain)
    C, grad, _ = _normalization(domain.N, float(domain.p), 1.0)
    k, _ = _exponents(domain.N, domain.p)
    level = domain.surface_factor * grad * C ** (k * domain.p)
    return C, level, level ** (domain.p / domain.N)


@dataclass(frozen=True)
class InstantonParams:
    """Parámetros (ε, m) de Φ_{ε,m} con la constante de normalización"""

    eps: float
    m: float
    C_norm: float
    domain: DomainSpec

    def __post_init__(self) -> None:
        if not (self.eps > 0 and math.isfinite(self.eps)):
            raise ConfigError(f"instanton.eps: se requiere eps > 0 (recibido {self.eps})")
        if not (self.m > 0 and math.isfinite(self.m)):
            raise ConfigError(f"instanton.m: se requiere m > 0 (recibido {self.m})")
        if self.C_norm <= 0:
            raise ConfigError("instanton.C_norm: se requiere C > 0")

    @classmethod
    def create(cls, eps: float, m: float, domain: DomainSpec) -> "InstantonParams":
        return cls(eps, m, normalization_constant(domain), domain)

    @classmethod
    def from_beta(cls, eps: float, beta: float, domain: DomainSpec) -> "InstantonParams":
        if not 0.0 < beta < 1.0:
            raise ConfigError(f"instanton.beta: se requiere 0 < beta < 1 (recibido {beta})")
        return cls.create(eps, eps ** (-beta), domain)

    @property
    def support_radius(self) -> float:
        return 1.0 / self.m

    @property
    def asymptotic(self) -> bool:
        """εm < 1: régimen en el que valen las estimaciones"""
        return self.eps * self.m < 1.0


def instanton_value(params: InstantonParams, rho: np.ndarray) -> np.ndarray:
    """Φ_ε(ρ) = (C ε^{1/(p-1)}/(ε^{p/(p-1)} + ρ^{p/(p-1)}))^{(N-p)/p}"""
    N, p = params.domain.N, params.domain.p
    k, a = _exponents(N, p)
    rho = np.asarray(rho, dtype=float)
    base = params.C_norm * params.eps ** (1.0 / (p - 1.0))
    return (base / (params.eps**a + rho**a)) ** k


def instanton_derivative(params: InstantonParams, rho: np.ndarray) -> np.ndarray:
    N, p = params.domain.N, params.domain.p
    k, a = _exponents(N, p)
    rho = np.asarray(rho, dtype=float)
    denom = params.eps**a + rho**a
    return -k * a * rho ** (a - 1.0) * instanton_value(params, rho) / denom


def instanton_profile(params: InstantonParams, grid: RadialGrid) -> RadialProfile:
    """Φ_ε en la malla, con derivada analítica (sin corte)"""
    return RadialProfile.from_function(
        grid,
        lambda r: instanton_value(params, r),
        lambda r: instanton_derivative(params, r),
        dirichlet=False,
    )


def cutoff_value(m: float, rho: np.ndarray) -> np.ndarray:
    """
    Corte ξ_m: 1 en B_{1/(2m)}, 0 fuera de B_{1/m}

    Rampa cúbica (smoothstep) sobre [1/(2m), 1/m]; pendiente máxima 3m.
    """
    if m <= 0:
        raise ConfigError("cutoff.m: se requiere m > 0")
    s = np.clip(2.0 * m * np.asarray(rho, dtype=float) - 1.0, 0.0, 1.0)
    return 1.0 - s * s * (3.0 - 2.0 * s)


def cutoff_derivative(m: float, rho: np.ndarray) -> np.ndarray:
    s = np.clip(2.0 * m * np.asarray(rho, dtype=float) - 1.0, 0.0, 1.0)
    return -6.0 * s * (1.0 - s) * 2.0 * m


def support_grid(
    eps: float,
    m: float,
    domain: DomainSpec,
    inner_cells: int = INNER_CELLS,
    ramp_cells: int = RAMP_CELLS,
    grading: float = INNER_GRADING,
) -> RadialGrid:
    """Malla sobre [0, 1/m] con nodos en 1/(2m) y agrupada hacia el pico"""
    radius = 1.0 / m
    return build_piecewise_grid(
        domain,
        [0.0, 0.5 * radius, radius],
        [inner_cells, ramp_cells],
        [grading, 1.0],
    )


def truncated_profile(
    eps: float,
    m: float,
    domain: DomainSpec,
    grid: Optional[RadialGrid] = None,
) -> RadialProfile:
    """
    Φ_{ε,m} = ξ_m Φ_ε con ε y m independientes

    Args:
        eps (float): Escala de concentración
        m (float): Inverso del radio de soporte (1/m <= R)
        domain (DomainSpec): Dominio
        grid (RadialGrid): Malla opcional; por defecto la malla de soporte

    Returns:
        RadialProfile: Perfil analítico con condición de Dirichlet
    """
    params = InstantonParams.create(eps, m, domain)
    if params.support_radius > domain.R * (1.0 + 1e-12):
        raise ConfigError(
            f"instanton: el soporte 1/m = {params.support_radius:g} excede R = {domain.R:g}"
        )
    grid = grid or support_grid(eps, m, domain)

    def value(r: np.ndarray) -> np.ndarray:
        return cutoff_value(m, r) * instanton_value(params, r)

    def derivative(r: np.ndarray) -> np.ndarray:
        return cutoff_derivative(m, r) * instanton_value(params, r) + cutoff_value(
            m, r
        ) * instanton_derivative(params, r)

    return RadialProfile.from_function(grid, value, derivative, dirichlet=True)


def psi_profile(
    eps: float,
    beta: float,
    domain: DomainSpec,
    grid: Optional[RadialGrid] = None,
) -> RadialProfile:
    """ψ_ε = Φ_{ε,ε^{-β}}: soporte en B_{ε^β}, igual a Φ_ε en B_{ε^β/2}"""
    if not 0.0 < beta < 1.0:
        raise ConfigError(f"instanton.beta: se requiere 0 < beta < 1 (recibido {beta})")
    return truncated_profile(eps, eps ** (-beta), domain, grid)


# Asintóticas
def _threshold(N: int, p: float) -> float:
    return N * (p - 1.0) / (N - p)


def regime(N: int, p: float, s: float) -> int:
    """1 si s > N(p-1)/(N-p), 2 en la igualdad, 3 por debajo"""
    s0 = _threshold(N, p)
    if math.isclose(s, s0, rel_tol=1e-12):
        return 2
    return 1 if s > s0 else 3


def predicted_eta(N: int, p: float, s: float, eps: float, m: float) -> float:
    """
    Orden η_{N,p,s} de ‖Φ_{ε,m}‖_s^s en sus tres regímenes

    Args:
        N (int): Dimensión (N > p)
        p (float): Exponente
        s (float): Exponente de Lebesgue, 1 <= s < p*
        eps (float): Escala
        m (float): Inverso del radio de soporte

    Returns:
        float: Valor del orden predicho
    """
    if N <= p:
        raise ConfigError(f"predicted_eta: se requiere N > p (N={N}, p={p})")
    pstar = p * N / (N - p)
    if not 1.0 <= s < pstar:
        raise ConfigError(f"predicted_eta: se requiere 1 <= s < p* = {pstar:g} (s={s})")
    reg = regime(N, p, s)
    if reg == 1:
        return eps ** (N - (N - p) * s / p)
    if reg == 2:
        return eps ** (N / p) * abs(math.log(eps * m))
    return eps ** ((N - p) * s / (p * (p - 1.0))) * m ** (s * (N - p) / (p - 1.0) - N)


def regime_three_factor(N: int, p: float, s: float) -> float:
    """max(0, N - s(N-p)/(p-1)): pérdida por unidad de (1 - β)"""
    return max(0.0, N - s * (N - p) / (p - 1.0))


def beta_for_alpha(N: int, p: float, s: float, alpha: float) -> float:
    """
    β que mantiene la pérdida del exponente de ‖ψ_ε‖_s^s por debajo de α/2

    La pérdida respecto a N - (N-p)s/p es (1-β)·max(0, N - s(N-p)/(p-1)).
    """
    if alpha <= 0:
        raise ConfigError("beta_for_alpha: se requiere alpha > 0")
    factor = regime_three_factor(N, p, s)
    if factor == 0.0:
        return DEFAULT_BETA
    return max(DEFAULT_BETA, 1.0 - alpha / (2.0 * factor))


def predicted_slope(N: int, p: float, s: float, beta: float) -> float:
    """Pendiente de log‖ψ_ε‖_s^s frente a log ε con m = ε^{-β} (sin el logaritmo del régimen 2)"""
    reg = regime(N, p, s) if s < p * N / (N - p) else 1
    if reg == 1:
        return N - (N - p) * s / p
    if reg == 2:
        return N / p
    return (N - p) * s / (p * (p - 1.0)) - beta * (s * (N - p) / (p - 1.0) - N)


@dataclass
class AsymptoticsReport:
    """Resultado de un ajuste log-log sobre una escalera de ε"""

    s: float
    beta: float
    eps: List[float]
    values: List[float]
    fitted_slope: float
    predicted_slope: float
    intercept: float
    residual: float
    lower_constant: float
    regime: int
    gap_values: List[float] = field(default_factory=list)
    gap_slope: Optional[float] = None
    gap_predicted_slope: Optional[float] = None

    def rows(self) -> List[Dict[str, object]]:
        rows: List[Dict[str, object]] = []
        for i, (e, v) in enumerate(zip(self.eps, self.values)):
            row: Dict[str, object] = {
                "eps": e,
                "s": self.s,
                "norm_s_s": v,
                "provenance": "computed",
            }
            if self.gap_values:
                row["gap"] = self.gap_values[i]
            rows.append(row)
        return rows

    def summary(self) -> Dict[str, object]:
        return {
            "s": self.s,
            "beta": self.beta,
            "fitted_slope": self.fitted_slope,
            "predicted_slope": self.predicted_slope,
            "residual": self.residual,
            "lower_constant": self.lower_constant,
            "regime": self.regime,
            "gap_slope": self.gap_slope,
            "gap_predicted_slope": self.gap_predicted_slope,
        }


def _check_ladder(eps_ladder: Sequence[float]) -> List[float]:
    ladder = [float(e) for e in eps_ladder]
    if len(ladder) < 2 or any(e <= 0 for e in ladder):
        raise ConfigError("eps_ladder: se requieren al menos dos valores positivos")
    if math.log10(max(ladder) / min(ladder)) < 2.0 - 1e-9:
        raise ConfigError("eps_ladder: la escalera debe abarcar al menos dos décadas")
    return ladder


def verify_asymptotics(
    s: float,
    eps_ladder: Sequence[float],
    beta: float,
    domain: DomainSpec,
    threads: int = 1,
) -> AsymptoticsReport:
    """
    Ajusta la pendiente de log‖ψ_ε‖_s^s frente a log ε

    Para s = p* se informa además la sucesión |‖ψ_ε‖_{p*}^{p*} - S^{N/p}| y su
    pendiente, que se compara con N(1-β)/(p-1).
    """
    ladder = _check_ladder(eps_ladder)
    pstar = critical_exponent(domain)
    if not 1.0 <= s <= pstar * (1.0 + 1e-12):
        raise ConfigError(f"verify_asymptotics: se requiere 1 <= s <= p* (s={s})")

    def evaluate(eps: float) -> float:
        try:
            return lebesgue_norm_s(psi_profile(eps, beta, domain), s, domain)
        except NumericalError as e:
            logger.error(f"Error durante la cuadratura en eps={eps:g}: {e}")
            raise
        except FloatingPointError as e:
            raise NumericalError("cuadratura fallida", {"eps": eps}) from e

    logger.info(f"Asintóticas de ψ_ε: s={s}, beta={beta}, {len(ladder)} puntos")
    values = parallel_map(evaluate, ladder, threads)
    for e, v in zip(ladder, values):
        if not (math.isfinite(v) and v > 0):
            raise NumericalError("norma no positiva o no finita", {"eps": e, "valor": v})

    slope, intercept, residual = log_slope_fit(ladder, values)
    N, p = domain.N, domain.p
    reference = np.array(ladder) ** (N - (N - p) * s / p)
    lower = float(np.min(np.array(values) / reference))
    is_critical = math.isclose(s, pstar, rel_tol=1e-12)
    report = AsymptoticsReport(
        s=float(s),
        beta=float(beta),
        eps=ladder,
        values=[float(v) for v in values],
        fitted_slope=slope,
        predicted_slope=predicted_slope(N, p, s, beta),
        intercept=intercept,
        residual=residual,
        lower_constant=lower,
        regime=1 if is_critical else regime(N, p, s),
    )
    if is_critical:
        _, level, _ = sobolev_level(domain)
        gaps = [abs(v - level) for v in values]
        report.gap_values = gaps
        report.gap_predicted_slope = N * (1.0 - beta) / (p - 1.0)
        if all(g > 0 for g in gaps):
            report.gap_slope = log_slope_fit(ladder, gaps)[0]
    logger.info(
        f"Pendiente ajustada {slope:.4f} (predicha {report.predicted_slope:.4f})"
    )
    return report


@dataclass
class SobolevLevelReport:
    """‖ψ_ε‖_W^p frente a S^{N/p} sobre una escalera"""

    beta: float
    eps: List[float]
    values: List[float]
    level: float
    relative_gaps: List[float]
    gap_slope: Optional[float]
    predicted_gap_slope: float
    eps0: Optional[float]

    @property
    def final_gap(self) -> float:
        return self.relative_gaps[int(np.argmin(self.eps))]

    def rows(self) -> List[Dict[str, object]]:
        return [
            {
                "eps": e,
                "norm_w_p": v,
                "sobolev_level": self.level,
                "relative_gap": g,
                "provenance": "computed",
            }
            for e, v, g in zip(self.eps, self.values, self.relative_gaps)
        ]


def verify_sobolev_level(
    eps_ladder: Sequence[float], beta: float, domain: DomainSpec, threads: int = 1
) -> SobolevLevelReport:
    """
    Compara ‖ψ_ε‖_W^p con S^{N/p} y localiza ε₀

    ε₀ es el mayor ε de la escalera por debajo del cual (incluido) todos los
    valores caen en [S^{N/p}/2, 2S^{N/p}].
    """
    ladder = _check_ladder(eps_ladder)
    _, level, _ = sobolev_level(domain)
    values = parallel_map(
        lambda e: sobolev_norm_p(psi_profile(e, beta, domain), domain), ladder, threads
    )
    gaps = [abs(v - level) / level for v in values]

    order = np.argsort(ladder)
    eps0: Optional[float] = None
    for idx in order:
        if level / 2.0 <= values[idx] <= 2.0 * level:
            eps0 = ladder[idx]
        else:
            break

    gap_slope = None
    if all(g > 0 for g in gaps):
        gap_slope = log_slope_fit(ladder, gaps)[0]
    N, p = domain.N, domain.p
    report = SobolevLevelReport(
        beta=float(beta),
        eps=ladder,
        values=[float(v) for v in values],
        level=level,
        relative_gaps=gaps,
        gap_slope=gap_slope,
        predicted_gap_slope=(1.0 - beta) * (N - p) / (p - 1.0),
        eps0=eps0,
    )
    logger.info(f"Nivel de Sobolev {level:.6g}; brecha final {report.final_gap:.3e}")
    return report


@dataclass
class TruncationReport:
    """Tasas de Φ_{ε,m} frente a εm con ε fijo"""

    eps: float
    m: List[float]
    gradient_gaps: List[float]
    critical_gaps: List[float]
    gradient_slope: float
    critical_slope: float
    predicted_gradient_slope: float
    predicted_critical_slope: float
    sandwich: List[Tuple[float, float, float]]
    sandwich_s: float

    @property
    def sandwich_holds(self) -> bool:
        return all(lo <= mid * (1 + 1e-12) and mid <= hi * (1 + 1e-12) for lo, mid, hi in self.sandwich)

    def rows(self) -> List[Dict[str, object]]:
        return [
            {
                "eps": self.eps,
                "m": m,
                "eps_m": self.eps * m,
                "gradient_gap": g,
                "critical_gap": c,
                "inner_integral": lo,
                "norm_s_s": mid,
                "outer_integral": hi,
                "provenance": "computed",
            }
            for m, g, c, (lo, mid, hi) in zip(
                self.m, self.gradient_gaps, self.critical_gaps, self.sandwich
            )
        ]


def verify_truncation_rates(
    eps: float,
    m_ladder: Sequence[float],
    domain: DomainSpec,
    s: Optional[float] = None,
    threads: int = 1,
) -> TruncationReport:
    """
    Tasas de convergencia de ‖∇Φ_{ε,m}‖_p^p y ‖Φ_{ε,m}‖_{p*}^{p*} hacia S^{N/p}

    También comprueba ∫_{B_{1/(2m)}}Φ_ε^s <= ‖Φ_{ε,m}‖_s^s <= ∫_{B_{1/m}}Φ_ε^s
    (por defecto s = (p + p*)/2).
    """
    ms = [float(m) for m in m_ladder]
    if len(ms) < 2:
        raise ConfigError("m_ladder: se requieren al menos dos valores")
    pstar = critical_exponent(domain)
    s_val = 0.5 * (domain.p + pstar) if s is None else float(s)
    _, level, _ = sobolev_level(domain)
    omega = domain.surface_factor

    def evaluate(m: float) -> Tuple[float, float, Tuple[float, float, float]]:
        trunc = truncated_profile(eps, m, domain)
        grid = trunc.grid
        params = InstantonParams.create(eps, m, domain)
        full = instanton_value(params, grid.quad_points) ** s_val
        inner_cells = grid.nodes[1:] <= 0.5 / m * (1.0 + 1e-12)
        lower = omega * float(np.sum(grid.weights[inner_cells] * full[inner_cells]))
        upper = omega * grid.integrate(full)
        middle = lebesgue_norm_s(trunc, s_val, domain)
        return (
            abs(sobolev_norm_p(trunc, domain) - level),
            abs(lebesgue_norm_s(trunc, pstar, domain) - level),
            (lower, middle, upper),
        )

    results = parallel_map(evaluate, ms, threads)
    em = [eps * m for m in ms]
    grad_gaps = [r[0] for r in results]
    crit_gaps = [r[1] for r in results]
    N, p = domain.N, domain.p
    report = TruncationReport(
        eps=float(eps),
        m=ms,
        gradient_gaps=grad_gaps,
        critical_gaps=crit_gaps,
        gradient_slope=log_slope_fit(em, grad_gaps)[0],
        critical_slope=log_slope_fit(em, crit_gaps)[0],
        predicted_gradient_slope=(N - p) / (p - 1.0),
        predicted_critical_slope=N / (p - 1.0),
        sandwich=[r[2] for r in results],
        sandwich_s=s_val,
    )
    logger.info(
        f"Tasas de truncamiento: gradiente {report.gradient_slope:.3f} "
        f"(predicha {report.predicted_gradient_slope:.3f}), crítica "
        f"{report.critical_slope:.3f} (predicha {report.predicted_critical_slope:.3f})"
    )
    return report
