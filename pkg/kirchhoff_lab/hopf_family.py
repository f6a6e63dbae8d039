"""
Familia de soluciones sin lema de Hopf
Perfil de soporte compacto por disparo, familia reescalada μΦ(λx) y el
ejemplo de senos con M(s²) = s⁻²
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigError, NumericalError
from .functionals import Nonlinearity, PurePower, weak_residual
from .radial_core import (
    QUAD_ORDER,
    DomainSpec,
    RadialGrid,
    RadialProfile,
    build_grid,
    c1_norm,
    geometric_ladder,
    gradient_sup_norm,
    log_slope_fit,
    parallel_map,
    sobolev_norm_p,
    sup_norm,
)
from .shooting import CROSSING, FLAT_LANDING, shoot_local

logger = logging.getLogger(__name__)

UNIT_BALL = DomainSpec("ball", 3, 1.0, 2.0)
HOST_RADIUS = 2.0
DELTA_STOP = 1e-12
SHOT_RTOL = 1e-13
SUPPORT_CELLS = 1600
EXTENSION_CELLS = 40


@dataclass(frozen=True, eq=False)
class CompactSupportProfile:
    """
    Solución plana de -Δu = -u^{q-1} + b₀u^{ϖ-1} en la bola unidad

    El perfil se extiende por cero en [ρ₀, 1]; `support` es el tramo [0, ρ₀].
    """

    q: float
    varpi: float
    b0: float
    d: float
    rho0: float
    profile: RadialProfile
    support: RadialProfile
    flat_residual: float
    domain: DomainSpec = UNIT_BALL
    scan: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def nonlinearity(self) -> Nonlinearity:
        return Nonlinearity.from_pieces([(-1.0, self.q), (self.b0, self.varpi)])

    @property
    def W_norm(self) -> float:
        return math.sqrt(sobolev_norm_p(self.support, self.domain))

    def summary(self) -> Dict[str, Any]:
        return {
            "q": self.q,
            "varpi": self.varpi,
            "b0": self.b0,
            "d": self.d,
            "rho0": self.rho0,
            "flat_residual": self.flat_residual,
            "W_norm": self.W_norm,
            "sup": sup_norm(self.support),
        }


def _zero_extend(support: RadialProfile, radius: float) -> RadialProfile:
    grid = support.grid
    rho0 = grid.radius
    extra = rho0 + (radius - rho0) * np.linspace(0.0, 1.0, EXTENSION_CELLS + 1)[1:]
    full = RadialGrid.from_nodes(np.concatenate([grid.nodes, extra]), grid.dimension, grid.grading)
    pad_nodes = np.zeros(EXTENSION_CELLS)
    pad_quad = np.zeros((EXTENSION_CELLS, QUAD_ORDER))
    values = np.concatenate([np.maximum(support.values, 0.0), pad_nodes])
    values[grid.nodes.size - 1] = 0.0
    return RadialProfile(
        grid=full,
        values=values,
        derivatives=np.concatenate([support.derivatives, pad_nodes]),
        quad_values=np.concatenate([np.maximum(support.quad_values, 0.0), pad_quad]),
        quad_derivatives=np.concatenate([support.quad_derivatives, pad_quad]),
        dirichlet=True,
        representation="analytic",
    )


def _crosses(result_class: str) -> bool:
    return result_class in (CROSSING, FLAT_LANDING)


def _shoot(nonlin: Nonlinearity, d: float, with_profile: bool = False, cells: int = SUPPORT_CELLS):
    return shoot_local(
        1.0,
        nonlin,
        d,
        UNIT_BALL,
        rtol=SHOT_RTOL,
        stop_at_crossing=True,
        delta_stop=DELTA_STOP * d,
        stop_at_turn=True,
        cells=cells,
        grading=1.0,
        with_profile=with_profile,
    )


def _flat_search(
    q: float,
    varpi: float,
    b0: float,
    d_range: Optional[Tuple[float, float]],
    samples: int,
    cells: int,
) -> CompactSupportProfile:
    nonlin = Nonlinearity.from_pieces([(-1.0, q), (b0, varpi)])
    # f(d) < 0 por debajo de d₀ = b₀^{-1/(ϖ-q)}
    d_zero = b0 ** (-1.0 / (varpi - q))
    lo, hi = d_range if d_range is not None else (d_zero * (1.0 + 1e-9), 1e3 * d_zero)
    ds = np.geomspace(lo, hi, samples)
    scan = []
    bracket = None
    previous = None
    for d in ds:
        shot = _shoot(nonlin, float(d))
        scan.append({"d": float(d), "classification": shot.classification})
        crossing = _crosses(shot.classification)
        if previous is not None and crossing and not previous[1]:
            bracket = (previous[0], float(d))
            break
        previous = (float(d), crossing)

    if bracket is None:
        regimes = sorted({row["classification"] for row in scan})
        raise NumericalError(
            "shoot_compact_support: sin cambio de régimen en el rango de d (b0 demasiado pequeño)",
            {"b0": b0, "regimes": ",".join(regimes), "samples": len(scan)},
        )

    a, b = bracket
    for _ in range(200):
        mid = 0.5 * (a + b)
        if mid <= a or mid >= b:
            break
        if _crosses(_shoot(nonlin, mid).classification):
            b = mid
        else:
            a = mid

    shot = _shoot(nonlin, b, with_profile=True, cells=cells)
    assert shot.profile is not None
    rho0 = shot.end_radius
    if rho0 >= 1.0:
        raise NumericalError("shoot_compact_support: el soporte no cabe en la bola unidad", {"rho0": rho0})
    flat_residual = abs(shot.end_value) + rho0 * abs(shot.end_slope)
    support = shot.profile.positive_part()
    logger.info(
        f"Aterrizaje plano: b0={b0:.4g}, d={b:.10g}, rho0={rho0:.6g}, residuo={flat_residual:.3e}"
    )
    return CompactSupportProfile(
        q=q,
        varpi=varpi,
        b0=b0,
        d=b,
        rho0=rho0,
        profile=_zero_extend(support, UNIT_BALL.R),
        support=support,
        flat_residual=flat_residual,
        scan=scan,
    )


def shoot_compact_support(
    q: float = 1.2,
    varpi: float = 1.4,
    b0: Optional[float] = None,
    d_range: Optional[Tuple[float, float]] = None,
    samples: int = 64,
    cells: int = SUPPORT_CELLS,
    max_doublings: int = 30,
) -> CompactSupportProfile:
    """
    Busca por bisección en d el disparo que aterriza con u = u' = 0 antes de ρ = 1

    Entre el régimen que cruza el cero y el que gira con u > 0 está la
    trayectoria plana. Sin b0 se duplica desde 1 hasta que aparece el cambio
    de régimen; el residuo plano |u(ρ₀)| + ρ₀|u'(ρ₀)| se compara con d.

    Args:
        q (float): Exponente de absorción, 1 < q < ϖ
        varpi (float): Exponente de la fuente, ϖ < 2
        b0 (float): Peso de la fuente (búsqueda automática si es None)
        d_range (Tuple[float, float]): Rango de alturas centrales

    Returns:
        CompactSupportProfile: Perfil plano y su traza de barrido
    """
    if not 1.0 < q < varpi < 2.0:
        raise ConfigError(f"hopf: se requiere 1 < q < varpi < 2 (q={q}, varpi={varpi})")
    if b0 is not None:
        if not b0 > 0:
            raise ConfigError(f"hopf.b0: se requiere b0 > 0 (recibido {b0})")
        result = _flat_search(q, varpi, float(b0), d_range, samples, cells)
    else:
        b = 1.0
        for _ in range(max_doublings):
            try:
                result = _flat_search(q, varpi, b, d_range, samples, cells)
                break
            except NumericalError as e:
                logger.debug(f"b0={b:.4g} sin aterrizaje plano: {e}")
                b *= 2.0
        else:
            raise NumericalError("shoot_compact_support: la búsqueda de b0 no encontró régimen plano", {"b0": b})
    if result.flat_residual >= 1e-6 * result.d:
        raise NumericalError(
            "shoot_compact_support: aterrizaje no plano",
            {"flat_residual": result.flat_residual, "d": result.d},
        )
    return result


def scale_family(phi: CompactSupportProfile, lam_scale: float, mu: float) -> RadialProfile:
    """Φ_{λ,μ}(ρ) = μΦ(λρ) sobre la malla de soporte reescalada"""
    if not lam_scale > 0 or not mu > 0:
        raise ConfigError("scale_family: se requieren lambda > 0 y mu > 0")
    if phi.rho0 / lam_scale > phi.domain.R:
        raise ConfigError(
            f"scale_family: el soporte {phi.rho0 / lam_scale:.4g} excede el dominio"
        )
    base = phi.support
    assert base.derivatives is not None and base.quad_derivatives is not None
    return RadialProfile(
        grid=base.grid.scaled(1.0 / lam_scale),
        values=mu * base.values,
        derivatives=mu * lam_scale * base.derivatives,
        quad_values=mu * base.quad_values,
        quad_derivatives=mu * lam_scale * base.quad_derivatives,
        dirichlet=True,
        representation=base.representation,
    )


def scaling_defects(
    phi: CompactSupportProfile, scaled: RadialProfile, lam_scale: float, mu: float
) -> Dict[str, float]:
    """Defectos relativos de sup, sup|∇| y ‖·‖²_W frente a los factores exactos"""
    N = phi.domain.N
    base = phi.support
    expected = {
        "sup": mu * sup_norm(base),
        "grad_sup": mu * lam_scale * gradient_sup_norm(base),
        "W2": mu**2 * lam_scale ** (2 - N) * sobolev_norm_p(base, phi.domain),
    }
    actual = {
        "sup": sup_norm(scaled),
        "grad_sup": gradient_sup_norm(scaled),
        "W2": sobolev_norm_p(scaled, phi.domain),
    }
    return {k: abs(actual[k] - v) / v for k, v in expected.items()}


@dataclass(frozen=True)
class FamilyParams:
    """Exponente α y constante E de la familia μ(λ) = λ^{-α}/E"""

    N: int
    r: float
    varpi: float
    q: float
    b0: float
    alpha: float
    E: float
    phi_W_norm: float

    @property
    def two_star(self) -> float:
        return 2.0 * self.N / (self.N - 2.0)

    @property
    def critical(self) -> bool:
        return math.isclose(self.r, self.two_star, rel_tol=1e-12)

    def mu(self, lam_scale: float) -> float:
        return lam_scale ** (-self.alpha) / self.E

    def a(self, lam_scale: float) -> float:
        return self.mu(lam_scale) ** (self.varpi - self.q) / self.b0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "N": self.N,
            "r": self.r,
            "varpi": self.varpi,
            "q": self.q,
            "b0": self.b0,
            "alpha": self.alpha,
            "E": self.E,
            "phi_W_norm": self.phi_W_norm,
        }


def family_parameters(
    N: int, r: float, varpi: float, q: float, b0: float, phi_W_norm: float
) -> FamilyParams:
    """α = (N/2*)(2*-r)/(r-ϖ), E = (‖Φ‖_W^{r-2}b₀)^{1/(r-ϖ)}"""
    if N < 3:
        raise ConfigError(f"family: se requiere N >= 3 (recibido {N})")
    two_star = 2.0 * N / (N - 2.0)
    lower = 2.0 * (1.0 + varpi / N)
    if not lower < r <= two_star * (1 + 1e-12):
        raise ConfigError(
            f"family.r: se requiere {lower:.6g} < r <= {two_star:.6g} (recibido {r})"
        )
    alpha = (N / two_star) * (two_star - r) / (r - varpi)
    if math.isclose(r, two_star, rel_tol=1e-12):
        alpha = 0.0
    E = (phi_W_norm ** (r - 2.0) * b0) ** (1.0 / (r - varpi))
    return FamilyParams(N, r, varpi, q, b0, alpha, E, phi_W_norm)


@dataclass
class FamilyReport:
    """Normas de la familia sobre la escalera de λ con pendientes ajustadas"""

    params: FamilyParams
    rows_data: List[Dict[str, float]]
    sup_slope: float
    c1_slope: float
    lambda_zero: Optional[float]
    a_constant: Optional[bool]

    @property
    def sup_bounded(self) -> bool:
        return self.sup_slope <= 1e-9

    @property
    def c1_unbounded(self) -> bool:
        return abs(self.c1_slope - (1.0 - self.params.alpha)) <= 0.05 and self.c1_slope > 0

    @property
    def max_residual(self) -> float:
        return max(row["residual"] for row in self.rows_data)

    @property
    def max_identity_defect(self) -> float:
        return max(row["identity_defect"] for row in self.rows_data)

    def rows(self) -> List[Dict[str, Any]]:
        return [dict(row, provenance="computed") for row in self.rows_data]

    def summary(self) -> Dict[str, Any]:
        out: Dict[str, Any] = dict(self.params.to_dict())
        out.update(
            {
                "sup_slope": self.sup_slope,
                "sup_slope_expected": -self.params.alpha,
                "c1_slope": self.c1_slope,
                "c1_slope_expected": 1.0 - self.params.alpha,
                "sup_bounded": self.sup_bounded,
                "c1_unbounded": self.c1_unbounded,
                "max_residual": self.max_residual,
                "max_identity_defect": self.max_identity_defect,
                "lambda_zero": self.lambda_zero,
                "a_constant": self.a_constant,
            }
        )
        return out


def default_family_ladder() -> List[float]:
    return geometric_ladder(10.0, 10.0, 6)


def verify_family(
    params: FamilyParams,
    phi: CompactSupportProfile,
    lam_ladder: Optional[Sequence[float]] = None,
    threads: int = 1,
) -> FamilyReport:
    """
    Comprueba sobre la escalera: sup acotado, C¹ no acotado, residuo no local
    de (P_a) con M(s²) = s^{r-2} y la identidad M(‖Φ_{λ,μ}‖²) = (μ^{2-ϖ}λ²b₀)⁻¹
    """
    ladder = list(lam_ladder) if lam_ladder is not None else default_family_ladder()
    if any(lam < 1.0 for lam in ladder):
        raise ConfigError("verify_family: la escalera requiere lambda >= 1")
    term = PurePower(params.r, 2.0)
    host = phi.domain.with_radius(HOST_RADIUS)

    def evaluate(lam: float) -> Dict[str, float]:
        mu = params.mu(lam)
        u = scale_family(phi, lam, mu)
        a = params.a(lam)
        nonlin = Nonlinearity.from_pieces([(-a, params.q), (1.0, params.varpi)])
        W2 = sobolev_norm_p(u, host)
        target = 1.0 / (mu ** (2.0 - params.varpi) * lam**2 * params.b0)
        defects = scaling_defects(phi, u, lam, mu)
        return {
            "lambda": lam,
            "mu": mu,
            "sup": sup_norm(u),
            "C1": c1_norm(u),
            "W_norm": math.sqrt(W2),
            "a": a,
            "residual": weak_residual(u, term, nonlin, host).relative,
            "identity_defect": abs(float(term.M(W2)) - target) / target,
            "scaling_defect": max(defects.values()),
        }

    rows = parallel_map(evaluate, ladder, threads)
    lams = [row["lambda"] for row in rows]
    sup_slope = log_slope_fit(lams, [row["sup"] for row in rows])[0] if len(rows) > 1 else math.nan
    c1_slope = log_slope_fit(lams, [row["C1"] for row in rows])[0] if len(rows) > 1 else math.nan

    lambda_zero = None
    for k, row in enumerate(rows):
        if all(later["a"] < 1.0 for later in rows[k:]):
            lambda_zero = row["lambda"]
            break
    a_constant = None
    if params.critical:
        a0 = rows[0]["a"]
        a_constant = all(abs(row["a"] - a0) <= 1e-12 * a0 for row in rows)

    report = FamilyReport(params, rows, sup_slope, c1_slope, lambda_zero, a_constant)
    worst = report.max_residual
    if worst >= 1e-6:
        logger.error(f"Error durante la verificación de la familia: residuo {worst:.3e}")
        raise NumericalError(
            "verify_family: residuo no local por encima de 1e-6 (redispare con tolerancia más fina)",
            {"residual": worst},
        )
    logger.info(
        f"Familia: pendiente sup {sup_slope:.4f} (esperada {-params.alpha:.4f}), "
        f"pendiente C1 {c1_slope:.4f} (esperada {1 - params.alpha:.4f})"
    )
    return report


@dataclass
class SineReport:
    i: int
    W2: float
    residual: float
    sup: float
    C1: float

    @property
    def W2_defect(self) -> float:
        return abs(self.W2 - self.i**2)

    def summary(self) -> Dict[str, Any]:
        return {
            "i": self.i,
            "W2": self.W2,
            "W2_expected": float(self.i**2),
            "W2_defect": self.W2_defect,
            "residual": self.residual,
            "sup": self.sup,
            "sup_expected": math.sqrt(2.0 / math.pi),
            "C1": self.C1,
            "provenance": "computed",
        }


def sine_example(i: int, cells: int = 1680) -> SineReport:
    """
    φ_i = √(2/π)·sin(iρ) en (0, π) resuelve -u''/‖u‖²_W = u

    Con M(s²) = s⁻² todas son soluciones: ‖φ_i‖²_W = i², sup constante y
    norma C¹ de orden i.
    """
    if int(i) != i or i < 1:
        raise ConfigError(f"sine_example.i: se requiere un entero >= 1 (recibido {i})")
    domain = DomainSpec("interval", 1, math.pi, 2.0)
    grid = build_grid(domain, cells)
    c = math.sqrt(2.0 / math.pi)
    u = RadialProfile.from_function(
        grid,
        lambda r: c * np.sin(i * r),
        lambda r: c * i * np.cos(i * r),
        dirichlet=True,
    )
    term = PurePower(0.0, 2.0)
    residual = weak_residual(u, term, Nonlinearity.linear(), domain)
    return SineReport(
        i=int(i),
        W2=sobolev_norm_p(u, domain),
        residual=residual.dual_norm,
        sup=sup_norm(u),
        C1=c1_norm(u),
    )
