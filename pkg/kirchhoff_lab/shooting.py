"""
Disparo radial
Problema local (ρ^{N-1}|u'|^{p-2}u')' + ρ^{N-1}γf(u) = 0, u(0) = d, u'(0) = 0,
ramas de Dirichlet y raíces de consistencia γ·M(‖u‖_W^p) = 1
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import ConfigError, NumericalError
from .functionals import (
    KirchhoffTerm,
    Nonlinearity,
    evaluate_J,
    evaluate_J_plus,
    weak_residual,
)
from .radial_core import (
    DomainSpec,
    RadialProfile,
    build_grid,
    lebesgue_norm,
    parallel_map,
    sobolev_norm,
    sobolev_norm_p,
    sup_norm,
)

logger = logging.getLogger(__name__)

CROSSING = "crossing"
FLAT_LANDING = "flat-landing"
POSITIVE = "positive-at-boundary"

START_FRACTION = 1e-6
PROFILE_CELLS = 400
PROFILE_GRADING = 1.5
# brentq rechaza rtol < 4 eps
BRENT_RTOL = 4.0 * float(np.finfo(float).eps)
RESIDUAL_TOL = 1e-8
GAMMA_REFINE_DEPTH = 6


def _scalar_nonlinearity(nonlin: Nonlinearity) -> Tuple[Callable[[float], float], Callable[[float], float]]:
    """f y F escalares sin pasar por numpy (lado derecho del integrador)"""
    pieces = [(c, e) for c, e in nonlin.pieces]
    positive = nonlin.positive_part

    def f(v: float) -> float:
        if positive and v <= 0.0:
            return 0.0
        a = abs(v)
        s = 0.0
        for c, e in pieces:
            s += c * a ** (e - 1.0)
        return s if v >= 0.0 else -s

    def F(v: float) -> float:
        if positive and v <= 0.0:
            return 0.0
        a = abs(v)
        s = 0.0
        for c, e in pieces:
            s += (c / e) * a**e
        return s

    return f, F


def _slope(w: Any, rho: Any, N: int, p: float) -> Any:
    """u' = sign(w)(|w|/ρ^{N-1})^{1/(p-1)}"""
    return np.sign(w) * (np.abs(w) / rho ** (N - 1)) ** (1.0 / (p - 1.0))


@dataclass(frozen=True, eq=False)
class ShootingResult:
    """
    Resultado de un disparo desde el centro

    El perfil vive en el dominio radial (para intervalos, la mitad simétrica)
    y cubre [0, ρ_fin], con ρ_fin = R salvo parada por evento.
    """

    d: float
    gamma: float
    profile: Optional[RadialProfile]
    first_zero: Optional[float]
    classification: str
    end_radius: float
    end_value: float
    end_slope: float
    turning_point: Optional[float]
    energy_defect: float
    domain: DomainSpec

    @property
    def mismatch(self) -> float:
        """Función de disparo: u(R)/d si se llegó a R, (ρ_c - R)/R si se paró antes"""
        R = self.domain.R
        if self.end_radius >= R * (1.0 - 1e-14):
            return self.end_value / self.d
        if self.first_zero is not None:
            return (self.first_zero - R) / R
        return self.end_value / self.d

    @property
    def positive(self) -> bool:
        """Sin ceros interiores en [0, R)"""
        return self.first_zero is None or self.first_zero >= self.domain.R * (1.0 - 1e-9)

    def summary(self) -> Dict[str, Any]:
        return {
            "d": self.d,
            "gamma": self.gamma,
            "classification": self.classification,
            "first_zero": self.first_zero,
            "end_radius": self.end_radius,
            "end_value": self.end_value,
            "end_slope": self.end_slope,
            "turning_point": self.turning_point,
            "energy_defect": self.energy_defect,
        }


def shoot_local(
    gamma: float,
    nonlin: Nonlinearity,
    d: float,
    domain: DomainSpec,
    rtol: float = 1e-12,
    stop_at_crossing: bool = True,
    delta_stop: float = 0.0,
    stop_at_turn: bool = False,
    flat_tol: float = 1e-6,
    cells: int = PROFILE_CELLS,
    grading: float = PROFILE_GRADING,
    with_profile: bool = True,
) -> ShootingResult:
    """
    Integra el problema local en la variable de flujo w = ρ^{N-1}|u'|^{p-2}u'

    Args:
        gamma (float): Multiplicador γ >= 0
        nonlin (Nonlinearity): No linealidad f
        d (float): Altura central u(0) > 0
        domain (DomainSpec): Dominio (los intervalos se tratan por simetría)
        stop_at_crossing (bool): Parar en u = delta_stop
        stop_at_turn (bool): Parar cuando u' vuelve a anularse con u > 0
        with_profile (bool): Construir el perfil (innecesario en los barridos)

    Returns:
        ShootingResult: Perfil, clasificación y diagnóstico de energía
    """
    if not gamma >= 0:
        raise ConfigError(f"shoot_local.gamma: se requiere gamma >= 0 (recibido {gamma})")
    if not d > 0:
        raise ConfigError(f"shoot_local.d: se requiere d > 0 (recibido {d})")
    rd = domain.radial_half()
    N, p, R = rd.N, rd.p, rd.R
    f, F = _scalar_nonlinearity(nonlin)
    f0 = f(d)

    if gamma == 0.0 or f0 == 0.0:
        grid = build_grid(rd, cells, grading)
        flat = RadialProfile.from_function(
            grid, lambda r: np.full_like(r, d), np.zeros_like, dirichlet=False
        )
        return ShootingResult(d, gamma, flat, None, POSITIVE, R, d, 0.0, None, 0.0, rd)

    rho0 = START_FRACTION * R
    kappa = (gamma * abs(f0) / N) ** (1.0 / (p - 1.0))
    sgn = math.copysign(1.0, f0)
    u0 = d - sgn * (p - 1.0) / p * kappa * rho0 ** (p / (p - 1.0))
    w0 = -gamma * f0 * rho0**N / N

    def series(rho: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        u = d - sgn * (p - 1.0) / p * kappa * rho ** (p / (p - 1.0))
        du = -sgn * kappa * rho ** (1.0 / (p - 1.0))
        return u, du

    def rhs(rho: float, y: np.ndarray) -> List[float]:
        du = float(_slope(y[1], rho, N, p))
        return [du, -(rho ** (N - 1)) * gamma * f(y[0]), (N - 1) / rho * abs(du) ** p]

    def crossing(rho: float, y: np.ndarray) -> float:
        return y[0] - delta_stop

    crossing.terminal = stop_at_crossing  # type: ignore[attr-defined]
    crossing.direction = -1  # type: ignore[attr-defined]

    def turning(rho: float, y: np.ndarray) -> float:
        return y[1]

    turning.terminal = stop_at_turn  # type: ignore[attr-defined]
    turning.direction = 1  # type: ignore[attr-defined]

    scale_w = max(abs(w0), 1e-300) / rho0**N * R**N
    sol = solve_ivp(
        rhs,
        (rho0, R),
        [u0, w0, 0.0],
        method="DOP853",
        rtol=rtol,
        atol=[rtol * d * 1e-2, rtol * scale_w * 1e-2, 1e-300],
        events=[crossing, turning],
        dense_output=True,
    )
    if sol.status == -1:
        logger.error(f"Error durante el disparo: {sol.message}")
        raise NumericalError(
            "shoot_local: paso de integración demasiado pequeño",
            {"rho": float(sol.t[-1]), "gamma": gamma, "d": d},
        )

    end = float(sol.t[-1])
    u_end, w_end, loss_end = (float(v) for v in sol.y[:, -1])
    slope_end = float(_slope(w_end, end, N, p))

    cross_events = sol.t_events[0]
    turn_events = sol.t_events[1]
    first_zero = float(cross_events[0]) if cross_events.size else None
    turning_point = float(turn_events[0]) if turn_events.size else None

    if first_zero is not None and stop_at_crossing:
        flat = abs(slope_end) * R <= flat_tol * d
        classification = FLAT_LANDING if flat else CROSSING
    elif first_zero is not None:
        classification = CROSSING
    elif stop_at_turn and turning_point is not None:
        flat = u_end - delta_stop <= flat_tol * d
        classification = FLAT_LANDING if flat else POSITIVE
    else:
        classification = POSITIVE

    kinetic = (p - 1.0) / p
    energy_start = kinetic * abs(float(_slope(w0, rho0, N, p))) ** p + gamma * F(u0)
    energy_end = kinetic * abs(slope_end) ** p + gamma * F(u_end)
    scale = max(abs(energy_start), abs(energy_end), loss_end, 1e-300)
    energy_defect = abs(energy_end + loss_end - energy_start) / scale

    def values(rho: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        rho = np.clip(np.asarray(rho, dtype=float), 0.0, end)
        u = np.empty_like(rho)
        du = np.empty_like(rho)
        inner = rho < rho0
        if np.any(inner):
            u[inner], du[inner] = series(rho[inner])
        outer = ~inner
        if np.any(outer):
            y = sol.sol(rho[outer])
            u[outer] = y[0]
            du[outer] = _slope(y[1], rho[outer], N, p)
        return u, du

    profile: Optional[RadialProfile] = None
    if with_profile:
        profile = RadialProfile.from_function(
            build_grid(rd, cells, grading, radius=end),
            lambda r: values(r)[0],
            lambda r: values(r)[1],
            dirichlet=abs(u_end) <= 1e-8 * d,
        )
    logger.debug(
        f"Disparo gamma={gamma:.6g}, d={d:.6g}: {classification} (rho_fin={end:.6g})"
    )
    return ShootingResult(
        d=float(d),
        gamma=float(gamma),
        profile=profile,
        first_zero=first_zero,
        classification=classification,
        end_radius=end,
        end_value=u_end,
        end_slope=slope_end,
        turning_point=turning_point,
        energy_defect=energy_defect,
        domain=rd,
    )


def _is_eigen_type(nonlin: Nonlinearity, p: float) -> bool:
    degree = nonlin.homogeneous_degree()
    return degree is not None and math.isclose(degree, p)


def _sign_brackets(xs: Sequence[float], values: Sequence[float]) -> List[Tuple[float, float]]:
    out = []
    for a, b, fa, fb in zip(xs[:-1], xs[1:], values[:-1], values[1:]):
        if math.isfinite(fa) and math.isfinite(fb) and fa * fb < 0:
            out.append((float(a), float(b)))
    return out


def solve_dirichlet_branch(
    gamma: float,
    nonlin: Nonlinearity,
    domain: DomainSpec,
    d_range: Tuple[float, float],
    samples: int = 32,
    tol: float = 1e-12,
    threads: int = 1,
    strict: bool = False,
    rtol: float = 1e-12,
) -> List[float]:
    """
    Alturas d con u(R) = 0 y u > 0 en [0, R)

    Barrido logarítmico de d, cambio de signo de u(R)/d y refinamiento con
    brentq. Sin cambio de signo devuelve una lista vacía (o NumericalError si
    strict). Para f homogénea de grado p-1 la condición no depende de d: o
    bien todo d es raíz (se devuelven las muestras) o ninguno.
    """
    d_lo, d_hi = float(d_range[0]), float(d_range[1])
    if not 0 < d_lo < d_hi:
        raise ConfigError("d_range: se requiere 0 < d_min < d_max")
    rd = domain.radial_half()

    def mismatch(d: float) -> float:
        shot = shoot_local(gamma, nonlin, d, domain, rtol=rtol, with_profile=False)
        return shot.mismatch

    ds = np.geomspace(d_lo, d_hi, samples)
    if _is_eigen_type(nonlin, rd.p):
        value = mismatch(d_lo)
        if abs(value) <= 1e-8:
            logger.info(f"Rama homogénea: toda altura es raíz para gamma={gamma:.6g}")
            return [float(d) for d in ds]
        return []

    values = parallel_map(mismatch, [float(d) for d in ds], threads)
    brackets = _sign_brackets(list(ds), values)
    roots: List[float] = []
    for a, b in brackets:
        root = float(brentq(mismatch, a, b, xtol=tol * a, rtol=BRENT_RTOL))
        shot = shoot_local(
            gamma, nonlin, root, domain, rtol=rtol, stop_at_crossing=False, with_profile=False
        )
        if not shot.positive:
            continue
        if abs(shot.end_value) > 1e-6 * root:
            logger.warning(f"Raíz imprecisa d={root:.6g}: u(R) = {shot.end_value:.3e}")
        if all(abs(root - r) > 1e-8 * root for r in roots):
            roots.append(root)
    if not roots:
        if strict:
            raise NumericalError(
                "solve_dirichlet_branch: no se encontró ningún corchete",
                {"gamma": gamma, "d_min": d_lo, "d_max": d_hi},
            )
        logger.debug(f"Sin raíces de Dirichlet para gamma={gamma:.6g}")
    return roots


def dirichlet_eigenvalue(
    nonlin: Nonlinearity,
    domain: DomainSpec,
    gamma_range: Tuple[float, float] = (1e-3, 1e4),
    samples: int = 64,
    rtol: float = 1e-12,
) -> float:
    """Primer γ con solución positiva de Dirichlet para f homogénea de grado p-1"""
    rd = domain.radial_half()
    if not _is_eigen_type(nonlin, rd.p):
        raise ConfigError("dirichlet_eigenvalue: f debe ser homogénea de grado p-1")

    def mismatch(g: float) -> float:
        shot = shoot_local(
            g, nonlin, 1.0, domain, rtol=rtol, stop_at_crossing=False, with_profile=False
        )
        return shot.end_value

    gs = np.geomspace(gamma_range[0], gamma_range[1], samples)
    values = [mismatch(float(g)) for g in gs]
    brackets = _sign_brackets(list(gs), values)
    if not brackets:
        raise NumericalError(
            "dirichlet_eigenvalue: sin cambio de signo en el rango de gamma",
            {"gamma_min": gamma_range[0], "gamma_max": gamma_range[1]},
        )
    a, b = brackets[0]
    return float(brentq(mismatch, a, b, xtol=1e-15 * a, rtol=BRENT_RTOL))


# Informes de solución
@dataclass
class SolveReport:
    """Solución del problema no local con sus normas, niveles y residuos"""

    profile: RadialProfile
    gamma: float
    d: float
    norms: Dict[str, float]
    J: float
    J_plus: float
    residual: float
    relative_residual: float
    consistency_defect: float
    kind: str
    log: List[Dict[str, Any]] = field(default_factory=list)
    degenerate: bool = False
    notes: Dict[str, Any] = field(default_factory=dict)

    def summary(self) -> Dict[str, Any]:
        out = {
            "kind": self.kind,
            "gamma": self.gamma,
            "d": self.d,
            "J": self.J,
            "J_plus": self.J_plus,
            "residual": self.residual,
            "relative_residual": self.relative_residual,
            "consistency_defect": self.consistency_defect,
            "degenerate": self.degenerate,
            "iterations": len(self.log),
        }
        out.update({f"norm_{k}": v for k, v in self.norms.items()})
        out.update(self.notes)
        return out


def make_report(
    profile: RadialProfile,
    term: KirchhoffTerm,
    nonlin: Nonlinearity,
    domain: DomainSpec,
    kind: str,
    gamma: Optional[float] = None,
    log: Optional[List[Dict[str, Any]]] = None,
    notes: Optional[Dict[str, Any]] = None,
) -> SolveReport:
    """Evalúa normas, J, J⁺, residuo débil y defecto de consistencia de un perfil"""
    rd = domain.radial_half()
    W = sobolev_norm_p(profile, rd)
    degenerate = W == 0.0
    q = nonlin.q if nonlin.q is not None else min(nonlin.exponents)
    varpi = nonlin.varpi if nonlin.varpi is not None else max(nonlin.exponents)
    norms = {
        "W": sobolev_norm(profile, rd),
        "Lq": lebesgue_norm(profile, q, rd),
        "Lvarpi": lebesgue_norm(profile, varpi, rd),
        "sup": sup_norm(profile),
    }
    residual = weak_residual(profile, term, nonlin, rd)
    if degenerate:
        gamma_value = math.nan if gamma is None else float(gamma)
        defect = 0.0
    else:
        M = float(term.M(W))
        gamma_value = 1.0 / M if gamma is None else float(gamma)
        defect = abs(gamma_value * M - 1.0)
    plain = nonlin.with_positive_part(False)
    return SolveReport(
        profile=profile,
        gamma=gamma_value,
        d=float(profile.values[0]),
        norms=norms,
        J=evaluate_J(profile, term, plain, rd),
        J_plus=evaluate_J_plus(profile, term, plain, rd),
        residual=residual.dual_norm,
        relative_residual=residual.relative,
        consistency_defect=defect,
        kind=kind,
        log=list(log or []),
        degenerate=degenerate,
        notes=dict(notes or {}),
    )


# Consistencia γ·M(‖u‖^p) = 1
@dataclass(frozen=True)
class NonlocalSearch:
    """Caja de búsqueda (γ, d) y tolerancias del solver de consistencia"""

    gamma_min: float = 1e-2
    gamma_max: float = 1e4
    gamma_count: int = 20
    d_min: float = 1e-3
    d_max: float = 1e3
    d_samples: int = 16
    rtol: float = 1e-12
    scan_rtol: float = 1e-10
    newton_tol: float = 1e-12
    max_newton: int = 30
    refine_depth: int = GAMMA_REFINE_DEPTH

    def __post_init__(self) -> None:
        if not 0 < self.gamma_min < self.gamma_max:
            raise ConfigError("search.gamma: se requiere 0 < gamma_min < gamma_max")
        if not 0 < self.d_min < self.d_max:
            raise ConfigError("search.d: se requiere 0 < d_min < d_max")
        if self.gamma_count < 2 or self.d_samples < 2:
            raise ConfigError("search: se requieren al menos dos muestras")
        if not (self.rtol > 0 and self.scan_rtol > 0):
            raise ConfigError("search: las tolerancias deben ser positivas")
        if self.refine_depth < 0:
            raise ConfigError("search.refine_depth: se requiere un entero >= 0")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "NonlocalSearch":
        known = {k: data[k] for k in cls.__dataclass_fields__ if k in data}
        return cls(**known)

    def gamma_grid(self) -> np.ndarray:
        return np.geomspace(self.gamma_min, self.gamma_max, self.gamma_count)

    @property
    def d_range(self) -> Tuple[float, float]:
        return self.d_min, self.d_max

    @property
    def scan_tolerance(self) -> float:
        """Tolerancia del barrido (nunca más estricta que la del pulido)"""
        return max(self.scan_rtol, self.rtol)


@dataclass(frozen=True)
class ConsistencyPoint:
    gamma: float
    branch: int
    d: float
    W: float
    product: float

    @property
    def defect(self) -> float:
        return self.product - 1.0


@dataclass
class ConsistencyScan:
    """Defecto γ·M(‖u_γ‖^p) - 1 a lo largo de las ramas de Dirichlet"""

    points: List[ConsistencyPoint]
    gamma_grid: List[float]
    d_range: Tuple[float, float]

    @property
    def min_product(self) -> Optional[float]:
        return min((pt.product for pt in self.points), default=None)

    def branch(self, index: int) -> List[ConsistencyPoint]:
        return [pt for pt in self.points if pt.branch == index]

    def rows(self) -> List[Dict[str, Any]]:
        return [
            {
                "gamma": pt.gamma,
                "branch": pt.branch,
                "d": pt.d,
                "W": pt.W,
                "product": pt.product,
                "defect": pt.defect,
                "provenance": "computed",
            }
            for pt in self.points
        ]


def _branch_W(gamma: float, nonlin: Nonlinearity, d: float, domain: DomainSpec, rtol: float) -> float:
    shot = shoot_local(gamma, nonlin, d, domain, rtol=rtol, stop_at_crossing=False)
    return sobolev_norm_p(shot.profile, shot.domain)


def _scan_gamma(
    gamma: float,
    term: KirchhoffTerm,
    nonlin: Nonlinearity,
    domain: DomainSpec,
    d_range: Tuple[float, float],
    d_samples: int,
    rtol: float,
) -> List[ConsistencyPoint]:
    roots = solve_dirichlet_branch(gamma, nonlin, domain, d_range, samples=d_samples, rtol=rtol)
    out = []
    for j, d in enumerate(sorted(roots)):
        W = _branch_W(gamma, nonlin, d, domain, rtol)
        out.append(ConsistencyPoint(gamma, j, d, W, gamma * float(term.M(W))))
    return out


def consistency_scan(
    term: KirchhoffTerm,
    nonlin: Nonlinearity,
    domain: DomainSpec,
    gamma_grid: Sequence[float],
    d_range: Tuple[float, float] = (1e-3, 1e3),
    d_samples: int = 16,
    threads: int = 1,
    rtol: float = 1e-12,
) -> ConsistencyScan:
    """
    Mapa empírico del defecto de consistencia

    Para cada γ de la malla se buscan las raíces de Dirichlet en d y se evalúa
    γ·M(‖u_{γ,d}‖_W^p). Las ramas se numeran por orden creciente de d.
    """
    grid = sorted(float(g) for g in gamma_grid)
    if not grid or grid[0] <= 0:
        raise ConfigError("gamma_grid: se requieren valores positivos")

    def scan(gamma: float) -> List[ConsistencyPoint]:
        return _scan_gamma(gamma, term, nonlin, domain, d_range, d_samples, rtol)

    logger.info(f"Barrido de consistencia sobre {len(grid)} valores de gamma")
    per_gamma = parallel_map(scan, grid, threads)
    points = [pt for group in per_gamma for pt in group]
    return ConsistencyScan(points=points, gamma_grid=grid, d_range=tuple(d_range))


def pair_branches(
    ga: float,
    gb: float,
    left: List[ConsistencyPoint],
    right: List[ConsistencyPoint],
    scan_at: Callable[[float], List[ConsistencyPoint]],
    depth: int,
) -> List[Tuple[ConsistencyPoint, ConsistencyPoint]]:
    """
    Empareja las ramas de dos valores adyacentes de γ

    Con el mismo número de ramas se emparejan por orden de d. Si difiere, el
    intervalo se biseca geométricamente hasta depth veces; en el hueco que
    quede cada rama del lado con menos ramas se une a la más próxima en log d
    del otro lado, y el resto se registra como hueco.
    """
    if len(left) == len(right):
        return list(zip(left, right))
    if depth > 0:
        gm = math.sqrt(ga * gb)
        middle = scan_at(gm)
        return pair_branches(ga, gm, left, middle, scan_at, depth - 1) + pair_branches(
            gm, gb, middle, right, scan_at, depth - 1
        )
    logger.warning(
        f"Hueco entre gamma={ga:.6g} y gamma={gb:.6g}: {len(left)} frente a {len(right)} ramas"
    )
    if not left or not right:
        return []
    few, many = (left, right) if len(left) < len(right) else (right, left)
    pairs = []
    for pt in few:
        near = min(many, key=lambda other: abs(math.log(other.d / pt.d)))
        pairs.append((pt, near) if few is left else (near, pt))
    return pairs


@dataclass
class NonlocalResult:
    """Raíces de consistencia con la traza del barrido"""

    reports: List[SolveReport]
    scan: Optional[ConsistencyScan]
    method: str
    rejected: List[SolveReport] = field(default_factory=list)

    def __iter__(self):  # type: ignore[no-untyped-def]
        return iter(self.reports)

    def __len__(self) -> int:
        return len(self.reports)

    def __getitem__(self, index: int) -> SolveReport:
        return self.reports[index]


def _check_positive_term(term: KirchhoffTerm) -> None:
    ts = np.logspace(-8, 8, 161)
    try:
        values = np.asarray(term.M(ts), dtype=float)
    except ConfigError:
        return
    if np.any(~(values > 0)):
        raise ConfigError("solve_nonlocal: M debe ser positiva para t > 0")


def _consistency_system(
    term: KirchhoffTerm, nonlin: Nonlinearity, domain: DomainSpec, rtol: float
) -> Callable[[np.ndarray], np.ndarray]:
    def G(x: np.ndarray) -> np.ndarray:
        gamma, d = math.exp(x[0]), math.exp(x[1])
        shot = shoot_local(gamma, nonlin, d, domain, rtol=rtol, stop_at_crossing=False)
        W = sobolev_norm_p(shot.profile, shot.domain)
        return np.array([shot.end_value / d, gamma * float(term.M(W)) - 1.0])

    return G


def newton_polish(
    G: Callable[[np.ndarray], np.ndarray],
    x0: Sequence[float],
    tol: float = 1e-12,
    max_iter: int = 30,
    fd_step: float = 1e-7,
) -> Tuple[np.ndarray, List[Dict[str, Any]]]:
    """
    Newton amortiguado con jacobiano por diferencias finitas

    Returns:
        Tuple[np.ndarray, List]: Punto convergido y registro de iteraciones
    """
    x = np.asarray(x0, dtype=float).copy()
    gx = G(x)
    log: List[Dict[str, Any]] = []
    for it in range(max_iter):
        norm = float(np.max(np.abs(gx)))
        log.append({"iteration": it, "residual": norm})
        if norm <= tol:
            return x, log
        J = np.empty((gx.size, x.size))
        for k in range(x.size):
            step = np.zeros_like(x)
            step[k] = fd_step
            J[:, k] = (G(x + step) - G(x - step)) / (2.0 * fd_step)
        try:
            dx = np.linalg.solve(J, -gx)
        except np.linalg.LinAlgError as e:
            raise NumericalError("newton_polish: jacobiano singular", {"x": x.tolist()}) from e
        t = 1.0
        while t > 1e-6:
            trial = x + t * dx
            g_trial = G(trial)
            if float(np.max(np.abs(g_trial))) < norm:
                x, gx = trial, g_trial
                break
            t *= 0.5
        else:
            if norm <= 1e3 * tol:
                return x, log
            raise NumericalError(
                "newton_polish: búsqueda lineal sin descenso",
                {"x": x.tolist(), "residual": norm},
            )
    if float(np.max(np.abs(gx))) <= 1e3 * tol:
        return x, log
    raise NumericalError(
        "newton_polish: sin convergencia",
        {"x": x.tolist(), "residual": float(np.max(np.abs(gx)))},
    )


def _shot_report(
    gamma: float,
    d: float,
    term: KirchhoffTerm,
    nonlin: Nonlinearity,
    domain: DomainSpec,
    rtol: float,
    log: List[Dict[str, Any]],
    cells: int = PROFILE_CELLS,
) -> SolveReport:
    shot = shoot_local(gamma, nonlin, d, domain, rtol=rtol, stop_at_crossing=False, cells=cells)
    profile = shot.profile
    if not profile.dirichlet:
        profile = RadialProfile(
            grid=profile.grid,
            values=profile.values,
            derivatives=profile.derivatives,
            quad_values=profile.quad_values,
            quad_derivatives=profile.quad_derivatives,
            dirichlet=True,
            representation=profile.representation,
        )
    return make_report(
        profile,
        term,
        nonlin,
        domain,
        "consistency-root",
        gamma=gamma,
        log=log,
        notes={"energy_defect": shot.energy_defect, "boundary_value": shot.end_value},
    )


def _screen_roots(
    roots: Sequence[Tuple[float, float, List[Dict[str, Any]]]],
    term: KirchhoffTerm,
    nonlin: Nonlinearity,
    domain: DomainSpec,
    rtol: float,
) -> Tuple[List[SolveReport], List[SolveReport]]:
    """
    Informes de las raíces (γ, d) separados en aceptados y rechazados

    Un residuo débil >= RESIDUAL_TOL se reintenta una vez con malla cuatro
    veces más fina e integración más estricta; si persiste, el informe queda
    marcado con converged = False y fuera de la lista aceptada.
    """
    accepted: List[SolveReport] = []
    rejected: List[SolveReport] = []
    for gamma, d, log in roots:
        report = _shot_report(gamma, d, term, nonlin, domain, rtol, log)
        if report.residual >= RESIDUAL_TOL:
            logger.debug(f"Residuo {report.residual:.2e} en gamma={gamma:.6g}: se refina el perfil")
            report = _shot_report(
                gamma, d, term, nonlin, domain, max(0.1 * rtol, 1e-13), log, cells=4 * PROFILE_CELLS
            )
        report.notes["converged"] = report.residual < RESIDUAL_TOL
        if report.notes["converged"]:
            accepted.append(report)
        else:
            logger.warning(
                f"Raíz descartada en gamma={gamma:.6g}, d={d:.6g}: residuo débil {report.residual:.2e}"
            )
            rejected.append(report)
    return accepted, rejected


def _solve_eigen_type(
    term: KirchhoffTerm,
    nonlin: Nonlinearity,
    domain: DomainSpec,
    search: NonlocalSearch,
) -> NonlocalResult:
    """f homogénea de grado p-1: γ es el autovalor y d resuelve γ·M(d^p W_1) = 1"""
    p = domain.radial_half().p
    gamma = dirichlet_eigenvalue(nonlin, domain, (search.gamma_min, search.gamma_max), rtol=search.rtol)
    W1 = _branch_W(gamma, nonlin, 1.0, domain, search.rtol)

    def defect(log_d: float) -> float:
        return gamma * float(term.M(math.exp(p * log_d) * W1)) - 1.0

    log_ds = np.linspace(math.log(search.d_min), math.log(search.d_max), 4 * search.d_samples)
    values = [defect(float(x)) for x in log_ds]
    roots = []
    for a, b in _sign_brackets(list(log_ds), values):
        log_d = float(brentq(defect, a, b, xtol=1e-15, rtol=BRENT_RTOL))
        d = math.exp(log_d)
        roots.append((gamma, d, [{"iteration": 0, "eigenvalue": gamma, "W1": W1, "d": d}]))
    reports, rejected = _screen_roots(roots, term, nonlin, domain, search.rtol)
    logger.info(f"Autovalor gamma_1 = {gamma:.12g}; {len(reports)} raíces de consistencia")
    return NonlocalResult(reports=reports, scan=None, method="eigenvalue", rejected=rejected)


def solve_nonlocal(
    term: KirchhoffTerm,
    nonlin: Nonlinearity,
    domain: DomainSpec,
    search: Optional[NonlocalSearch] = None,
    threads: int = 1,
) -> NonlocalResult:
    """
    Resuelve u(R) = 0 y γ·M(‖u_{γ,d}‖_W^p) = 1 sobre (γ, d)

    Barrido de consistencia en γ, cambio de signo del defecto a lo largo de
    cada rama y pulido de Newton del sistema 2x2. Donde el número de ramas
    cambia entre dos γ vecinos el intervalo se refina por bisección. Solo se
    devuelven raíces con residuo débil < RESIDUAL_TOL; las demás quedan en
    rejected. Una lista vacía es un resultado legítimo: la traza del barrido
    acompaña al resultado.
    """
    search = search or NonlocalSearch()
    _check_positive_term(term)
    if _is_eigen_type(nonlin, domain.radial_half().p):
        return _solve_eigen_type(term, nonlin, domain, search)

    scan_rtol = search.scan_tolerance
    scan = consistency_scan(
        term,
        nonlin,
        domain,
        search.gamma_grid(),
        search.d_range,
        search.d_samples,
        threads,
        scan_rtol,
    )
    G = _consistency_system(term, nonlin, domain, search.rtol)
    grid = list(scan.gamma_grid)
    by_gamma: Dict[float, List[ConsistencyPoint]] = {g: [] for g in grid}
    for pt in scan.points:
        by_gamma[pt.gamma].append(pt)

    refined: List[ConsistencyPoint] = []

    def scan_at(gamma: float) -> List[ConsistencyPoint]:
        points = _scan_gamma(
            gamma, term, nonlin, domain, search.d_range, search.d_samples, scan_rtol
        )
        refined.extend(points)
        grid.append(gamma)
        return points

    pairs: List[Tuple[ConsistencyPoint, ConsistencyPoint]] = []
    for ga, gb in zip(scan.gamma_grid[:-1], scan.gamma_grid[1:]):
        pairs.extend(pair_branches(ga, gb, by_gamma[ga], by_gamma[gb], scan_at, search.refine_depth))
    if len(grid) > len(scan.gamma_grid):
        logger.info(f"Refinamiento en gamma: {len(grid) - len(scan.gamma_grid)} valores añadidos")
        scan.points = sorted(scan.points + refined, key=lambda pt: (pt.gamma, pt.branch))
        scan.gamma_grid = sorted(grid)

    found: List[Tuple[float, float, List[Dict[str, Any]]]] = []
    for a, b in pairs:
        if a.defect * b.defect >= 0:
            continue
        t = a.defect / (a.defect - b.defect)
        x0 = [
            (1 - t) * math.log(a.gamma) + t * math.log(b.gamma),
            (1 - t) * math.log(a.d) + t * math.log(b.d),
        ]
        try:
            x, log = newton_polish(G, x0, tol=search.newton_tol, max_iter=search.max_newton)
        except NumericalError as e:
            logger.warning(f"Candidato descartado cerca de gamma={math.exp(x0[0]):.4g}: {e}")
            continue
        gamma, d = math.exp(x[0]), math.exp(x[1])
        if any(abs(gamma - g) <= 1e-8 * g and abs(d - e) <= 1e-8 * e for g, e, _ in found):
            continue
        found.append((gamma, d, log))

    reports, rejected = _screen_roots(found, term, nonlin, domain, search.rtol)
    logger.info(
        f"solve_nonlocal: {len(reports)} raíces de consistencia ({len(rejected)} rechazadas)"
    )
    return NonlocalResult(reports=reports, scan=scan, method="scan+newton", rejected=rejected)
