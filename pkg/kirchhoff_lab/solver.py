"""
Solvers variacionales
Funcional J⁺ discreto (P1), descenso precondicionado, paso de montaña por
cuerdas con pulido de Newton y escenarios de existencia y multiplicidad
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import solve_banded

from .counterexample import ProbeMember, probe_family
from .errors import ConfigError, NumericalError
from .functionals import (
    KirchhoffTerm,
    MinPower,
    Nonlinearity,
    PurePower,
    RayDecomposition,
    WeakResidual,
    evaluate_J,
    free_nodes,
    principal_vector,
    stiffness_bands,
    weak_residual,
)
from .instanton import psi_profile
from .radial_core import (
    DomainSpec,
    RadialProfile,
    build_grid,
    critical_exponent,
    lebesgue_norm_s,
    sobolev_norm,
    sobolev_norm_p,
)
from .shooting import (
    NonlocalSearch,
    SolveReport,
    _consistency_system,
    make_report,
    newton_polish,
)

logger = logging.getLogger(__name__)

DEFAULT_CELLS = 600
DEFAULT_GRADING = 2.0
SLOPE_FLOOR = 1e-12


@dataclass(frozen=True)
class DescentConfig:
    """Tolerancias del descenso sobre J⁺"""

    tol: float = 1e-9
    max_iter: int = 3000
    step_floor: float = 1e-12
    armijo: float = 1e-4
    newton_switch: float = 1e-3
    ball_radius: Optional[float] = None
    cells: int = DEFAULT_CELLS
    grading: float = DEFAULT_GRADING

    def __post_init__(self) -> None:
        if self.tol <= 0 or self.step_floor <= 0:
            raise ConfigError("descent: las tolerancias deben ser positivas")
        if self.ball_radius is not None and self.ball_radius <= 0:
            raise ConfigError("descent.ball_radius: se requiere un radio positivo")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DescentConfig":
        return cls(**{k: data[k] for k in cls.__dataclass_fields__ if k in data})


@dataclass(frozen=True)
class PathConfig:
    """Parámetros del método de cuerdas"""

    nodes: int = 32
    max_sweeps: int = 400
    tol: float = 1e-9
    polish_every: int = 20
    polish_switch: float = 1e-2
    collapse_margin: float = 1e-14

    def __post_init__(self) -> None:
        if self.nodes < 16:
            raise ConfigError(f"path.nodes: se requieren al menos 16 nodos (recibido {self.nodes})")
        if self.tol <= 0:
            raise ConfigError("path.tol: se requiere tol > 0")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PathConfig":
        return cls(**{k: data[k] for k in cls.__dataclass_fields__ if k in data})


class DiscreteProblem:
    """
    J⁺ restringido a perfiles P1 sobre una malla fija

    El gradiente es exactamente el residuo débil contra las funciones
    sombrero, así que un punto crítico discreto tiene residuo nulo.
    """

    def __init__(
        self,
        term: KirchhoffTerm,
        nonlin: Nonlinearity,
        domain: DomainSpec,
        cells: int = DEFAULT_CELLS,
        grading: float = DEFAULT_GRADING,
        positive_part: bool = True,
    ):
        self.term = term
        self.nonlin = nonlin.with_positive_part(True) if positive_part else nonlin
        self.domain = domain.radial_half()
        self.grid = build_grid(self.domain, cells, grading)
        self.free = free_nodes(self.grid, self.domain)
        self.p = self.domain.p

    # Perfiles
    def profile(self, U: np.ndarray) -> RadialProfile:
        return RadialProfile.piecewise_linear(self.grid, U, dirichlet=True)

    def project(self, u: RadialProfile) -> np.ndarray:
        """Interpolación nodal de un perfil cualquiera (cero fuera de su soporte)"""
        U = np.interp(self.grid.nodes, u.grid.nodes, u.values, right=0.0)
        mask = np.zeros_like(U)
        mask[self.free] = 1.0
        return U * mask

    def bump(self) -> np.ndarray:
        """cos(πρ/2R) normalizado a ‖·‖_W = 1"""
        U = np.cos(0.5 * math.pi * self.grid.nodes / self.domain.R)
        U[-1] = 0.0
        return U / self.norm(U)

    # Funcional
    def energy(self, U: np.ndarray) -> float:
        return evaluate_J(self.profile(U), self.term, self.nonlin, self.domain)

    def residual(self, U: np.ndarray) -> WeakResidual:
        return weak_residual(self.profile(U), self.term, self.nonlin, self.domain)

    def norm(self, U: np.ndarray) -> float:
        return sobolev_norm(self.profile(U), self.domain)

    def distance(self, U: np.ndarray, V: np.ndarray) -> float:
        return self.norm(U - V)

    def ray(self, U: np.ndarray) -> RayDecomposition:
        return RayDecomposition.of(self.profile(U), self.term, self.nonlin, self.domain)

    # Métricas y Newton
    def _coefficient(self, U: np.ndarray) -> np.ndarray:
        du = np.abs(self.profile(U).quad_derivatives)
        floor = max(SLOPE_FLOOR, 1e-8 * float(np.max(du)) if du.size else SLOPE_FLOOR)
        return (self.p - 1.0) * np.maximum(du, floor) ** (self.p - 2.0)

    def precondition(self, U: np.ndarray, g: np.ndarray) -> np.ndarray:
        """A⁻¹g con A la linealización de coeficiente congelado del p-Laplaciano"""
        W = sobolev_norm_p(self.profile(U), self.domain)
        scale = max(float(self.term.M(W)) if W > 0 else 0.0, 1e-12)
        diag, off = stiffness_bands(self.grid, self.domain, self._coefficient(U))
        free = self.free
        ab = np.zeros((3, free.size))
        ab[0, 1:] = off[free[:-1]]
        ab[1, :] = diag[free]
        ab[2, :-1] = off[free[:-1]]
        out = np.zeros_like(U)
        out[free] = solve_banded((1, 1), ab, g[free]) / scale
        return out

    def _mass_bands(self, coefficient: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Masa ponderada ω∫c φ_iφ_j ρ^{N-1} como (diagonal, superdiagonal)"""
        grid = self.grid
        w = grid.weights * coefficient
        bl, br = grid.basis_left[None, :], grid.basis_right[None, :]
        left = np.sum(w * bl * bl, axis=1)
        cross = np.sum(w * bl * br, axis=1)
        right = np.sum(w * br * br, axis=1)
        diag = np.zeros(grid.nodes.size)
        diag[:-1] += left
        diag[1:] += right
        factor = self.domain.surface_factor
        return factor * diag, factor * cross

    def hessian_parts(self, U: np.ndarray) -> Tuple[np.ndarray, np.ndarray, float]:
        """
        Hessiana de J⁺ discreto sobre los nodos libres como banda + rango uno

        H = ab (tridiagonal, formato solve_banded) + alpha·b bᵀ
        """
        prof = self.profile(U)
        W = sobolev_norm_p(prof, self.domain)
        k_diag, k_off = stiffness_bands(self.grid, self.domain, self._coefficient(U))
        m_diag, m_off = self._mass_bands(self.nonlin.df(prof.quad_values))
        M = float(self.term.M(W))
        diag = M * k_diag - m_diag
        off = M * k_off - m_off
        free = self.free
        ab = np.zeros((3, free.size))
        ab[0, 1:] = off[free[:-1]]
        ab[1, :] = diag[free]
        ab[2, :-1] = off[free[:-1]]
        b = principal_vector(prof, self.domain)[free]
        return ab, b, self.p * float(self.term.dM(W))

    def newton_direction(self, U: np.ndarray, g: np.ndarray) -> np.ndarray:
        ab, b, alpha = self.hessian_parts(U)
        try:
            y = solve_banded((1, 1), ab, -g[self.free])
            z = solve_banded((1, 1), ab, b)
        except (np.linalg.LinAlgError, ValueError) as e:
            raise NumericalError("Newton: hessiana singular", {"norm": self.norm(U)}) from e
        # Sherman-Morrison para el término alpha·b bᵀ
        denom = 1.0 + alpha * float(np.dot(b, z))
        if not math.isfinite(denom) or abs(denom) < 1e-14:
            raise NumericalError("Newton: hessiana singular", {"norm": self.norm(U)})
        step = y - z * (alpha * float(np.dot(b, y)) / denom)
        if not np.all(np.isfinite(step)):
            raise NumericalError("Newton: paso no finito", {"norm": self.norm(U)})
        out = np.zeros_like(U)
        out[self.free] = step
        return out


def newton_critical_point(
    problem: DiscreteProblem, U: np.ndarray, tol: float, max_iter: int = 40
) -> Tuple[np.ndarray, List[Dict[str, Any]]]:
    """Newton amortiguado sobre el residuo débil (mínimos y puntos de silla)"""
    log: List[Dict[str, Any]] = []
    info = problem.residual(U)
    for it in range(max_iter):
        log.append({"newton": it, "residual": info.dual_norm})
        if info.dual_norm <= tol:
            return U, log
        dx = problem.newton_direction(U, info.vector)
        t = 1.0
        while t >= 1e-4:
            trial = U + t * dx
            trial_info = problem.residual(trial)
            if trial_info.dual_norm < info.dual_norm:
                U, info = trial, trial_info
                break
            t *= 0.5
        else:
            raise NumericalError(
                "Newton: sin descenso del residuo",
                {"iteration": it, "residual": info.dual_norm},
            )
    if info.dual_norm <= tol:
        return U, log
    raise NumericalError("Newton: sin convergencia", {"residual": info.dual_norm})


def minimize_J_plus(
    term: KirchhoffTerm,
    nonlin: Nonlinearity,
    domain: DomainSpec,
    init: RadialProfile,
    config: Optional[DescentConfig] = None,
    problem: Optional[DiscreteProblem] = None,
) -> SolveReport:
    """
    Descenso con búsqueda lineal de Armijo sobre J⁺ y pulido final de Newton

    Cada paso aceptado reduce J⁺. Con ball_radius el descenso no sale de la
    bola ‖u‖_W <= radio y el resultado se etiqueta como mínimo local.

    Args:
        term (KirchhoffTerm): Término no local
        nonlin (Nonlinearity): No linealidad (se usa su parte positiva)
        domain (DomainSpec): Dominio
        init (RadialProfile): Perfil inicial (se interpola en la malla P1)
        config (DescentConfig): Tolerancias

    Returns:
        SolveReport: Informe con kind global-min o local-min
    """
    config = config or DescentConfig()
    problem = problem or DiscreteProblem(term, nonlin, domain, config.cells, config.grading)
    kind = "local-min" if config.ball_radius is not None else "global-min"
    U = problem.project(init)

    if not np.any(U):
        logger.info("Inicio en el origen: punto crítico degenerado, J = 0")
        return make_report(
            problem.profile(U),
            term,
            problem.nonlin,
            domain,
            kind,
            log=[{"iteration": 0, "J": 0.0, "residual": 0.0, "step": 0.0}],
            notes={"degenerate_critical_point": True},
        )

    radius = config.ball_radius
    if radius is not None and problem.norm(U) > radius:
        raise ConfigError("minimize_J_plus.init: el perfil inicial sale de la bola")

    J = problem.energy(U)
    log: List[Dict[str, Any]] = []
    step = 0.0
    converged = False
    for it in range(config.max_iter):
        info = problem.residual(U)
        log.append({"iteration": it, "J": J, "residual": info.dual_norm, "step": step})
        if info.dual_norm <= config.tol:
            converged = True
            break

        if info.relative <= config.newton_switch:
            try:
                dx = problem.newton_direction(U, info.vector)
                trial = U + dx
                inside = radius is None or problem.norm(trial) <= radius
                J_trial = problem.energy(trial)
                if inside and J_trial <= J + 1e-12 * abs(J):
                    if problem.residual(trial).dual_norm < info.dual_norm:
                        U, J, step = trial, J_trial, 1.0
                        continue
            except NumericalError as e:
                logger.debug(f"Paso de Newton descartado: {e}")

        direction = -problem.precondition(U, info.vector)
        slope = float(np.dot(info.vector, direction))
        if slope >= 0:
            direction = -info.vector
            slope = float(np.dot(info.vector, direction))
        t = 1.0
        while t >= config.step_floor:
            trial = U + t * direction
            if radius is None or problem.norm(trial) <= radius:
                J_trial = problem.energy(trial)
                if J_trial <= J + config.armijo * t * slope:
                    break
            t *= 0.5
        else:
            logger.error(f"Error durante el descenso: estancamiento en la iteración {it}")
            raise NumericalError(
                "minimize_J_plus: paso por debajo del umbral con residuo alto",
                {"iteration": it, "J": J, "residual": info.dual_norm},
            )
        U, J, step = trial, J_trial, t

    if not converged:
        raise NumericalError(
            "minimize_J_plus: sin convergencia",
            {"iterations": config.max_iter, "J": J, "residual": log[-1]["residual"]},
        )
    notes = {
        "min_value": float(np.min(U)),
        "nonnegative": bool(np.min(U) >= -1e-8 * max(float(np.max(np.abs(U))), 1e-300)),
    }
    logger.info(f"Mínimo de J⁺ = {J:.6e} en {len(log)} iteraciones")
    return make_report(problem.profile(U), term, problem.nonlin, domain, kind, log=log, notes=notes)


def _reparametrize(problem: DiscreteProblem, path: List[np.ndarray]) -> List[np.ndarray]:
    """Redistribuye los nodos interiores a longitud de arco W equiespaciada"""
    lengths = np.array([problem.distance(a, b) for a, b in zip(path[:-1], path[1:])])
    s = np.concatenate([[0.0], np.cumsum(lengths)])
    if s[-1] == 0.0:
        return path
    targets = np.linspace(0.0, s[-1], len(path))
    out = [path[0]]
    for target in targets[1:-1]:
        i = int(np.clip(np.searchsorted(s, target, side="right") - 1, 0, len(path) - 2))
        width = s[i + 1] - s[i]
        t = 0.0 if width == 0 else (target - s[i]) / width
        out.append((1.0 - t) * path[i] + t * path[i + 1])
    out.append(path[-1])
    return out


def _descend_node(problem: DiscreteProblem, U: np.ndarray, J: float) -> Tuple[np.ndarray, float]:
    info = problem.residual(U)
    direction = -problem.precondition(U, info.vector)
    slope = float(np.dot(info.vector, direction))
    if slope >= 0:
        return U, J
    t = 1.0
    for _ in range(30):
        trial = U + t * direction
        J_trial = problem.energy(trial)
        if J_trial <= J + 1e-4 * t * slope:
            return trial, J_trial
        t *= 0.5
    return U, J


def mountain_pass(
    term: KirchhoffTerm,
    nonlin: Nonlinearity,
    domain: DomainSpec,
    endpoint: RadialProfile,
    config: Optional[PathConfig] = None,
    problem: Optional[DiscreteProblem] = None,
) -> SolveReport:
    """
    Paso de montaña numérico entre 0 y e

    Camino discreto de K+1 perfiles: cada barrido desciende los nodos
    interiores y reparametriza por longitud de arco W; el nivel registrado
    (máximo del camino) no crece entre barridos. El nodo más alto se pule
    con Newton hasta un punto crítico.
    """
    config = config or PathConfig()
    problem = problem or DiscreteProblem(term, nonlin, domain)
    E = problem.project(endpoint)
    J_end = problem.energy(E)
    if not J_end < 0:
        raise ConfigError(f"mountain_pass.endpoint: se requiere J⁺(e) < 0 (J⁺(e) = {J_end:.3e})")

    K = config.nodes
    path = [(k / K) * E for k in range(K + 1)]
    energies = [0.0] + [problem.energy(U) for U in path[1:]]
    initial_max = max(energies)
    floor = max(0.0, J_end)
    log: List[Dict[str, Any]] = []
    level = initial_max

    for sweep in range(config.max_sweeps):
        moved = [path[0]]
        moved_energies = [energies[0]]
        for U, J in zip(path[1:-1], energies[1:-1]):
            V, JV = _descend_node(problem, U, J)
            moved.append(V)
            moved_energies.append(JV)
        moved.append(path[-1])
        moved_energies.append(energies[-1])

        candidate = _reparametrize(problem, moved)
        candidate_energies = [energies[0]] + [problem.energy(U) for U in candidate[1:-1]] + [J_end]
        if max(candidate_energies[1:-1]) <= max(moved_energies[1:-1]):
            path, energies = candidate, candidate_energies
        else:
            path, energies = moved, moved_energies

        top = 1 + int(np.argmax(energies[1:-1]))
        level = energies[top]
        info = problem.residual(path[top])
        log.append(
            {"sweep": sweep, "level": level, "top_index": top, "top_residual": info.dual_norm}
        )
        if level <= floor + config.collapse_margin:
            logger.error("Error durante el paso de montaña: colapso del camino")
            raise NumericalError(
                "mountain_pass: colapso del camino (sin barrera en la clase muestreada)",
                {"sweep": sweep, "level": level},
            )

        if info.relative <= config.polish_switch or (sweep + 1) % config.polish_every == 0:
            try:
                U, newton_log = newton_critical_point(problem, path[top], config.tol)
            except NumericalError as e:
                logger.debug(f"Pulido de Newton fallido en el barrido {sweep}: {e}")
                continue
            level_star = problem.energy(U)
            if problem.norm(U) > 1e-8 * problem.norm(E) and level_star > floor:
                log.extend(newton_log)
                notes = {
                    "level": level_star,
                    "initial_max": initial_max,
                    "endpoint_level": J_end,
                    "path_level": level,
                    "sweeps": sweep + 1,
                    "levels_monotone": all(
                        b["level"] <= a["level"] + 1e-14 * abs(a["level"])
                        for a, b in zip(log, log[1:])
                        if "level" in a and "level" in b
                    ),
                }
                if level_star > initial_max * (1 + 1e-9):
                    logger.warning("Nivel de paso por encima del máximo del camino inicial")
                logger.info(f"Paso de montaña: nivel {level_star:.6e} tras {sweep + 1} barridos")
                return make_report(
                    problem.profile(U), term, problem.nonlin, domain, "mountain-pass", log=log, notes=notes
                )

    raise NumericalError(
        "mountain_pass: sin convergencia del punto de silla",
        {"sweeps": config.max_sweeps, "level": level},
    )


# Utilidades de escenario
def cross_validate(
    report: SolveReport,
    term: KirchhoffTerm,
    nonlin: Nonlinearity,
    domain: DomainSpec,
    rtol: float = 1e-12,
) -> Dict[str, Any]:
    """
    Recupera (γ, d) de un perfil del solver variacional y lo contrasta con la
    raíz de consistencia del disparo más cercana (Newton desde ese punto)
    """
    plain = nonlin.with_positive_part(False)
    G = _consistency_system(term, plain, domain, rtol)
    x0 = [math.log(report.gamma), math.log(report.d)]
    try:
        x, _ = newton_polish(G, x0, tol=1e-12)
    except NumericalError as e:
        logger.warning(f"Validación cruzada fallida: {e}")
        return {"agree": False, "error": str(e)}
    gamma, d = math.exp(x[0]), math.exp(x[1])
    rel_gamma = abs(report.gamma - gamma) / gamma
    rel_d = abs(report.d - d) / d
    return {
        "gamma_variational": report.gamma,
        "d_variational": report.d,
        "gamma_shooting": gamma,
        "d_shooting": d,
        "rel_gamma": rel_gamma,
        "rel_d": rel_d,
        "agree": rel_gamma < 1e-4 and rel_d < 1e-4,
    }


def _first_negative(ray: RayDecomposition, t_min: float, t_max: float, samples: int = 400) -> Optional[float]:
    ts = np.geomspace(t_min, t_max, samples)
    values = ray.values(ts)
    idx = np.nonzero(values < 0)[0]
    return float(ts[idx[0]]) if idx.size else None


def _seed_members(problem: DiscreteProblem, seed: int = 0) -> List[Tuple[str, np.ndarray]]:
    """Bulto, perfiles propios, instantones y bultos aleatorios normalizados"""
    members: List[ProbeMember] = probe_family(
        problem.domain, seed, eps_values=[0.3, 0.1, 0.03, 0.01, 0.003], bump_count=6
    )
    out = [("bump", problem.bump())]
    for member in members:
        U = problem.project(member.profile)
        if not np.any(U):
            continue
        n = problem.norm(U)
        if n > 0:
            out.append((member.label, U / n))
    return out


def instanton_seed(
    problem: DiscreteProblem, radius: Optional[float] = None
) -> Optional[Tuple[str, np.ndarray, float]]:
    """Semilla con J⁺ < 0 minimizando J⁺ a lo largo de rayos de la familia"""
    best: Optional[Tuple[str, np.ndarray, float]] = None
    t_max = radius if radius is not None else 1e4
    ts = np.geomspace(1e-6, t_max, 600)
    for label, U in _seed_members(problem):
        values = problem.ray(U).values(ts)
        i = int(np.argmin(values))
        if values[i] < 0 and (best is None or values[i] < best[2]):
            best = (label, ts[i] * U, float(values[i]))
    return best


@dataclass
class ScenarioReport:
    """Resultado de un escenario: soluciones etiquetadas y certificados"""

    name: str
    case: str
    solutions: Dict[str, SolveReport]
    cross_validation: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    certificate: Optional["GeometryCertificate"] = None
    notes: Dict[str, Any] = field(default_factory=dict)

    def rows(self) -> List[Dict[str, Any]]:
        rows = []
        for label, report in self.solutions.items():
            row = {"scenario": self.name, "case": self.case, "label": label}
            row.update(report.summary())
            row.update({f"xval_{k}": v for k, v in self.cross_validation.get(label, {}).items()})
            row["provenance"] = "computed"
            rows.append(row)
        return rows

    def summary(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"scenario": self.name, "case": self.case}
        out.update(self.notes)
        if self.certificate is not None:
            out["certificate"] = self.certificate.to_dict()
        return out


@dataclass(frozen=True)
class ScenarioConfig:
    descent: DescentConfig = field(default_factory=DescentConfig)
    path: PathConfig = field(default_factory=PathConfig)
    search: NonlocalSearch = field(default_factory=NonlocalSearch)
    cross_validate: bool = True

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ScenarioConfig":
        return cls(
            descent=DescentConfig.from_dict(data.get("descent", {})),
            path=PathConfig.from_dict(data.get("path", {})),
            search=NonlocalSearch.from_dict(data.get("search", {})),
            cross_validate=bool(data.get("cross_validate", True)),
        )


def _pstar(domain: DomainSpec) -> float:
    rd = domain.radial_half()
    return critical_exponent(rd) if rd.has_critical_exponent else math.inf


def _require_model(nonlin: Nonlinearity) -> Tuple[float, float, float]:
    if nonlin.q is None or nonlin.varpi is None or nonlin.lam is None:
        raise ConfigError("nonlinearity: el escenario requiere una no linealidad modelo")
    return nonlin.q, nonlin.varpi, nonlin.lam


def _validate_all(
    scenario: ScenarioReport, term: KirchhoffTerm, nonlin: Nonlinearity, domain: DomainSpec, config: ScenarioConfig
) -> None:
    if not config.cross_validate:
        return
    for label, report in scenario.solutions.items():
        if not report.degenerate:
            scenario.cross_validation[label] = cross_validate(
                report, term, nonlin, domain, config.search.rtol
            )


def _pass_endpoint(problem: DiscreteProblem, U: np.ndarray, factor: float = 1.5) -> np.ndarray:
    """Punto del rayo por U, cerca del primer cambio de signo de J⁺"""
    t = _first_negative(problem.ray(U), 1e-6, 1.0)
    if t is None:
        return U
    return min(1.0, factor * t) * U


def coercive_scenario(
    term: PurePower,
    nonlin: Nonlinearity,
    domain: DomainSpec,
    config: Optional[ScenarioConfig] = None,
) -> ScenarioReport:
    """
    Problema coercivo r > ϖ

    Casos: r ∈ (ϖ, p*) minimizador global y paso de montaña cuando inf J⁺ < 0;
    r = p* minimizador global; r > p* minimizador global para todo λ > 0.
    """
    config = config or ScenarioConfig()
    if not isinstance(term, PurePower):
        raise ConfigError("term: el escenario coercivo requiere una potencia pura")
    q, varpi, lam = _require_model(nonlin)
    r = term.r
    if not r > varpi:
        raise ConfigError(f"escenario coercivo: se requiere r > varpi (r={r}, varpi={varpi})")
    pstar = _pstar(domain)
    if math.isclose(r, pstar):
        case = "critical"
    elif r < pstar:
        case = "subcritical"
    else:
        case = "supercritical"

    problem = DiscreteProblem(term, nonlin, domain, config.descent.cells, config.descent.grading)
    scenario = ScenarioReport("coercive", case, {})
    seed = instanton_seed(problem)
    if seed is None:
        scenario.notes["inf_negative"] = False
        logger.info("Sin semilla con J⁺ < 0: no se busca minimizador (lambda pequeño)")
        return scenario
    label, U0, J0 = seed
    scenario.notes.update({"seed": label, "seed_J": J0, "inf_negative": True})

    minimizer = minimize_J_plus(
        term, nonlin, domain, problem.profile(U0), config.descent, problem
    )
    scenario.solutions["global-min"] = minimizer
    if case == "subcritical":
        U_min = problem.project(minimizer.profile)
        endpoint = problem.profile(_pass_endpoint(problem, U_min))
        scenario.solutions["mountain-pass"] = mountain_pass(
            term, nonlin, domain, endpoint, config.path, problem
        )
    _validate_all(scenario, term, nonlin, domain, config)
    return scenario


def noncoercive_scenario(
    term: PurePower,
    nonlin: Nonlinearity,
    domain: DomainSpec,
    config: Optional[ScenarioConfig] = None,
) -> ScenarioReport:
    """q < r < ϖ < p*, σ ∈ (q, ϖ): paso de montaña entre 0 y un e con J⁺(e) < 0"""
    config = config or ScenarioConfig()
    q, varpi, lam = _require_model(nonlin)
    if not isinstance(term, PurePower):
        raise ConfigError("term: el escenario no coercivo requiere una potencia pura")
    r = term.r
    pstar = _pstar(domain)
    if not q < r < varpi < pstar:
        raise ConfigError("escenario no coercivo: se requiere q < r < varpi < p*")
    if nonlin.sigma is not None and not q < nonlin.sigma < varpi:
        raise ConfigError("escenario no coercivo: se requiere q < sigma < varpi")

    problem = DiscreteProblem(term, nonlin, domain, config.descent.cells, config.descent.grading)
    phi = problem.bump()
    t = _first_negative(problem.ray(phi), 1e-6, 1e8)
    if t is None:
        raise NumericalError("escenario no coercivo: no se encontró e con J⁺(e) < 0", {})
    endpoint = problem.profile(1.5 * t * phi)
    scenario = ScenarioReport("noncoercive", "q<r<varpi", {})
    scenario.notes["endpoint_scale"] = 1.5 * t
    scenario.solutions["mountain-pass"] = mountain_pass(
        term, nonlin, domain, endpoint, config.path, problem
    )
    _validate_all(scenario, term, nonlin, domain, config)
    return scenario


# Geometría de tres soluciones
@dataclass
class GeometryCertificate:
    """Desigualdades de la geometría de tres soluciones con sus márgenes"""

    mu: float
    lam: float
    S: float
    R: float
    T: Optional[float]
    Lambda_mu: float
    items: Dict[str, Tuple[bool, float]]

    @property
    def holds(self) -> bool:
        return all(ok for ok, _ in self.items.values())

    @property
    def failed(self) -> List[str]:
        return [name for name, (ok, _) in self.items.items() if not ok]

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "mu": self.mu,
            "lam": self.lam,
            "S": self.S,
            "R": self.R,
            "T": self.T,
            "Lambda_mu": self.Lambda_mu,
            "holds": self.holds,
        }
        for name, (ok, margin) in self.items.items():
            out[f"{name}_holds"] = ok
            out[f"{name}_margin"] = margin
        return out


def _K_part(nonlin: Nonlinearity, mu: float) -> Nonlinearity:
    """Piezas de orden q y σ (sin el término λ)"""
    assert nonlin.q is not None and nonlin.sigma is not None
    return Nonlinearity.from_pieces([(-1.0, nonlin.q), (mu, nonlin.sigma)], positive_part=True)


def geometry_certificate(
    term: PurePower,
    nonlin: Nonlinearity,
    domain: DomainSpec,
    mu: Optional[float] = None,
    lam: Optional[float] = None,
    problem: Optional[DiscreteProblem] = None,
) -> GeometryCertificate:
    """
    Certificado de la geometría: K(φ) < 0 y K(τφ) < S en [0, 1]; I⁺ >= 2S en la
    esfera ‖u‖_W = R (muestreada); I⁺(φ) < 0, I⁺(τφ) < S; I⁺(Tφ) < 0 con T > R

    Sin μ se duplica hasta K(φ) < 0; sin λ se toma Λ_μ/2.
    """
    q, varpi, _ = _require_model(nonlin)
    sigma = nonlin.sigma
    r = term.r
    if sigma is None or not q < sigma < r < varpi:
        raise ConfigError("geometría: se requiere q < sigma < r < varpi")
    problem = problem or DiscreteProblem(term, nonlin, domain)
    rd = problem.domain
    phi = problem.bump()
    taus = np.geomspace(1e-8, 1.0, 800)

    def K_ray(U: np.ndarray, m: float) -> RayDecomposition:
        return RayDecomposition.of(problem.profile(U), term, _K_part(nonlin, m), rd)

    if mu is None:
        mu = 1.0
        for _ in range(40):
            if K_ray(phi, mu).J(1.0) < 0:
                break
            mu *= 2.0
        else:
            raise NumericalError("geometría: no se encontró mu con K(φ) < 0", {"mu": mu})
    ray_phi = K_ray(phi, mu)
    K_segment = float(np.max(ray_phi.values(taus)))
    S = 2.0 * max(K_segment, 0.0)

    members = _seed_members(problem)
    rays = [K_ray(U, mu) for _, U in members]
    top_pieces = [
        lebesgue_norm_s(problem.profile(U).positive_part(), varpi, rd) / varpi for _, U in members
    ]
    best_R, best_Lambda = math.nan, -math.inf
    for R in np.geomspace(1.2, 1e3, 80):
        k_min = min(ray.J(R) for ray in rays)
        l_max = max(L * R**varpi for L in top_pieces)
        if k_min > 2.0 * S and l_max > 0:
            Lam = (k_min - 2.0 * S) / l_max
            if Lam > best_Lambda:
                best_R, best_Lambda = float(R), float(Lam)
    if not math.isfinite(best_R):
        raise NumericalError("geometría: ninguna esfera cumple K >= 2S", {"mu": mu, "S": S})
    R = best_R
    lam = 0.5 * best_Lambda if lam is None else float(lam)

    full = Nonlinearity.model(q, varpi, lam, mu, sigma, positive_part=True)
    I_phi = RayDecomposition.of(problem.profile(phi), term, full, rd)
    sphere_min = min(
        RayDecomposition.of(problem.profile(U), term, full, rd).J(R) for _, U in members
    )
    I_segment = float(np.max(I_phi.values(taus)))
    T = _first_negative(I_phi, R, 1e6 * R)

    items = {
        "K_negative": (ray_phi.J(1.0) < 0, -ray_phi.J(1.0)),
        "K_segment": (K_segment < S, S - K_segment),
        "sphere": (sphere_min >= 2.0 * S, sphere_min - 2.0 * S),
        "I_negative": (I_phi.J(1.0) < 0, -I_phi.J(1.0)),
        "I_segment": (I_segment < S, S - I_segment),
        "far_point": (T is not None, 0.0 if T is None else -I_phi.J(T)),
    }
    cert = GeometryCertificate(mu, lam, S, R, T, best_Lambda, items)
    logger.info(
        f"Geometría: mu={mu:.4g}, lambda={lam:.4g}, S={S:.3e}, R={R:.4g}, "
        f"Lambda_mu={best_Lambda:.4g}, válida={cert.holds}"
    )
    return cert


def multiplicity_scenario(
    term: PurePower,
    nonlin: Nonlinearity,
    domain: DomainSpec,
    mu: Optional[float] = None,
    lam: Optional[float] = None,
    config: Optional[ScenarioConfig] = None,
) -> ScenarioReport:
    """
    Tres soluciones no negativas: mínimo local interior (J⁺ < 0), paso bajo
    (nivel en (0, S]) y paso alto (nivel >= 2S)
    """
    config = config or ScenarioConfig()
    problem = DiscreteProblem(term, nonlin, domain, config.descent.cells, config.descent.grading)
    cert = geometry_certificate(term, nonlin, domain, mu, lam, problem)
    if not cert.holds:
        raise NumericalError(
            "multiplicidad: falla el certificado de geometría",
            {"failed": ",".join(cert.failed), "mu": cert.mu, "lam": cert.lam},
        )
    q, varpi, _ = _require_model(nonlin)
    assert nonlin.sigma is not None
    full = Nonlinearity.model(q, varpi, cert.lam, cert.mu, nonlin.sigma)
    problem = DiscreteProblem(term, full, domain, config.descent.cells, config.descent.grading)
    phi = problem.bump()
    ray = problem.ray(phi)

    taus = np.geomspace(1e-6, cert.R, 800)
    values = ray.values(taus)
    inner_start = taus[int(np.argmin(values))] * phi
    inner_cfg = replace(config.descent, ball_radius=cert.R)
    inner = minimize_J_plus(term, full, domain, problem.profile(inner_start), inner_cfg, problem)

    low_end = _pass_endpoint(problem, phi)
    low = mountain_pass(term, full, domain, problem.profile(low_end), config.path, problem)
    assert cert.T is not None
    high = mountain_pass(term, full, domain, problem.profile(cert.T * phi), config.path, problem)

    scenario = ScenarioReport(
        "multiplicity",
        "three-solutions",
        {"inner-min": inner, "low-pass": low, "high-pass": high},
        certificate=cert,
    )
    profiles = {k: problem.project(v.profile) for k, v in scenario.solutions.items()}
    labels = list(profiles)
    distances = {
        f"{a}|{b}": problem.distance(profiles[a], profiles[b])
        for i, a in enumerate(labels)
        for b in labels[i + 1 :]
    }
    scenario.notes.update(
        {
            "distances": distances,
            "distinct": all(dist > 1e-3 for dist in distances.values()),
            "levels_ordered": inner.J_plus < 0 < low.J_plus <= cert.S <= 2 * cert.S <= high.J_plus,
        }
    )
    _validate_all(scenario, term, full, domain, config)
    return scenario


def sphere_estimate(
    problem: DiscreteProblem, rho: float, members: Optional[List[Tuple[str, np.ndarray]]] = None
) -> float:
    """min J⁺ sobre la esfera muestreada ‖u‖_W = ρ"""
    members = members or _seed_members(problem)
    return min(problem.ray(U).J(rho) for _, U in members)


def not_pure_power_scenario(
    term: MinPower,
    nonlin: Nonlinearity,
    domain: DomainSpec,
    config: Optional[ScenarioConfig] = None,
) -> ScenarioReport:
    """
    M(s^p) = min{s^{r1-p}, s^{r2-p}}: paso de montaña a nivel >= S y, si
    r1 > p*, además J⁺ < 0 dentro de la bola ‖u‖_W <= ρ
    """
    config = config or ScenarioConfig()
    if not isinstance(term, MinPower):
        raise ConfigError("term: el escenario requiere min_power")
    q, varpi, lam = _require_model(nonlin)
    rd = domain.radial_half()
    pstar = _pstar(domain)
    if not 1 < q < varpi < pstar:
        raise ConfigError("escenario no potencia pura: se requiere 1 < q < varpi < p*")
    if not 0 < term.r_lo < varpi:
        raise ConfigError("escenario no potencia pura: se requiere r2 en (0, varpi)")
    case = "r1<p*" if term.r_hi < pstar else "r1>p*"

    problem = DiscreteProblem(term, nonlin, domain, config.descent.cells, config.descent.grading)
    members = _seed_members(problem)
    best_rho, best_S = math.nan, -math.inf
    for rho in np.geomspace(1e-2, 10.0, 60):
        S = sphere_estimate(problem, float(rho), members)
        if S > best_S:
            best_rho, best_S = float(rho), S
    scenario = ScenarioReport("not-pure-power", case, {})
    scenario.notes.update({"rho": best_rho, "S": best_S, "sphere_holds": best_S > 0})

    phi = problem.bump()
    T = _first_negative(problem.ray(phi), max(best_rho, 1e-6), 1e8)
    if T is None:
        raise NumericalError("escenario no potencia pura: no se encontró T con J⁺(Tφ) < 0", {"rho": best_rho})
    endpoint = problem.profile(1.5 * T * phi)
    pass_report = mountain_pass(term, nonlin, domain, endpoint, config.path, problem)
    scenario.solutions["mountain-pass"] = pass_report
    scenario.notes["pass_above_S"] = pass_report.J_plus >= best_S if best_S > 0 else None

    # Testigos analíticos ε^σψ_ε dentro de la bola
    witness = _inner_witness(term, nonlin, rd, best_rho)
    scenario.notes.update(witness)
    if case == "r1>p*":
        seed = instanton_seed(problem, radius=best_rho)
        if seed is not None:
            inner_cfg = replace(config.descent, ball_radius=best_rho)
            try:
                scenario.solutions["inner-min"] = minimize_J_plus(
                    term, nonlin, domain, problem.profile(seed[1]), inner_cfg, problem
                )
            except NumericalError as e:
                logger.warning(f"Mínimo interior no resuelto en la malla: {e}")
                scenario.notes["inner_min_error"] = str(e)
        else:
            scenario.notes["inner_min_grid"] = "no resoluble en la malla; solo testigos"
    _validate_all(scenario, term, nonlin, domain, config)
    return scenario


def _inner_witness(
    term: KirchhoffTerm, nonlin: Nonlinearity, rd: DomainSpec, rho: float
) -> Dict[str, Any]:
    """Menor J⁺(tψ_ε) con ‖tψ_ε‖_W <= ρ sobre instantones analíticos"""
    plus = nonlin.with_positive_part(True)
    best_J, best_norm, best_eps = math.inf, math.nan, math.nan
    for k in range(1, 31):
        eps = 10.0 ** (-k)
        try:
            psi = psi_profile(eps, 0.9, rd)
        except ConfigError:
            continue
        ray = RayDecomposition.of(psi, term, plus, rd)
        base = sobolev_norm(psi, rd)
        ts = np.geomspace(1e-16, rho / base, 400)
        values = ray.values(ts)
        i = int(np.argmin(values))
        if values[i] < best_J:
            best_J, best_norm, best_eps = float(values[i]), float(ts[i] * base), eps
    return {
        "witness_J": best_J,
        "witness_norm": best_norm,
        "witness_eps": best_eps,
        "witness_negative": best_J < 0,
    }


def scenario_rows(scenarios: Sequence[ScenarioReport]) -> List[Dict[str, Any]]:
    return [row for s in scenarios for row in s.rows()]
