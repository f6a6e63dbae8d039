"""
Núcleo radial
Dominios (bolas e intervalos), mallas radiales graduadas, cuadratura de
Gauss-Legendre compuesta con peso ρ^{N-1} y todas las normas
(seminorma de Sobolev, L^s, sup y C^1)
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, TypeVar

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.special import gamma, roots_legendre

from .errors import ConfigError

logger = logging.getLogger(__name__)

# Puntos de Gauss por celda (exacto para polinomios de grado 2*5-1 = 9)
QUAD_ORDER = 5
MIN_CELLS = 4

T = TypeVar("T")
S = TypeVar("S")


@dataclass(frozen=True)
class DomainSpec:
    """
    Geometría radial: bola de radio R en R^N o intervalo (0, R)

    Args:
        kind (str): "ball" o "interval"
        N (int): Dimensión (1 para intervalos)
        R (float): Radio de la bola o longitud del intervalo
        p (float): Exponente del p-Laplaciano
    """

    kind: str
    N: int
    R: float
    p: float

    def __post_init__(self) -> None:
        if self.kind not in ("ball", "interval"):
            raise ConfigError(f"domain.kind: tipo desconocido '{self.kind}'")
        if int(self.N) != self.N or self.N < 1:
            raise ConfigError(f"domain.N: se requiere un entero >= 1 (recibido {self.N})")
        if self.kind == "interval" and self.N != 1:
            raise ConfigError("domain.N: un intervalo requiere N = 1")
        if not math.isfinite(self.R) or self.R <= 0:
            raise ConfigError(f"domain.R: se requiere R > 0 (recibido {self.R})")
        if not math.isfinite(self.p) or self.p <= 1:
            raise ConfigError(f"domain.p: se requiere p > 1 (recibido {self.p})")

    @property
    def surface_factor(self) -> float:
        """ω_{N-1} = 2π^{N/2}/Γ(N/2) para bolas, 1 para intervalos"""
        if self.kind == "interval":
            return 1.0
        return float(2.0 * math.pi ** (self.N / 2.0) / gamma(self.N / 2.0))

    @property
    def has_critical_exponent(self) -> bool:
        return self.N > self.p

    @property
    def critical_exponent(self) -> float:
        return critical_exponent(self)

    @property
    def volume(self) -> float:
        return self.surface_factor * self.R**self.N / self.N

    def radial_half(self) -> "DomainSpec":
        """
        Dominio sobre el que trabajan los métodos radiales

        Para un intervalo (0, R) las soluciones simétricas se describen en la
        mitad (0, R/2) medida desde el centro: bola de dimensión 1 y radio R/2,
        cuyo factor de superficie 2 cuenta las dos mitades.
        """
        if self.kind == "interval":
            return DomainSpec("ball", 1, self.R / 2.0, self.p)
        return self

    def with_radius(self, R: float) -> "DomainSpec":
        return DomainSpec(self.kind, self.N, R, self.p)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "N": self.N, "R": self.R, "p": self.p}


def critical_exponent(domain: DomainSpec) -> float:
    """
    Exponente crítico de Sobolev p* = pN/(N-p)

    Args:
        domain (DomainSpec): Dominio con N > p

    Returns:
        float: p*
    """
    if domain.N <= domain.p:
        raise ConfigError(
            f"exponente crítico indefinido: N <= p (N={domain.N}, p={domain.p})"
        )
    return domain.p * domain.N / (domain.N - domain.p)


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """
    Malla radial con regla de Gauss-Legendre compuesta

    Los pesos incluyen el factor ρ^{N-1} pero no ω_{N-1}: la suma de
    `weights` aproxima ∫_0^{ρ_M} g(ρ) ρ^{N-1} dρ.
    """

    nodes: np.ndarray
    grading: float
    dimension: int
    quad_points: np.ndarray
    weights: np.ndarray
    cell_moments: np.ndarray
    basis_left: np.ndarray
    basis_right: np.ndarray

    @classmethod
    def from_nodes(
        cls, nodes: Sequence[float], dimension: int, grading: float = 1.0
    ) -> "RadialGrid":
        nodes_arr = np.asarray(nodes, dtype=float)
        if nodes_arr.ndim != 1 or nodes_arr.size < MIN_CELLS + 1:
            raise ConfigError(f"grid: se requieren al menos {MIN_CELLS} celdas")
        if nodes_arr[0] != 0.0 or np.any(np.diff(nodes_arr) <= 0):
            raise ConfigError("grid: los nodos deben crecer estrictamente desde 0")

        x_ref, w_ref = roots_legendre(QUAD_ORDER)
        a = nodes_arr[:-1, None]
        b = nodes_arr[1:, None]
        half = 0.5 * (b - a)
        points = 0.5 * (a + b) + half * x_ref[None, :]
        weights = half * w_ref[None, :] * points ** (dimension - 1)
        moments = (nodes_arr[1:] ** dimension - nodes_arr[:-1] ** dimension) / dimension

        return cls(
            nodes=nodes_arr,
            grading=float(grading),
            dimension=int(dimension),
            quad_points=points,
            weights=weights,
            cell_moments=moments,
            basis_left=0.5 * (1.0 - x_ref),
            basis_right=0.5 * (1.0 + x_ref),
        )

    @property
    def cells(self) -> int:
        return self.nodes.size - 1

    @property
    def radius(self) -> float:
        return float(self.nodes[-1])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.nodes)

    def integrate(self, quad_values: np.ndarray) -> float:
        """∫_0^{ρ_M} g ρ^{N-1} dρ a partir de valores en los puntos de Gauss"""
        return float(np.sum(self.weights * quad_values))

    def scaled(self, factor: float) -> "RadialGrid":
        """Malla con todos los nodos multiplicados por `factor`"""
        return RadialGrid.from_nodes(self.nodes * factor, self.dimension, self.grading)


def _graded_nodes(radius: float, cells: int, grading: float, toward: str) -> np.ndarray:
    t = np.arange(cells + 1, dtype=float) / cells
    if toward == "origin":
        nodes = radius * t**grading
    elif toward == "boundary":
        nodes = radius * (1.0 - (1.0 - t) ** grading)
    else:
        raise ConfigError(f"grid.toward: valor desconocido '{toward}'")
    nodes[0] = 0.0
    nodes[-1] = radius
    return nodes


def build_grid(
    domain: DomainSpec,
    cells: int,
    grading: float = 1.0,
    radius: Optional[float] = None,
    toward: str = "origin",
) -> RadialGrid:
    """
    Construye una malla radial graduada

    Args:
        domain (DomainSpec): Dominio (fija N y el radio por defecto)
        cells (int): Número de celdas M (la malla tiene M + 1 nodos)
        grading (float): Exponente de agrupamiento; nodo k en R·(k/M)^grading
        radius (float): Radio de soporte si es menor que domain.R
        toward (str): "origin" agrupa cerca de 0, "boundary" cerca del borde

    Returns:
        RadialGrid: Malla con cuadratura compuesta
    """
    if int(cells) != cells or cells < MIN_CELLS:
        raise ConfigError(f"grid.cells: se requieren al menos {MIN_CELLS} celdas")
    if not math.isfinite(grading) or grading < 1.0:
        raise ConfigError(f"grid.grading: se requiere un valor finito >= 1 ({grading})")
    R = domain.R if radius is None else float(radius)
    if not math.isfinite(R) or R <= 0:
        raise ConfigError(f"grid.radius: radio inválido {R}")
    nodes = _graded_nodes(R, int(cells), float(grading), toward)
    return RadialGrid.from_nodes(nodes, domain.N, grading)


def build_piecewise_grid(
    domain: DomainSpec,
    breakpoints: Sequence[float],
    cells: Sequence[int],
    gradings: Optional[Sequence[float]] = None,
    towards: Optional[Sequence[str]] = None,
) -> RadialGrid:
    """
    Malla formada por tramos [b_{i}, b_{i+1}] con su propia graduación

    Útil para colocar nodos exactamente en los puntos donde el perfil pierde
    regularidad (rampa de corte, frontera libre).
    """
    bps = [float(b) for b in breakpoints]
    if bps[0] != 0.0 or any(b1 <= b0 for b0, b1 in zip(bps[:-1], bps[1:])):
        raise ConfigError("grid.breakpoints: deben crecer estrictamente desde 0")
    if len(cells) != len(bps) - 1:
        raise ConfigError("grid.cells: un número de celdas por tramo")
    gradings = list(gradings) if gradings is not None else [1.0] * len(cells)
    towards = list(towards) if towards is not None else ["origin"] * len(cells)

    pieces: List[np.ndarray] = []
    for a, b, m, g, side in zip(bps[:-1], bps[1:], cells, gradings, towards):
        if m < 1:
            raise ConfigError("grid.cells: cada tramo necesita al menos una celda")
        local = a + _graded_nodes(b - a, int(m), float(g), side)
        pieces.append(local if not pieces else local[1:])
    nodes = np.concatenate(pieces)
    return RadialGrid.from_nodes(nodes, domain.N, max(gradings))


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """
    Función radial discretizada

    Guarda valores y derivadas en los nodos y, además, en los puntos de Gauss
    de cada celda; las normas se calculan siempre con estos últimos.
    representation: "analytic" (datos exactos), "hermite" (interpolación
    cúbica de valores y derivadas nodales) o "p1" (lineal a trozos).
    """

    grid: RadialGrid
    values: np.ndarray
    derivatives: Optional[np.ndarray]
    quad_values: np.ndarray
    quad_derivatives: Optional[np.ndarray]
    dirichlet: bool
    representation: str

    def __post_init__(self) -> None:
        arrays = [self.values, self.quad_values]
        if self.derivatives is not None:
            arrays.append(self.derivatives)
        if self.quad_derivatives is not None:
            arrays.append(self.quad_derivatives)
        if not all(np.all(np.isfinite(a)) for a in arrays):
            raise ConfigError("profile: se encontraron valores no finitos")

    # Constructores
    @classmethod
    def from_function(
        cls,
        grid: RadialGrid,
        func: Callable[[np.ndarray], np.ndarray],
        derivative: Callable[[np.ndarray], np.ndarray],
        dirichlet: Optional[bool] = None,
    ) -> "RadialProfile":
        """Perfil con valores y derivadas analíticos en nodos y puntos de Gauss"""
        values = np.asarray(func(grid.nodes), dtype=float)
        quad_values = np.asarray(func(grid.quad_points), dtype=float)
        return cls(
            grid=grid,
            values=values,
            derivatives=np.asarray(derivative(grid.nodes), dtype=float),
            quad_values=quad_values,
            quad_derivatives=np.asarray(derivative(grid.quad_points), dtype=float),
            dirichlet=_dirichlet_flag(values) if dirichlet is None else dirichlet,
            representation="analytic",
        )

    @classmethod
    def from_values(
        cls,
        grid: RadialGrid,
        values: Sequence[float],
        derivatives: Optional[Sequence[float]] = None,
        dirichlet: Optional[bool] = None,
    ) -> "RadialProfile":
        """
        Perfil a partir de valores nodales

        Si no se dan derivadas se usan diferencias centradas en el interior y
        laterales de segundo orden en los extremos.
        """
        vals = np.asarray(values, dtype=float)
        if vals.shape != grid.nodes.shape:
            raise ConfigError("profile: un valor por nodo")
        if derivatives is None:
            ders = np.gradient(vals, grid.nodes, edge_order=2)
        else:
            ders = np.asarray(derivatives, dtype=float)
        spline = CubicHermiteSpline(grid.nodes, vals, ders)
        return cls(
            grid=grid,
            values=vals,
            derivatives=ders,
            quad_values=spline(grid.quad_points),
            quad_derivatives=spline.derivative()(grid.quad_points),
            dirichlet=_dirichlet_flag(vals) if dirichlet is None else dirichlet,
            representation="hermite",
        )

    @classmethod
    def piecewise_linear(
        cls, grid: RadialGrid, values: Sequence[float], dirichlet: Optional[bool] = None
    ) -> "RadialProfile":
        """Perfil P1: interpolación lineal en cada celda (representación de los solvers)"""
        vals = np.asarray(values, dtype=float)
        if vals.shape != grid.nodes.shape:
            raise ConfigError("profile: un valor por nodo")
        slopes = np.diff(vals) / grid.widths
        quad_values = (
            vals[:-1, None] * grid.basis_left[None, :]
            + vals[1:, None] * grid.basis_right[None, :]
        )
        quad_derivatives = np.repeat(slopes[:, None], grid.basis_left.size, axis=1)
        return cls(
            grid=grid,
            values=vals,
            derivatives=np.gradient(vals, grid.nodes, edge_order=1),
            quad_values=quad_values,
            quad_derivatives=quad_derivatives,
            dirichlet=_dirichlet_flag(vals) if dirichlet is None else dirichlet,
            representation="p1",
        )

    @classmethod
    def zero(cls, grid: RadialGrid) -> "RadialProfile":
        return cls.piecewise_linear(grid, np.zeros_like(grid.nodes), dirichlet=True)

    # Aritmética (misma malla)
    def scale(self, t: float) -> "RadialProfile":
        return RadialProfile(
            grid=self.grid,
            values=t * self.values,
            derivatives=None if self.derivatives is None else t * self.derivatives,
            quad_values=t * self.quad_values,
            quad_derivatives=(
                None if self.quad_derivatives is None else t * self.quad_derivatives
            ),
            dirichlet=self.dirichlet,
            representation=self.representation,
        )

    def __mul__(self, t: float) -> "RadialProfile":
        return self.scale(float(t))

    __rmul__ = __mul__

    def __neg__(self) -> "RadialProfile":
        return self.scale(-1.0)

    def __add__(self, other: "RadialProfile") -> "RadialProfile":
        if other.grid is not self.grid and not np.array_equal(
            other.grid.nodes, self.grid.nodes
        ):
            raise ConfigError("profile: suma de perfiles en mallas distintas")
        same = self.representation == other.representation
        return RadialProfile(
            grid=self.grid,
            values=self.values + other.values,
            derivatives=_sum_optional(self.derivatives, other.derivatives),
            quad_values=self.quad_values + other.quad_values,
            quad_derivatives=_sum_optional(self.quad_derivatives, other.quad_derivatives),
            dirichlet=self.dirichlet and other.dirichlet,
            representation=self.representation if same else "mixed",
        )

    def __sub__(self, other: "RadialProfile") -> "RadialProfile":
        return self + other.scale(-1.0)

    def positive_part(self) -> "RadialProfile":
        """u⁺ = max(u, 0); la derivada se anula donde u <= 0"""
        mask_nodes = self.values > 0
        mask_quad = self.quad_values > 0
        return RadialProfile(
            grid=self.grid,
            values=np.where(mask_nodes, self.values, 0.0),
            derivatives=(
                None
                if self.derivatives is None
                else np.where(mask_nodes, self.derivatives, 0.0)
            ),
            quad_values=np.where(mask_quad, self.quad_values, 0.0),
            quad_derivatives=(
                None
                if self.quad_derivatives is None
                else np.where(mask_quad, self.quad_derivatives, 0.0)
            ),
            dirichlet=self.dirichlet,
            representation=self.representation,
        )

    @property
    def has_derivatives(self) -> bool:
        return self.quad_derivatives is not None

    def is_zero(self) -> bool:
        return not np.any(self.values) and not np.any(self.quad_values)

    def table(self) -> dict:
        """Columnas (rho, u, du) para exportar"""
        du = self.derivatives if self.derivatives is not None else np.full_like(
            self.values, np.nan
        )
        return {"rho": self.grid.nodes, "u": self.values, "du": du}


def _sum_optional(a: Optional[np.ndarray], b: Optional[np.ndarray]) -> Optional[np.ndarray]:
    if a is None or b is None:
        return None
    return a + b


def _dirichlet_flag(values: np.ndarray) -> bool:
    scale = float(np.max(np.abs(values))) if values.size else 0.0
    return abs(float(values[-1])) <= 1e-12 * max(scale, 1e-300)


# Normas
def sobolev_norm_p(u: RadialProfile, domain: DomainSpec) -> float:
    """ω_{N-1}∫|u'|^p ρ^{N-1} dρ, la potencia p de la seminorma"""
    if u.quad_derivatives is None:
        raise ConfigError("sobolev_norm: faltan datos de derivada")
    return domain.surface_factor * u.grid.integrate(np.abs(u.quad_derivatives) ** domain.p)


def sobolev_norm(u: RadialProfile, domain: DomainSpec) -> float:
    """
    Norma de W_0^{1,p}: (ω_{N-1}∫_0^R |u'|^p ρ^{N-1} dρ)^{1/p}

    Args:
        u (RadialProfile): Perfil con datos de derivada
        domain (DomainSpec): Dominio (fija p y ω_{N-1})

    Returns:
        float: Norma >= 0
    """
    return sobolev_norm_p(u, domain) ** (1.0 / domain.p)


def lebesgue_norm_s(u: RadialProfile, s: float, domain: DomainSpec) -> float:
    """‖u‖_s^s = ω_{N-1}∫|u|^s ρ^{N-1} dρ"""
    if not math.isfinite(s):
        raise ConfigError("lebesgue_norm: para s = ∞ use sup_norm")
    if s < 1:
        raise ConfigError(f"lebesgue_norm: se requiere s >= 1 (recibido {s})")
    return domain.surface_factor * u.grid.integrate(np.abs(u.quad_values) ** s)


def lebesgue_norm(u: RadialProfile, s: float, domain: DomainSpec) -> float:
    """Norma L^s del perfil en el dominio"""
    return lebesgue_norm_s(u, s, domain) ** (1.0 / s)


def sup_norm(u: RadialProfile) -> float:
    return float(max(np.max(np.abs(u.values)), np.max(np.abs(u.quad_values))))


def gradient_sup_norm(u: RadialProfile) -> float:
    candidates = []
    if u.derivatives is not None:
        candidates.append(np.max(np.abs(u.derivatives)))
    if u.quad_derivatives is not None:
        candidates.append(np.max(np.abs(u.quad_derivatives)))
    if not candidates:
        raise ConfigError("c1_norm: faltan datos de derivada")
    return float(max(candidates))


def c1_norm(u: RadialProfile) -> float:
    """sup|u| + sup|u'|"""
    return sup_norm(u) + gradient_sup_norm(u)


# Utilidades compartidas
def log_slope_fit(x: Sequence[float], y: Sequence[float]) -> Tuple[float, float, float]:
    """
    Ajuste por mínimos cuadrados de log|y| frente a log x

    Returns:
        Tuple[float, float, float]: (pendiente, ordenada, residuo máximo)
    """
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.abs(np.asarray(y, dtype=float)))
    if lx.size < 2:
        raise ConfigError("ajuste: se necesitan al menos dos puntos")
    slope, intercept = np.polyfit(lx, ly, 1)
    residual = float(np.max(np.abs(ly - (slope * lx + intercept))))
    return float(slope), float(intercept), residual


def geometric_ladder(start: float, ratio: float, count: int) -> List[float]:
    """Escalera geométrica start, start·ratio, ..."""
    if count < 2 or not (0 < ratio) or ratio == 1.0 or start <= 0:
        raise ConfigError("ladder: se requieren start > 0, ratio > 0 (≠ 1) y count >= 2")
    return [float(start * ratio**k) for k in range(int(count))]


def parallel_map(func: Callable[[T], S], items: Iterable[T], threads: int = 1) -> List[S]:
    """Aplica func a cada elemento conservando el orden; hilos si threads > 1"""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=int(threads)) as pool:
        return list(pool.map(func, items))
