"""
Funcionales de Kirchhoff
Términos no locales M / M̂, no linealidades F / f, evaluación de J y J⁺ y
residuo débil (gradiente discreto de J)
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.linalg import solve_banded

from .errors import ConfigError
from .radial_core import (
    DomainSpec,
    RadialGrid,
    RadialProfile,
    lebesgue_norm_s,
    sobolev_norm_p,
)

logger = logging.getLogger(__name__)


# Términos no locales
class KirchhoffTerm:
    """
    Peso no local M(t) con t = ‖u‖_W^p y su primitiva M̂(t) = ∫_0^t M

    Las subclases implementan M, M̂ y M' vectorizados sobre t >= 0.
    """

    variant = "abstract"

    def __init__(self, p: float):
        if not p > 1:
            raise ConfigError(f"term.p: se requiere p > 1 (recibido {p})")
        self.p = float(p)

    def M(self, t: Any) -> Any:
        raise NotImplementedError

    def m_hat(self, t: Any) -> Any:
        raise NotImplementedError

    def dM(self, t: Any) -> Any:
        raise NotImplementedError

    @property
    def degenerate(self) -> bool:
        """M(0) = 0"""
        return False

    def to_dict(self) -> Dict[str, Any]:
        raise NotImplementedError

    def __repr__(self) -> str:
        fields = ", ".join(f"{k}={v!r}" for k, v in self.to_dict().items() if k != "variant")
        return f"{type(self).__name__}({fields})"


def _nonnegative(t: Any) -> np.ndarray:
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise ConfigError("m_hat: se requiere t >= 0 finito")
    return arr


def _scalar(value: np.ndarray, like: Any) -> Any:
    return float(value) if np.ndim(like) == 0 else value


class PurePower(KirchhoffTerm):
    """M(s^p) = s^{r-p}; con r = 0, M(t) = 1/t y M̂(t) = log t"""

    variant = "pure_power"

    def __init__(self, r: float, p: float):
        super().__init__(p)
        if not (r >= 0 and math.isfinite(r)):
            raise ConfigError(f"term.r: se requiere r >= 0 (recibido {r})")
        self.r = float(r)

    @property
    def exponent(self) -> float:
        return (self.r - self.p) / self.p

    def M(self, t: Any) -> Any:
        arr = _nonnegative(t)
        with np.errstate(divide="ignore"):
            return _scalar(np.power(arr, self.exponent), t)

    def m_hat(self, t: Any) -> Any:
        arr = _nonnegative(t)
        with np.errstate(divide="ignore"):
            if self.r == 0.0:
                out = np.log(arr)
            else:
                out = (self.p / self.r) * np.power(arr, self.r / self.p)
        return _scalar(out, t)

    def dM(self, t: Any) -> Any:
        arr = _nonnegative(t)
        e = self.exponent
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(e == 0.0, 0.0, e * np.power(arr, e - 1.0))
        return _scalar(out, t)

    @property
    def degenerate(self) -> bool:
        return self.r > self.p

    def to_dict(self) -> Dict[str, Any]:
        return {"variant": self.variant, "r": self.r}


class MinPower(KirchhoffTerm):
    """M(s^p) = min{s^{r1-p}, s^{r2-p}}"""

    variant = "min_power"

    def __init__(self, r1: float, r2: float, p: float):
        super().__init__(p)
        if not (r1 > 0 and r2 > 0):
            raise ConfigError(f"term.r1/r2: se requieren exponentes positivos ({r1}, {r2})")
        self.r1 = float(r1)
        self.r2 = float(r2)
        self.r_hi = max(self.r1, self.r2)
        self.r_lo = min(self.r1, self.r2)

    def M(self, t: Any) -> Any:
        arr = _nonnegative(t)
        e = np.where(arr <= 1.0, (self.r_hi - self.p) / self.p, (self.r_lo - self.p) / self.p)
        with np.errstate(divide="ignore"):
            return _scalar(np.power(arr, e), t)

    def m_hat(self, t: Any) -> Any:
        arr = _nonnegative(t)
        p = self.p
        low = (p / self.r_hi) * np.power(np.minimum(arr, 1.0), self.r_hi / p)
        high = (p / self.r_lo) * (np.power(np.maximum(arr, 1.0), self.r_lo / p) - 1.0)
        return _scalar(low + high, t)

    def dM(self, t: Any) -> Any:
        arr = _nonnegative(t)
        e = np.where(arr <= 1.0, (self.r_hi - self.p) / self.p, (self.r_lo - self.p) / self.p)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(e == 0.0, 0.0, e * np.power(arr, e - 1.0))
        return _scalar(out, t)

    @property
    def degenerate(self) -> bool:
        return self.r_hi > self.p

    def to_dict(self) -> Dict[str, Any]:
        return {"variant": self.variant, "r1": self.r1, "r2": self.r2}


class Affine(KirchhoffTerm):
    """Kirchhoff clásico M(t) = a + bt"""

    variant = "affine"

    def __init__(self, a: float, b: float, p: float):
        super().__init__(p)
        if a < 0 or b < 0 or a + b <= 0:
            raise ConfigError(f"term.a/b: se requieren a, b >= 0 con a + b > 0 ({a}, {b})")
        self.a = float(a)
        self.b = float(b)

    def M(self, t: Any) -> Any:
        arr = _nonnegative(t)
        return _scalar(self.a + self.b * arr, t)

    def m_hat(self, t: Any) -> Any:
        arr = _nonnegative(t)
        return _scalar(self.a * arr + 0.5 * self.b * arr * arr, t)

    def dM(self, t: Any) -> Any:
        arr = _nonnegative(t)
        return _scalar(np.full_like(arr, self.b), t)

    @property
    def degenerate(self) -> bool:
        return self.a == 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {"variant": self.variant, "a": self.a, "b": self.b}


class Tabulated(KirchhoffTerm):
    """M interpolado linealmente a partir de muestras (t_i, M_i), t_0 = 0"""

    variant = "tabulated"

    def __init__(self, t_samples: Sequence[float], m_samples: Sequence[float], p: float):
        super().__init__(p)
        ts = np.asarray(t_samples, dtype=float)
        ms = np.asarray(m_samples, dtype=float)
        if ts.ndim != 1 or ts.size < 2 or ts.shape != ms.shape:
            raise ConfigError("term.samples: se requieren al menos dos pares (t, M)")
        if ts[0] != 0.0 or np.any(np.diff(ts) <= 0):
            raise ConfigError("term.samples: t debe crecer estrictamente desde 0")
        if np.any(ms < 0) or not np.all(np.isfinite(ms)):
            raise ConfigError("term.samples: se requiere M >= 0 finito")
        self.t_samples = ts
        self.m_samples = ms
        self._primitive = cumulative_trapezoid(ms, ts, initial=0.0)
        self._slopes = np.diff(ms) / np.diff(ts)

    def _check_range(self, arr: np.ndarray) -> None:
        if np.any(arr > self.t_samples[-1]):
            raise ConfigError(
                f"term.samples: consulta t = {float(np.max(arr)):g} fuera de la tabla "
                f"(máximo {self.t_samples[-1]:g})"
            )

    def _cell(self, arr: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.t_samples, arr, side="right") - 1
        return np.clip(idx, 0, self.t_samples.size - 2)

    def M(self, t: Any) -> Any:
        arr = _nonnegative(t)
        self._check_range(arr)
        return _scalar(np.interp(arr, self.t_samples, self.m_samples), t)

    def m_hat(self, t: Any) -> Any:
        arr = _nonnegative(t)
        self._check_range(arr)
        i = self._cell(arr)
        dt = arr - self.t_samples[i]
        out = self._primitive[i] + self.m_samples[i] * dt + 0.5 * self._slopes[i] * dt * dt
        return _scalar(out, t)

    def dM(self, t: Any) -> Any:
        arr = _nonnegative(t)
        self._check_range(arr)
        return _scalar(self._slopes[self._cell(arr)], t)

    @property
    def degenerate(self) -> bool:
        return self.m_samples[0] == 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "variant": self.variant,
            "t": [float(v) for v in self.t_samples],
            "M": [float(v) for v in self.m_samples],
        }


def term_from_dict(data: Dict[str, Any], p: float) -> KirchhoffTerm:
    """Construye un término a partir de su especificación JSON"""
    variant = data.get("variant")
    try:
        if variant == "pure_power":
            return PurePower(float(data["r"]), p)
        if variant == "min_power":
            return MinPower(float(data["r1"]), float(data["r2"]), p)
        if variant == "affine":
            return Affine(float(data["a"]), float(data["b"]), p)
        if variant == "tabulated":
            return Tabulated(data["t"], data["M"], p)
    except KeyError as e:
        raise ConfigError(f"term.{e.args[0]}: campo obligatorio ausente") from e
    raise ConfigError(f"term.variant: variante desconocida '{variant}'")


def m_hat(term: KirchhoffTerm, t: Any) -> Any:
    """M̂(t) = ∫_0^t M"""
    return term.m_hat(t)


# No linealidades
@dataclass(frozen=True)
class Nonlinearity:
    """
    f(v) = Σ c_i sign(v)|v|^{e_i - 1},  F(v) = Σ (c_i/e_i)|v|^{e_i}

    Con positive_part, f y F se evalúan en v⁺ (funcional J⁺).
    """

    pieces: Tuple[Tuple[float, float], ...]
    positive_part: bool = False
    q: Optional[float] = None
    varpi: Optional[float] = None
    lam: Optional[float] = None
    mu: Optional[float] = None
    sigma: Optional[float] = None

    def __post_init__(self) -> None:
        if not self.pieces:
            raise ConfigError("nonlinearity.pieces: se requiere al menos una pieza")
        for c, e in self.pieces:
            if not (math.isfinite(c) and math.isfinite(e)) or e <= 1:
                raise ConfigError(
                    f"nonlinearity.pieces: exponente {e} inválido (se requiere e > 1)"
                )

    # Constructores
    @classmethod
    def from_pieces(
        cls, pieces: Sequence[Sequence[float]], positive_part: bool = False
    ) -> "Nonlinearity":
        return cls(tuple((float(c), float(e)) for c, e in pieces), positive_part)

    @classmethod
    def model(
        cls,
        q: float,
        varpi: float,
        lam: float,
        mu: Optional[float] = None,
        sigma: Optional[float] = None,
        positive_part: bool = False,
    ) -> "Nonlinearity":
        """-|u|^{q-2}u + λ|u|^{ϖ-2}u [+ μ|u|^{σ-2}u]"""
        if not q < varpi:
            raise ConfigError(f"nonlinearity.model: se requiere q < varpi (q={q}, varpi={varpi})")
        pieces: List[Tuple[float, float]] = [(-1.0, float(q)), (float(lam), float(varpi))]
        if mu is not None:
            if sigma is None:
                raise ConfigError("nonlinearity.model: mu requiere sigma")
            if not q < sigma < varpi:
                raise ConfigError(
                    f"nonlinearity.model: se requiere q < sigma < varpi (sigma={sigma})"
                )
            pieces.append((float(mu), float(sigma)))
        return cls(
            tuple(pieces),
            positive_part,
            q=float(q),
            varpi=float(varpi),
            lam=float(lam),
            mu=None if mu is None else float(mu),
            sigma=None if sigma is None else float(sigma),
        )

    @classmethod
    def linear(cls) -> "Nonlinearity":
        """f(u) = u"""
        return cls(((1.0, 2.0),))

    @classmethod
    def power(cls, c: float, e: float, positive_part: bool = False) -> "Nonlinearity":
        return cls(((float(c), float(e)),), positive_part)

    def with_positive_part(self, flag: bool = True) -> "Nonlinearity":
        return Nonlinearity(
            self.pieces, flag, self.q, self.varpi, self.lam, self.mu, self.sigma
        )

    def with_lambda(self, lam: float) -> "Nonlinearity":
        """Misma no linealidad modelo con otro λ"""
        if self.q is None or self.varpi is None:
            raise ConfigError("nonlinearity: with_lambda requiere una no linealidad modelo")
        return Nonlinearity.model(
            self.q, self.varpi, lam, self.mu, self.sigma, self.positive_part
        )

    def scaled(self, factor: float) -> "Nonlinearity":
        """γ·f como no linealidad (coeficientes multiplicados)"""
        return Nonlinearity(
            tuple((factor * c, e) for c, e in self.pieces), self.positive_part
        )

    @property
    def exponents(self) -> List[float]:
        return [e for _, e in self.pieces]

    @property
    def largest_exponent(self) -> float:
        return max(self.exponents)

    def homogeneous_degree(self) -> Optional[float]:
        """Exponente común si f es una sola potencia"""
        es = set(self.exponents)
        return es.pop() if len(es) == 1 else None

    def _arg(self, v: Any) -> np.ndarray:
        arr = np.asarray(v, dtype=float)
        return np.maximum(arr, 0.0) if self.positive_part else arr

    def f(self, v: Any) -> Any:
        arr = self._arg(v)
        out = np.zeros_like(arr)
        a = np.abs(arr)
        for c, e in self.pieces:
            out = out + c * np.sign(arr) * a ** (e - 1.0)
        return _scalar(out, v)

    def F(self, v: Any) -> Any:
        arr = self._arg(v)
        out = np.zeros_like(arr)
        a = np.abs(arr)
        for c, e in self.pieces:
            out = out + (c / e) * a**e
        return _scalar(out, v)

    def df(self, v: Any) -> Any:
        raw = np.asarray(v, dtype=float)
        arr = self._arg(raw)
        out = np.zeros_like(arr)
        a = np.abs(arr)
        with np.errstate(divide="ignore", invalid="ignore"):
            for c, e in self.pieces:
                if e == 2.0:
                    out = out + c
                else:
                    out = out + c * (e - 1.0) * a ** (e - 2.0)
        if self.positive_part:
            out = np.where(raw > 0, out, 0.0)
        return _scalar(out, v)

    def to_dict(self) -> Dict[str, Any]:
        if self.q is not None and self.varpi is not None and self.lam is not None:
            model: Dict[str, Any] = {"q": self.q, "varpi": self.varpi, "lam": self.lam}
            if self.mu is not None:
                model.update({"mu": self.mu, "sigma": self.sigma})
            return {"model": model, "positive_part": self.positive_part}
        return {
            "pieces": [[c, e] for c, e in self.pieces],
            "positive_part": self.positive_part,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Nonlinearity":
        positive = bool(data.get("positive_part", False))
        if "model" in data:
            m = data["model"]
            try:
                return cls.model(
                    float(m["q"]),
                    float(m["varpi"]),
                    float(m["lam"]),
                    None if m.get("mu") is None else float(m["mu"]),
                    None if m.get("sigma") is None else float(m["sigma"]),
                    positive,
                )
            except KeyError as e:
                raise ConfigError(f"nonlinearity.model.{e.args[0]}: campo ausente") from e
        if "pieces" in data:
            return cls.from_pieces(data["pieces"], positive)
        raise ConfigError("nonlinearity: se requiere 'pieces' o 'model'")


# Evaluación de J
def _potential(u: RadialProfile, nonlin: Nonlinearity, domain: DomainSpec) -> float:
    return domain.surface_factor * u.grid.integrate(nonlin.F(u.quad_values))


def evaluate_J(
    u: RadialProfile, term: KirchhoffTerm, nonlin: Nonlinearity, domain: DomainSpec
) -> float:
    """
    J(u) = M̂(‖u‖_W^p)/p - ∫F(u)

    Args:
        u (RadialProfile): Perfil con datos de derivada
        term (KirchhoffTerm): Término no local
        nonlin (Nonlinearity): No linealidad (positive_part decide entre J y J⁺)
        domain (DomainSpec): Dominio

    Returns:
        float: Valor del funcional
    """
    W = sobolev_norm_p(u, domain)
    if W == 0.0 and isinstance(term, PurePower) and term.r == 0.0:
        return -math.inf
    return float(term.m_hat(W)) / domain.p - _potential(u, nonlin, domain)


def evaluate_J_plus(
    u: RadialProfile, term: KirchhoffTerm, nonlin: Nonlinearity, domain: DomainSpec
) -> float:
    """J⁺(u) = M̂(‖u‖_W^p)/p - ∫F(u⁺)"""
    return evaluate_J(u, term, nonlin.with_positive_part(True), domain)


@dataclass(frozen=True)
class RayDecomposition:
    """
    Descomposición homogénea de t ↦ J(tu)

    J(tu) = M̂(t^p W)/p - Σ (c_i/e_i) t^{e_i} L_i con W = ‖u‖_W^p y
    L_i = ∫|u|^{e_i} (o de u⁺), calculados una sola vez.
    """

    term: KirchhoffTerm
    p: float
    W: float
    pieces: Tuple[Tuple[float, float, float], ...]

    @classmethod
    def of(
        cls,
        u: RadialProfile,
        term: KirchhoffTerm,
        nonlin: Nonlinearity,
        domain: DomainSpec,
    ) -> "RayDecomposition":
        v = u.positive_part() if nonlin.positive_part else u
        pieces = tuple((c, e, lebesgue_norm_s(v, e, domain)) for c, e in nonlin.pieces)
        return cls(term, domain.p, sobolev_norm_p(u, domain), pieces)

    def J(self, t: float) -> float:
        principal = float(self.term.m_hat(abs(t) ** self.p * self.W)) / self.p
        return principal - sum((c / e) * abs(t) ** e * L for c, e, L in self.pieces)

    def dJ(self, t: float) -> float:
        """d/dt J(tu) para t > 0"""
        principal = float(self.term.M(t**self.p * self.W)) * t ** (self.p - 1.0) * self.W
        return principal - sum(c * t ** (e - 1.0) * L for c, e, L in self.pieces)

    def values(self, ts: Sequence[float]) -> np.ndarray:
        return np.array([self.J(float(t)) for t in ts])


# Residuo débil
def _flux(du: np.ndarray, p: float) -> np.ndarray:
    return np.sign(du) * np.abs(du) ** (p - 1.0)


def free_nodes(grid: RadialGrid, domain: DomainSpec) -> np.ndarray:
    """Índices de los nodos libres (sin condición de Dirichlet)"""
    start = 1 if domain.kind == "interval" else 0
    return np.arange(start, grid.nodes.size - 1)


def principal_vector(u: RadialProfile, domain: DomainSpec) -> np.ndarray:
    """ω∫|u'|^{p-2}u' φ_k' ρ^{N-1} para cada función sombrero φ_k"""
    if u.quad_derivatives is None:
        raise ConfigError("weak_residual: faltan datos de derivada")
    grid = u.grid
    cell = np.sum(grid.weights * _flux(u.quad_derivatives, domain.p), axis=1) / grid.widths
    out = np.zeros(grid.nodes.size)
    out[:-1] -= cell
    out[1:] += cell
    return domain.surface_factor * out


def load_vector(values: np.ndarray, grid: RadialGrid, domain: DomainSpec) -> np.ndarray:
    """ω∫g φ_k ρ^{N-1} con g dada en los puntos de Gauss"""
    left = np.sum(grid.weights * values * grid.basis_left[None, :], axis=1)
    right = np.sum(grid.weights * values * grid.basis_right[None, :], axis=1)
    out = np.zeros(grid.nodes.size)
    out[:-1] += left
    out[1:] += right
    return domain.surface_factor * out


def stiffness_bands(
    grid: RadialGrid, domain: DomainSpec, coefficient: Optional[np.ndarray] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Matriz de rigidez P1 ω∫c φ_i'φ_j' ρ^{N-1} como (diagonal, superdiagonal)

    Sin coeficiente se usan los momentos exactos ∫ρ^{N-1} de cada celda.
    """
    if coefficient is None:
        cell = grid.cell_moments / grid.widths**2
    else:
        cell = np.sum(grid.weights * coefficient, axis=1) / grid.widths**2
    cell = domain.surface_factor * cell
    diag = np.zeros(grid.nodes.size)
    diag[:-1] += cell
    diag[1:] += cell
    return diag, -cell


def solve_stiffness(
    rhs: np.ndarray, grid: RadialGrid, domain: DomainSpec, free: Optional[np.ndarray] = None
) -> np.ndarray:
    """Resuelve K x = rhs sobre los nodos libres (x = 0 en los demás)"""
    free = free_nodes(grid, domain) if free is None else free
    diag, off = stiffness_bands(grid, domain)
    d = diag[free]
    o = off[free[:-1]]
    ab = np.zeros((3, free.size))
    ab[0, 1:] = o
    ab[1, :] = d
    ab[2, :-1] = o
    out = np.zeros(grid.nodes.size)
    out[free] = solve_banded((1, 1), ab, rhs[free])
    return out


def dual_norm(vector: np.ndarray, grid: RadialGrid, domain: DomainSpec) -> float:
    """(rᵀK⁻¹r)^{1/2} sobre los nodos libres"""
    free = free_nodes(grid, domain)
    x = solve_stiffness(vector, grid, domain, free)
    return float(math.sqrt(max(float(np.dot(vector[free], x[free])), 0.0)))


@dataclass(frozen=True, eq=False)
class WeakResidual:
    """Residuo débil del operador no local contra las funciones sombrero"""

    profile: RadialProfile
    dual_norm: float
    relative: float
    degenerate: bool
    vector: np.ndarray = field(repr=False)
    multiplier: float = 0.0

    def __iter__(self) -> Iterator[Any]:
        return iter((self.profile, self.dual_norm))


def weak_residual(
    u: RadialProfile,
    term: KirchhoffTerm,
    nonlin: Nonlinearity,
    domain: DomainSpec,
) -> WeakResidual:
    """
    r_k = M(‖u‖_W^p)·ω∫|u'|^{p-2}u'φ_k' ρ^{N-1} - ω∫f(u)φ_k ρ^{N-1}

    En u = 0 la parte principal se toma como su límite 0 y el resultado se
    marca como punto degenerado. La norma relativa divide por la norma dual
    de la parte de reacción.
    """
    grid = u.grid
    W = sobolev_norm_p(u, domain)
    degenerate = W == 0.0
    if degenerate:
        principal = np.zeros(grid.nodes.size)
        coeff = 0.0
    else:
        coeff = float(term.M(W))
        principal = coeff * principal_vector(u, domain)
    reaction = load_vector(nonlin.f(u.quad_values), grid, domain)
    vector = principal - reaction
    free = free_nodes(grid, domain)
    vector_free = np.zeros_like(vector)
    vector_free[free] = vector[free]
    reaction_free = np.zeros_like(reaction)
    reaction_free[free] = reaction[free]

    norm = dual_norm(vector_free, grid, domain)
    scale = dual_norm(reaction_free, grid, domain)
    relative = norm / scale if scale > 0 else norm
    if degenerate:
        logger.debug("Residuo en punto degenerado (u = 0)")
    return WeakResidual(
        profile=RadialProfile.piecewise_linear(grid, vector_free, dirichlet=True),
        dual_norm=norm,
        relative=relative,
        degenerate=degenerate,
        vector=vector_free,
        multiplier=coeff,
    )
