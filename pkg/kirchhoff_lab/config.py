"""
Configuración de experimentos
Lectura y validación de los archivos JSON que describen cada corrida
(dominio, término de Kirchhoff, no linealidad, malla y parámetros libres)
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

from .errors import ConfigError
from .functionals import KirchhoffTerm, Nonlinearity, term_from_dict
from .radial_core import MIN_CELLS, DomainSpec

logger = logging.getLogger(__name__)

TOP_LEVEL_KEYS = ("domain", "term", "nonlinearity", "grid", "params", "seed")
DEFAULT_SEED = 0


@dataclass(frozen=True)
class GridSpec:
    """Número de celdas y graduación de la malla radial"""

    cells: int = 400
    grading: float = 1.5

    def __post_init__(self) -> None:
        if int(self.cells) != self.cells or self.cells < MIN_CELLS:
            raise ConfigError(
                f"grid.cells: se requiere un entero >= {MIN_CELLS} (recibido {self.cells})"
            )
        if not math.isfinite(self.grading) or self.grading < 1.0:
            raise ConfigError(f"grid.grading: se requiere grading >= 1 (recibido {self.grading})")

    def to_dict(self) -> Dict[str, Any]:
        return {"cells": self.cells, "grading": self.grading}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "GridSpec":
        unknown = set(data) - {"cells", "grading"}
        if unknown:
            raise ConfigError(f"grid.{sorted(unknown)[0]}: campo desconocido")
        return cls(int(data.get("cells", 400)), float(data.get("grading", 1.5)))


@dataclass(frozen=True)
class ExperimentConfig:
    """
    Descripción completa de un experimento

    Args:
        domain (DomainSpec): Geometría
        term (KirchhoffTerm): Término no local (opcional según el subcomando)
        nonlinearity (Nonlinearity): No linealidad (opcional según el subcomando)
        grid (GridSpec): Malla
        params (dict): Parámetros propios del subcomando
        seed (int): Semilla del generador aleatorio
    """

    domain: DomainSpec
    term: Optional[KirchhoffTerm] = None
    nonlinearity: Optional[Nonlinearity] = None
    grid: GridSpec = field(default_factory=GridSpec)
    params: Mapping[str, Any] = field(default_factory=dict)
    seed: int = DEFAULT_SEED

    def require_term(self, command: str) -> KirchhoffTerm:
        if self.term is None:
            raise ConfigError(f"term: campo obligatorio para '{command}'")
        return self.term

    def require_nonlinearity(self, command: str) -> Nonlinearity:
        if self.nonlinearity is None:
            raise ConfigError(f"nonlinearity: campo obligatorio para '{command}'")
        return self.nonlinearity

    def param(self, name: str, default: Any = None) -> Any:
        return self.params.get(name, default)

    def with_seed(self, seed: Optional[int]) -> "ExperimentConfig":
        if seed is None:
            return self
        return ExperimentConfig(
            self.domain, self.term, self.nonlinearity, self.grid, self.params, int(seed)
        )

    def tolerances(self) -> Dict[str, float]:
        return {k: float(v) for k, v in sorted(self.params.items()) if _is_tolerance(k)}

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "domain": self.domain.to_dict(),
            "grid": self.grid.to_dict(),
            "params": json.loads(json.dumps(dict(self.params))),
            "seed": self.seed,
        }
        if self.term is not None:
            data["term"] = self.term.to_dict()
        if self.nonlinearity is not None:
            data["nonlinearity"] = self.nonlinearity.to_dict()
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ExperimentConfig":
        if not isinstance(data, Mapping):
            raise ConfigError("config: se esperaba un objeto JSON")
        unknown = set(data) - set(TOP_LEVEL_KEYS)
        if unknown:
            raise ConfigError(f"{sorted(unknown)[0]}: campo desconocido")
        if "domain" not in data:
            raise ConfigError("domain: campo obligatorio ausente")

        domain = _domain_from_dict(data["domain"])
        term = None
        if data.get("term") is not None:
            term = term_from_dict(dict(data["term"]), domain.p)
        nonlin = None
        if data.get("nonlinearity") is not None:
            nonlin = Nonlinearity.from_dict(dict(data["nonlinearity"]))
        grid = GridSpec.from_dict(data.get("grid", {}))

        params = data.get("params", {})
        if not isinstance(params, Mapping):
            raise ConfigError("params: se esperaba un objeto")
        _validate_params(params)

        seed = data.get("seed", DEFAULT_SEED)
        if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
            raise ConfigError(f"seed: se requiere un entero >= 0 (recibido {seed!r})")

        return cls(domain, term, nonlin, grid, dict(params), seed)


def _domain_from_dict(data: Mapping[str, Any]) -> DomainSpec:
    try:
        kind = str(data.get("kind", "ball"))
        N = data.get("N", 1 if kind == "interval" else None)
        if N is None:
            raise ConfigError("domain.N: campo obligatorio ausente")
        return DomainSpec(kind, N, float(data["R"]), float(data["p"]))
    except KeyError as e:
        raise ConfigError(f"domain.{e.args[0]}: campo obligatorio ausente") from e
    except TypeError as e:
        raise ConfigError(f"domain: especificación inválida ({e})") from e


def _is_tolerance(name: str) -> bool:
    return name == "tol" or name.endswith("_tol") or name.startswith("tol_") or name == "rtol"


def _validate_params(params: Mapping[str, Any]) -> None:
    for name, value in params.items():
        if not _is_tolerance(name):
            continue
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"params.{name}: la tolerancia debe ser numérica")
        if not math.isfinite(value) or value <= 0:
            raise ConfigError(f"params.{name}: se requiere una tolerancia positiva")


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    """
    Lee y valida un archivo de configuración

    Args:
        path: Ruta al JSON

    Returns:
        ExperimentConfig: Configuración validada
    """
    path = Path(path)
    logger.info(f"Leyendo configuración {path}")
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"config: no se pudo leer {path} ({e.strerror})") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"config: JSON inválido en línea {e.lineno} ({e.msg})") from e
    return ExperimentConfig.from_dict(data)
