"""
Artefactos de salida
Tablas CSV/JSON, gráficos SVG log-log, perfiles exportados y el manifiesto
de cada corrida. Las salidas no llevan marcas de tiempo: misma configuración
y misma semilla dan archivos idénticos byte a byte.
"""

from __future__ import annotations

import io
import json
import logging
import math
from importlib import metadata
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Union

import matplotlib
import numpy as np
import pandas as pd

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .errors import ConfigError
from .radial_core import RadialProfile

logger = logging.getLogger(__name__)

FORMATS = ("csv", "json")
PROVENANCE = ("computed", "fitted", "closed-form")
FLOAT_FORMAT = "%.17g"
LIBRARIES = ("numpy", "scipy", "pandas", "matplotlib", "click", "rich")

FIGSIZE = (6.4, 4.2)
# ids estables entre corridas y texto como <text>
plt.rcParams.update({"svg.hashsalt": "kirchhoff-lab", "svg.fonttype": "none"})


def jsonable(value: Any) -> Any:
    """Convierte escalares numpy, tuplas y no finitos a tipos JSON estables"""
    if isinstance(value, Mapping):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isfinite(value):
            return value
        return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if value is None or isinstance(value, str):
        return value
    return str(value)


def library_versions() -> Dict[str, str]:
    versions = {}
    for name in LIBRARIES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "desconocida"
    return versions


def profile_rows(profile: RadialProfile) -> List[Dict[str, Any]]:
    """Filas (ρ, u, u′) en los nodos de la malla"""
    cols = profile.table()
    return [
        {"rho": float(r), "u": float(u), "du": float(du), "provenance": "computed"}
        for r, u, du in zip(cols["rho"], cols["u"], cols["du"])
    ]


class RunWriter:
    """
    Escritor de una corrida

    Args:
        out_dir: Directorio de salida (se crea si no existe)
        fmt (str): "csv" o "json" para las tablas
        plot (bool): Si se generan los gráficos SVG
    """

    def __init__(self, out_dir: Union[str, Path], fmt: str = "csv", plot: bool = False):
        if fmt not in FORMATS:
            raise ConfigError(f"format: se esperaba uno de {FORMATS} (recibido '{fmt}')")
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.fmt = fmt
        self.plot_enabled = plot
        self.artifacts: List[str] = []
        self.fitted: Dict[str, Any] = {}
        self.tables: Dict[str, pd.DataFrame] = {}

    def _register(self, path: Path) -> Path:
        name = path.relative_to(self.out_dir).as_posix()
        if name not in self.artifacts:
            self.artifacts.append(name)
        return path

    def frame(self, rows: Sequence[Mapping[str, Any]], provenance: str = "computed") -> pd.DataFrame:
        """DataFrame con columna de procedencia obligatoria"""
        if provenance not in PROVENANCE:
            raise ConfigError(f"provenance: valor desconocido '{provenance}'")
        df = pd.DataFrame([dict(r) for r in rows])
        if df.empty:
            return pd.DataFrame({"provenance": pd.Series([], dtype=object)})
        if "provenance" not in df.columns:
            df["provenance"] = provenance
        else:
            df["provenance"] = df["provenance"].fillna(provenance)
            bad = set(df["provenance"]) - set(PROVENANCE)
            if bad:
                raise ConfigError(f"provenance: valores desconocidos {sorted(bad)}")
        return df

    def table(
        self,
        name: str,
        rows: Sequence[Mapping[str, Any]],
        provenance: str = "computed",
    ) -> Path:
        """Escribe una tabla como CSV o como registros JSON"""
        df = self.frame(rows, provenance)
        self.tables[name] = df
        if self.fmt == "csv":
            path = self.out_dir / f"{name}.csv"
            df.to_csv(path, index=False, lineterminator="\n", float_format=FLOAT_FORMAT)
        else:
            path = self.out_dir / f"{name}.json"
            records = [jsonable(r) for r in df.to_dict(orient="records")]
            path.write_text(json.dumps(records, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
        logger.info(f"Tabla escrita: {path.name} ({len(df)} filas)")
        return self._register(path)

    def profile(self, name: str, profile: RadialProfile) -> Path:
        return self.table(f"profile_{name}", profile_rows(profile))

    def record(self, **fitted: Any) -> None:
        """Constantes ajustadas o certificadas que van al manifiesto"""
        self.fitted.update(jsonable(fitted))

    def plot(
        self,
        name: str,
        x: str,
        series: Sequence[str],
        table: Optional[str] = None,
        title: str = "",
    ) -> Optional[Path]:
        """Gráfico log-log de columnas de una tabla ya escrita"""
        if not self.plot_enabled:
            return None
        df = self.tables[table or name]
        data = {}
        for col in series:
            if col not in df.columns:
                continue
            xs = pd.to_numeric(df[x], errors="coerce").to_numpy(dtype=float)
            ys = pd.to_numeric(df[col], errors="coerce").to_numpy(dtype=float)
            data[col] = (np.abs(xs), np.abs(ys))
        path = self.out_dir / f"{name}.svg"
        path.write_text(loglog_svg(data, x, title or name), encoding="utf-8")
        logger.info(f"Gráfico escrito: {path.name}")
        return self._register(path)

    def manifest(
        self,
        command: str,
        config: Mapping[str, Any],
        seed: int,
        tolerances: Mapping[str, Any],
        summary: Optional[Mapping[str, Any]] = None,
    ) -> Path:
        from . import __version__

        payload = {
            "command": command,
            "package": {"kirchhoff_lab": __version__},
            "libraries": library_versions(),
            "config": jsonable(config),
            "seed": seed,
            "tolerances": jsonable(tolerances),
            "fitted": self.fitted,
            "summary": jsonable(summary or {}),
            "artifacts": sorted(self.artifacts),
        }
        path = self.out_dir / "manifest.json"
        path.write_text(
            json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2) + "\n",
            encoding="utf-8",
        )
        return path


# SVG
def loglog_svg(series: Mapping[str, Iterable[np.ndarray]], x_label: str, title: str) -> str:
    """Gráfico log-log como texto SVG; descarta puntos no positivos"""
    fig, ax = plt.subplots(figsize=FIGSIZE)
    try:
        plotted = 0
        for label, (xs, ys) in series.items():
            xs = np.asarray(xs, dtype=float)
            ys = np.asarray(ys, dtype=float)
            ok = np.isfinite(xs) & np.isfinite(ys) & (xs > 0) & (ys > 0)
            if not np.any(ok):
                continue
            order = np.argsort(xs[ok], kind="stable")
            ax.loglog(xs[ok][order], ys[ok][order], marker="o", markersize=3, label=label)
            plotted += 1
        if plotted:
            ax.legend(loc="best")
            ax.grid(True, which="major", alpha=0.3)
        else:
            ax.text(0.5, 0.5, "sin datos positivos", ha="center", va="center", transform=ax.transAxes)
        ax.set_xlabel(x_label)
        ax.set_title(title)
        buffer = io.StringIO()
        fig.savefig(buffer, format="svg", metadata={"Date": None})
        return buffer.getvalue()
    finally:
        plt.close(fig)
