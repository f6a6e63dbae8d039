"""
Fixtures comunes: dominios de referencia, mallas y perfiles sinusoidales
"""

import math

import numpy as np
import pytest

from kirchhoff_lab.radial_core import DomainSpec, RadialProfile, build_grid


@pytest.fixture
def ball3():
    """Bola unidad de R^3 con p = 2"""
    return DomainSpec("ball", 3, 1.0, 2.0)


@pytest.fixture
def interval_pi():
    """Intervalo (0, π) con p = 2"""
    return DomainSpec("interval", 1, math.pi, 2.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def sine_profile(i, cells=800):
    """
    φ_i(x) = √(2/π) sin(i x) sobre (0, π)

    Devuelve el dominio y el perfil analítico sobre el intervalo completo.
    """
    domain = DomainSpec("interval", 1, math.pi, 2.0)
    grid = build_grid(domain, cells)
    c = math.sqrt(2.0 / math.pi)
    return domain, RadialProfile.from_function(
        grid, lambda x: c * np.sin(i * x), lambda x: c * i * np.cos(i * x), dirichlet=True
    )


def write_config(path, data):
    """Escribe un JSON de configuración y devuelve su ruta como str"""
    import json

    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)
