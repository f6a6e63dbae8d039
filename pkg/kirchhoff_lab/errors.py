"""
Errores de kirchhoff-lab
Jerarquía mínima: errores de configuración (salida 2) y numéricos (salida 1)
"""

from typing import Any, Dict, Optional


class KirchhoffLabError(Exception):
    """Error base del paquete"""


class ConfigError(KirchhoffLabError, ValueError):
    """Entrada o precondición inválida; el mensaje nombra el campo que falla"""


class NumericalError(KirchhoffLabError, RuntimeError):
    """Fallo numérico (no convergencia, estancamiento, sin intervalo de cambio de signo)"""

    def __init__(self, message: str, context: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.context: Dict[str, Any] = dict(context or {})

    def __str__(self) -> str:
        base = super().__str__()
        if not self.context:
            return base
        detail = ", ".join(f"{k}={v}" for k, v in sorted(self.context.items()))
        return f"{base} ({detail})"
