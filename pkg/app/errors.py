"""
Excepciones propias de FrecuenciaOK.

Todas heredan de FrecuenciaError para que el CLI (main.py) pueda
traducirlas a un código de salida 1 con una sola línea de causa.
"""

from typing import Optional


class FrecuenciaError(Exception):
    """Error base del simulador."""


class ConfigError(FrecuenciaError, ValueError):
    """Escenario inválido. Nombra el campo, la restricción y (si se conoce) la línea."""

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        self.field = field
        self.line = line
        prefix = f"línea {line}: " if line is not None else ""
        super().__init__(f"{prefix}{message}")


class DimensionError(FrecuenciaError, ValueError):
    """Dimensiones inconsistentes entre grafo, recursos y vectores."""


class IntegrationBlowupError(FrecuenciaError):
    """Valores no finitos durante la integración de un slot."""

    def __init__(self, slot: int, detail: str = ""):
        self.slot = slot
        msg = f"la integración diverge en el slot {slot}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class BoundUndefinedError(FrecuenciaError):
    """La cota de costo no existe: el factor de contracción no es < 1."""


class DispatchError(FrecuenciaError, ValueError):
    """Problema de despacho sin solución (lista de recursos vacía, etc.)."""


class TraceFormatError(FrecuenciaError):
    """Archivo de traza mal formado."""

    def __init__(self, message: str, row: Optional[int] = None):
        self.row = row
        prefix = f"fila {row}: " if row is not None else ""
        super().__init__(f"{prefix}{message}")
