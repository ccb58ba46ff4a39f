"""
Configuración centralizada de FrecuenciaOK.

Variables opcionales (con valores por defecto para desarrollo):
  - FRECUENCIAOK_LOG_DIR         (default: "/var/log/frecuenciaok")
  - FRECUENCIAOK_LOG_LEVEL       (default: "INFO")
  - FRECUENCIAOK_SETTLING_BAND   (default: "5e-4", Hz; debe ser > 0)
  - FRECUENCIAOK_CONFIG_DIR      (default: "configs")
  - FRECUENCIAOK_TEMPLATES_DIR   (default: "app/templates")

Los parámetros de cada simulación NO van acá: viven en el archivo de
escenario (ver docs/FORMATO_ESCENARIO.md y app/io/scenario_file.py).
"""

import logging
import os
from dataclasses import dataclass, field


def _env_float(name: str, default: str) -> float:
    raw = os.environ.get(name, default)
    try:
        return float(raw)
    except ValueError:
        raise ValueError(f"La variable de entorno {name} debe ser numérica (valor: {raw!r}).")


@dataclass(frozen=True)
class Settings:
    # Logging
    log_dir: str = os.environ.get("FRECUENCIAOK_LOG_DIR", "/var/log/frecuenciaok")
    log_level: str = os.environ.get("FRECUENCIAOK_LOG_LEVEL", "INFO").upper()

    # Banda de asentamiento por defecto (Hz); el escenario puede sobreescribirla
    settling_band: float = field(default_factory=lambda: _env_float("FRECUENCIAOK_SETTLING_BAND", "5e-4"))

    # Escenarios de reproducción incluidos en el repo
    config_dir: str = os.environ.get("FRECUENCIAOK_CONFIG_DIR", "configs")

    # Plantillas Jinja2 del reporte
    templates_dir: str = os.environ.get(
        "FRECUENCIAOK_TEMPLATES_DIR",
        os.path.join(os.path.dirname(os.path.abspath(__file__)), "templates"),
    )

    def __post_init__(self) -> None:
        if not self.settling_band > 0:
            raise ValueError(
                "FRECUENCIAOK_SETTLING_BAND debe ser > 0 "
                f"(valor: {self.settling_band})."
            )
        if logging.getLevelName(self.log_level) == f"Level {self.log_level}":
            raise ValueError(f"FRECUENCIAOK_LOG_LEVEL desconocido: {self.log_level}")


# Instancia singleton – importar con: from app.config import settings
settings = Settings()
