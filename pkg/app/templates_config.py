"""
Configuración centralizada del entorno Jinja2 para FrecuenciaOK.
Importar templates_env desde aquí en app/io/report.py.
"""

from pathlib import Path
from typing import Optional

from jinja2 import Environment, FileSystemLoader, StrictUndefined

from app.config import settings


def num(value: Optional[float], digits: int = 4) -> str:
    """Número en notación compacta; '—' si no hay valor."""
    if value is None:
        return "—"
    try:
        return f"{float(value):.{digits}g}"
    except (TypeError, ValueError):
        return str(value)


def segundos(value: Optional[float]) -> str:
    if value is None:
        return "no asienta"
    return f"{float(value):.2f} s"


def si_no(value: bool) -> str:
    return "sí" if value else "no"


templates_env = Environment(
    loader=FileSystemLoader(Path(settings.templates_dir)),
    autoescape=False,
    undefined=StrictUndefined,
    keep_trailing_newline=True,
    trim_blocks=True,
    lstrip_blocks=True,
)
templates_env.filters["num"] = num
templates_env.filters["segundos"] = segundos
templates_env.filters["si_no"] = si_no
