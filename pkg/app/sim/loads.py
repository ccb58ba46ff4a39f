"""
Perfiles de carga ΔP_L por área. La carga solo cambia en el borde de un
slot: el valor del slot k es el perfil evaluado en t = k·ΔT.
"""

import csv
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from app.errors import ConfigError

LOAD_KINDS = ("step", "piecewise-constant-random", "monotone-ramp", "from-file")


@dataclass(frozen=True)
class LoadProfile:
    kind: str = "step"
    magnitude: float = 0.0      # pu (step: escalón; monotone-ramp: tope, 0 = sin tope)
    start: float = 0.0          # s
    period: float = 4.0         # s entre cambios
    epsilon: float = 0.0        # pu, cota del cambio por período
    seed: int = 0
    path: Optional[str] = None  # from-file: CSV con columnas time,load
    points: Tuple[Tuple[float, float], ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in LOAD_KINDS:
            raise ConfigError(f"load kind desconocido: {self.kind!r} (válidos: {', '.join(LOAD_KINDS)})",
                              field="load.kind")
        if self.start < 0:
            raise ConfigError(f"load.start must be >= 0 (valor: {self.start})", field="load.start")
        if self.kind in ("piecewise-constant-random", "monotone-ramp"):
            if not self.period > 0:
                raise ConfigError(f"load.period must be > 0 (valor: {self.period})", field="load.period")
            if not self.epsilon >= 0:
                raise ConfigError(f"load.epsilon must be >= 0 (valor: {self.epsilon})", field="load.epsilon")
        if self.kind == "from-file" and not self.points:
            if not self.path:
                raise ConfigError("load.path es obligatorio para kind = from-file", field="load.path")
            object.__setattr__(self, "points", _read_points(self.path))

    @property
    def bounded(self) -> bool:
        return self.kind in ("piecewise-constant-random", "monotone-ramp")

    def series(self, n_slots: int, slot_len: float) -> np.ndarray:
        """ΔP_L de cada slot (constante dentro del slot)."""
        times = np.arange(n_slots) * slot_len
        if self.kind == "step":
            return np.where(times >= self.start - 1e-9, self.magnitude, 0.0)
        if self.kind == "monotone-ramp":
            changes = np.floor((times - self.start) / self.period + 1e-9) + 1
            values = np.where(times >= self.start - 1e-9, changes * self.epsilon, 0.0)
            if self.magnitude > 0:
                values = np.minimum(values, self.magnitude)
            return values
        if self.kind == "piecewise-constant-random":
            last = max(0, int(math.floor((times[-1] - self.start) / self.period + 1e-9)) + 1) if n_slots else 0
            rng = np.random.default_rng(self.seed)
            steps = rng.uniform(-self.epsilon, self.epsilon, size=last)
            levels = np.concatenate([[0.0], np.cumsum(steps)])
            idx = np.where(
                times >= self.start - 1e-9,
                np.floor((times - self.start) / self.period + 1e-9).astype(int) + 1,
                0,
            )
            return levels[idx]
        # from-file
        pts = np.array(self.points, dtype=float)
        pos = np.searchsorted(pts[:, 0], times + 1e-9, side="right") - 1
        return np.where(pos >= 0, pts[np.clip(pos, 0, None), 1], 0.0)


def _read_points(path: str) -> Tuple[Tuple[float, float], ...]:
    points = []
    try:
        with open(path, newline="", encoding="utf-8") as f:
            reader = csv.DictReader(f)
            for row_no, row in enumerate(reader, start=2):
                try:
                    points.append((float(row["time"]), float(row["load"])))
                except (KeyError, TypeError, ValueError):
                    raise ConfigError(f"{path}: fila {row_no} inválida (se esperan columnas time,load)",
                                      field="load.path")
    except OSError as e:
        raise ConfigError(f"no se pudo leer {path}: {e}", field="load.path")
    points.sort()
    if not points:
        raise ConfigError(f"{path} no contiene filas", field="load.path")
    return tuple(points)
