"""
Traza de simulación en CSV: una fila por instante registrado, encabezado
con nombres únicos de columna.

    time, slot, df_a{j}, load_a{j}, tie_a{j},
    Pm_a{j}_r{i}, Pg_a{j}_r{i}, u_a{j}_r{i}, lambda_a{j}_r{i}

Los flotantes se escriben con repr() (ida y vuelta exacta) para que dos
corridas iguales produzcan archivos idénticos byte a byte. La escritura
es atómica: archivo temporal en la misma carpeta + os.replace.
"""

import csv
import math
import os
import tempfile
from pathlib import Path
from typing import List, Tuple

import numpy as np

from app.errors import TraceFormatError
from app.sim.engine import SimTrace

AREA_COLUMNS = (("df", "freq_dev"), ("load", "load"), ("tie", "tie_flow"))
RESOURCE_COLUMNS = (("Pm", "mech_power"), ("Pg", "valve_pos"), ("u", "control"), ("lambda", "marginal_price"))


def _resource_labels(area_of: np.ndarray) -> List[str]:
    labels, seen = [], {}
    for j in area_of:
        i = seen.get(int(j), 0)
        seen[int(j)] = i + 1
        labels.append(f"a{int(j)}_r{i}")
    return labels


def trace_header(trace: SimTrace) -> List[str]:
    header = ["time", "slot"]
    for prefix, _ in AREA_COLUMNS:
        header += [f"{prefix}_a{j}" for j in range(trace.n_areas)]
    labels = _resource_labels(trace.area_of)
    for prefix, _ in RESOURCE_COLUMNS:
        header += [f"{prefix}_{lab}" for lab in labels]
    return header


def _fmt(x: float) -> str:
    return repr(float(x))


def write_trace(trace: SimTrace, path) -> Path:
    """Escribe la traza completa. Una traza vacía deja solo el encabezado."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(trace_header(trace))
            for t in range(len(trace)):
                row = [_fmt(trace.times[t]), str(int(trace.slot[t]))]
                for _, attr in AREA_COLUMNS:
                    row += [_fmt(x) for x in getattr(trace, attr)[t]]
                for _, attr in RESOURCE_COLUMNS:
                    row += [_fmt(x) for x in getattr(trace, attr)[t]]
                writer.writerow(row)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise
    return path


def _parse_header(header: List[str]) -> Tuple[int, np.ndarray]:
    if header[:2] != ["time", "slot"]:
        raise TraceFormatError("el encabezado debe comenzar con time,slot", row=1)
    n_areas = sum(1 for h in header if h.startswith("df_a"))
    area_of = []
    for h in header:
        if h.startswith("Pm_a"):
            area = h[len("Pm_a"):].split("_r")[0]
            area_of.append(int(area))
    expected = 2 + len(AREA_COLUMNS) * n_areas + len(RESOURCE_COLUMNS) * len(area_of)
    if len(header) != expected or len(set(header)) != len(header):
        raise TraceFormatError("encabezado con columnas faltantes o repetidas", row=1)
    return n_areas, np.array(area_of, dtype=int)


def read_trace(path) -> SimTrace:
    """Lee una traza escrita por write_trace; filas mal formadas dan TraceFormatError con su número."""
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise TraceFormatError("archivo vacío (falta el encabezado)", row=1)
        try:
            n_areas, area_of = _parse_header(header)
        except ValueError as e:
            raise TraceFormatError(f"encabezado inválido: {e}", row=1)
        n_res = area_of.size
        rows = []
        for row_no, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise TraceFormatError(f"se esperaban {len(header)} columnas y hay {len(row)}", row=row_no)
            try:
                values = [float(x) for x in row]
            except ValueError as e:
                raise TraceFormatError(f"valor no numérico ({e})", row=row_no)
            if not all(math.isfinite(v) for v in values):
                raise TraceFormatError("valor no finito", row=row_no)
            rows.append(values)

    data = np.array(rows, dtype=float).reshape(len(rows), len(header))
    cols = {}
    pos = 2
    for _, attr in AREA_COLUMNS:
        cols[attr] = data[:, pos:pos + n_areas]
        pos += n_areas
    for _, attr in RESOURCE_COLUMNS:
        cols[attr] = data[:, pos:pos + n_res]
        pos += n_res
    slot_len = 0.0
    slots = data[:, 1].astype(int)
    changes = np.flatnonzero(np.diff(slots))
    if changes.size:
        slot_len = float(data[changes[0] + 1, 0] - data[0, 0])
    return SimTrace(times=data[:, 0].copy(), slot=slots, area_of=area_of, slot_len=slot_len, **cols)
