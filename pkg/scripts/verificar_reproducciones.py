#!/usr/bin/env python3
"""
verificar_reproducciones.py: Verificaciones de los escenarios incluidos en configs/.

Corre cada escenario dos veces con el CLI, exige código de salida 0 y
trazas idénticas byte a byte (determinismo), y después verifica las
afirmaciones cualitativas de cada reproducción.
Exit code 0 si todas las verificaciones pasan, 1 si alguna falla (apto para CI).

Uso:
    python3 scripts/verificar_reproducciones.py --config-dir configs --out-dir /tmp/frecuenciaok
"""

import argparse
import os
import sys
import tempfile
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from app.config import settings  # noqa: E402
from app.io.scenario_file import parse_scenario  # noqa: E402
from app.io.trace_csv import read_trace  # noqa: E402
from app.sim.engine import dispatch_gap_series, max_abs_freq, settling_time  # noqa: E402
from main import cli_main  # noqa: E402

LIMITE_SEGUNDOS = 60.0


# ---------------------------------------------------------------------------
# Runner de verificaciones
# ---------------------------------------------------------------------------

class Verificador:
    def __init__(self, config_dir: Path, out_dir: Path):
        self.config_dir = config_dir
        self.out_dir = out_dir
        self.resultados: list[tuple[str, bool, str]] = []

    def verificar(self, descripcion: str, ok: bool, detalle: str = "") -> bool:
        self.resultados.append((descripcion, ok, detalle))
        marca = "PASS ✓" if ok else "FAIL ✗"
        linea = f"  [{marca}] {descripcion}"
        if detalle:
            linea += f" ({detalle})"
        print(linea)
        return ok

    def resumen(self) -> bool:
        total = len(self.resultados)
        pasaron = sum(1 for _, ok, _ in self.resultados if ok)
        fallaron = total - pasaron
        print()
        print("=" * 60)
        print(f"RESUMEN: {pasaron}/{total} verificaciones pasaron")
        if fallaron:
            print(f"         {fallaron} verificación(es) FALLARON ✗")
        else:
            print("         Todas las verificaciones PASARON ✓")
        print("=" * 60)
        return fallaron == 0

    def traza(self, nombre: str) -> Path:
        return self.out_dir / f"{Path(nombre).stem}.csv"

    def config(self, nombre: str):
        return parse_scenario(self.config_dir / nombre)


# ---------------------------------------------------------------------------
# Verificación 1: cada escenario corre, en tiempo, y es determinista
# ---------------------------------------------------------------------------

def verificar_corridas(v: Verificador) -> None:
    print("\n--- 1. Corridas y determinismo ---")
    for cfg in sorted(v.config_dir.glob("*.cfg")):
        salida = v.traza(cfg.name)
        repeticion = salida.with_name(salida.stem + "_rep.csv")
        inicio = time.monotonic()
        codigo = cli_main(["run", "--config", str(cfg), "--out", str(salida)])
        duracion = time.monotonic() - inicio
        v.verificar(f"{cfg.name}: exit 0", codigo == 0, f"exit {codigo}")
        v.verificar(f"{cfg.name}: menos de {LIMITE_SEGUNDOS:.0f} s", duracion < LIMITE_SEGUNDOS, f"{duracion:.1f} s")
        codigo_rep = cli_main(["run", "--config", str(cfg), "--out", str(repeticion)])
        identicas = codigo_rep == 0 and salida.read_bytes() == repeticion.read_bytes()
        v.verificar(f"{cfg.name}: trazas idénticas en dos corridas", identicas)


# ---------------------------------------------------------------------------
# Verificación 2: escalón con ΔT = 4 s vs AGC con ΔT = 0.16 s
# ---------------------------------------------------------------------------

def verificar_escalon(v: Verificador) -> None:
    print("\n--- 2. Escalón: distribuido vs AGC ---")
    band = v.config("fig3_step.cfg").settling_band
    t_dist = settling_time(read_trace(v.traza("fig3_step.cfg")), band)
    t_agc = settling_time(read_trace(v.traza("fig3_agc.cfg")), band)
    v.verificar("distribuido asienta en a lo sumo 10 s", t_dist is not None and t_dist <= 10.0, f"{t_dist}")
    v.verificar("AGC necesita más de 12 s", t_agc is None or t_agc > 12.0, f"{t_agc}")


# ---------------------------------------------------------------------------
# Verificación 3: carga variable con ΔT = 0.4 s
# ---------------------------------------------------------------------------

def verificar_carga_variable(v: Verificador) -> None:
    print("\n--- 3. Carga variable, ΔT = 0.4 s ---")
    dist = max_abs_freq(read_trace(v.traza("fig5_distributed.cfg")))
    agc = max_abs_freq(read_trace(v.traza("fig5_agc.cfg")))
    v.verificar("AGC se desvía al menos el doble que el distribuido", agc >= 2.0 * dist,
                f"AGC {agc:.3g} Hz, distribuido {dist:.3g} Hz")


# ---------------------------------------------------------------------------
# Verificación 4: efectividad de costo
# ---------------------------------------------------------------------------

def verificar_costo(v: Verificador) -> None:
    print("\n--- 4. Efectividad de costo ---")
    config = v.config("fig6.cfg")
    costos = [r.a for grupo in config.resources for r in grupo]
    errores = [g.relative_error for g in dispatch_gap_series(read_trace(v.traza("fig6.cfg")), costos)
               if g.relative_error is not None]
    v.verificar("error relativo final ≤ 10%", bool(errores) and errores[-1] <= 0.10,
                f"{errores[0]:.3f} → {errores[-1]:.3f}" if errores else "sin datos")
    v.verificar("el error relativo baja", bool(errores) and errores[-1] < errores[0])


# ---------------------------------------------------------------------------
# Verificación 5: multi-área
# ---------------------------------------------------------------------------

def verificar_multi_area(v: Verificador) -> None:
    print("\n--- 5. Multi-área ---")
    config = v.config("fig8.cfg")
    t = settling_time(read_trace(v.traza("fig8.cfg")), config.settling_band)
    v.verificar("las tres áreas vuelven a la banda", t is not None, f"{t}")


# ---------------------------------------------------------------------------
# main
# ---------------------------------------------------------------------------

def main() -> None:
    parser = argparse.ArgumentParser(
        description="Verifica los escenarios de reproducción de FrecuenciaOK.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument(
        "--config-dir",
        default=settings.config_dir,
        help="Carpeta con los .cfg (default: $FRECUENCIAOK_CONFIG_DIR)",
    )
    parser.add_argument(
        "--out-dir",
        default="",
        help="Carpeta para trazas y reportes (default: carpeta temporal)",
    )
    args = parser.parse_args()

    print("=" * 60)
    print("FrecuenciaOK: Verificación de reproducciones")
    print("=" * 60)

    config_dir = Path(args.config_dir)
    if not config_dir.is_dir():
        print(f"ERROR: Carpeta de escenarios no encontrada: {config_dir}")
        sys.exit(1)
    out_dir = Path(args.out_dir or tempfile.mkdtemp(prefix="frecuenciaok_"))
    os.makedirs(out_dir, exist_ok=True)

    v = Verificador(config_dir, out_dir)

    verificar_corridas(v)
    verificar_escalon(v)
    verificar_carga_variable(v)
    verificar_costo(v)
    verificar_multi_area(v)

    todo_ok = v.resumen()
    sys.exit(0 if todo_ok else 1)


if __name__ == "__main__":
    main()
