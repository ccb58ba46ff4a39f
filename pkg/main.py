# FrecuenciaOK - simulador de control secundario de frecuencia
#
# Compara un controlador distribuido (consenso + innovación global) contra
# el AGC centralizado PI sobre la misma planta y la misma carga.
#
# Este archivo `main.py` es el orquestador principal (CLI):
# - Configura el logging a archivo con rotación
# - Lee el escenario (.cfg, TOML) y despacha el subcomando
# - Traduce errores a códigos de salida: 0 éxito, 1 error de ejecución, 2 uso
#
# Uso:
#   python3 main.py run --config configs/fig3_step.cfg --out salida/fig3.csv
#   python3 main.py compare --config configs/fig3_step.cfg --against configs/fig3_agc.cfg --out salida/fig3.csv
#   python3 main.py check-graph --config configs/fig3_step.cfg
#   python3 main.py dispatch --config configs/fig6.cfg --load 0.005
#   python3 main.py bound --config configs/fig6.cfg --epsilon 0.0002
#   python3 main.py ramp-check --config configs/fig6.cfg
#   python3 main.py tune-agc --config configs/fig3_agc.cfg --kp 0.02,0.05,0.1 --ki 0.02,0.06,0.1
#   python3 main.py sweep --config configs/fig4_distributed.cfg --values 0.08,0.4,4 --jobs 3

import argparse
import logging
import os
import sys
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import List, Optional, Sequence

from app.analytics.bounds import compute_cost_bound, ramp_relaxation_check
from app.analytics.dispatch import optimal_dispatch
from app.config import settings
from app.errors import ConfigError, FrecuenciaError
from app.grid.graph import check_condition, fiedler_value
from app.io.report import render_report
from app.io.scenario_file import parse_scenario
from app.io.trace_csv import write_trace
from app.sim.engine import compare_controllers, run_scenario, summarize, sweep_slot_len, tune_agc_gains
from app.sim.scenario import ScenarioConfig


# ------------------------------------------------------------------------------
# Configuración de logging
# ------------------------------------------------------------------------------

def setup_logging() -> logging.Logger:
    """Configura logging a archivo con rotación."""
    logger = logging.getLogger("frecuenciaok")
    if any(isinstance(h, RotatingFileHandler) for h in logger.handlers):
        return logger

    target_dir = settings.log_dir
    try:
        os.makedirs(target_dir, exist_ok=True)
        test_file = os.path.join(target_dir, ".test_write")
        with open(test_file, "w") as f:
            f.write("ok")
        os.remove(test_file)
    except Exception:
        target_dir = os.path.dirname(os.path.abspath(__file__))

    handler = RotatingFileHandler(
        os.path.join(target_dir, "frecuenciaok.log"),
        maxBytes=10 * 1024 * 1024,
        backupCount=5,
        encoding="utf-8",
    )
    handler.setFormatter(logging.Formatter(
        "%(asctime)s [%(levelname)s] %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    ))
    logger.setLevel(settings.log_level)
    logger.addHandler(handler)
    return logger


# ------------------------------------------------------------------------------
# Helpers
# ------------------------------------------------------------------------------

def _float_list(raw: str) -> List[float]:
    try:
        values = [float(x) for x in raw.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"lista de números inválida: {raw!r}")
    if not values:
        raise argparse.ArgumentTypeError("la lista no puede estar vacía")
    return values


def _load(args) -> ScenarioConfig:
    return parse_scenario(args.config, seed_override=args.seed_override, default_band=settings.settling_band)


def _band(args, config: ScenarioConfig) -> float:
    band = args.band if args.band is not None else config.settling_band
    if not band > 0:
        raise ConfigError(f"band must be > 0 (valor: {band})", field="--band")
    return band


def _area(args, config: ScenarioConfig) -> int:
    if not 0 <= args.area < len(config.areas):
        raise ConfigError(f"área {args.area} inexistente (hay {len(config.areas)})", field="--area")
    return args.area


def _beta(args, config: ScenarioConfig) -> float:
    if getattr(args, "beta", None) is not None:
        return args.beta
    if not config.is_distributed:
        raise ConfigError("el escenario usa AGC; indicar --beta para analizar el grafo", field="controller.beta")
    return config.controller.beta


def _epsilon(args, config: ScenarioConfig, area: int) -> float:
    if args.epsilon is not None:
        return args.epsilon
    load = config.loads[area]
    if not load.bounded:
        raise ConfigError(f"la carga '{load.kind}' no define epsilon; indicar --epsilon", field="--epsilon")
    return load.epsilon


def _report_path(out: Path) -> Path:
    return out.with_name(out.stem + ".report.txt")


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".{path.name}.tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


# ------------------------------------------------------------------------------
# Subcomandos
# ------------------------------------------------------------------------------

def cmd_run(args) -> int:
    config = _load(args)
    band = _band(args, config)
    trace = run_scenario(config)
    summary, _ = summarize(config, trace, band)
    out = Path(args.out)
    write_trace(trace, out)
    report = render_report(config.name, [summary], band, config, trace)
    _write_text(_report_path(out), report)
    print(report, end="")
    print(f"Traza: {out}  Reporte: {_report_path(out)}")
    return 0


def cmd_compare(args) -> int:
    config_a = _load(args)
    config_b = parse_scenario(args.against, seed_override=args.seed_override, default_band=settings.settling_band)
    band = _band(args, config_a)
    result = compare_controllers(config_a, config_b, band)
    out = Path(args.out)
    paths = [out.with_name(f"{out.stem}_a{out.suffix}"), out.with_name(f"{out.stem}_b{out.suffix}")]
    for trace, path in zip(result.traces, paths):
        write_trace(trace, path)
    report = render_report(f"{config_a.name} vs {config_b.name}", result.summaries, band, config_a, result.traces[0])
    _write_text(_report_path(out), report)
    print(report, end="")
    print(f"Trazas: {paths[0]}, {paths[1]}  Reporte: {_report_path(out)}")
    return 0


def cmd_check_graph(args) -> int:
    config = _load(args)
    beta = _beta(args, config)
    for j, group in enumerate(config.resources):
        graph = config.graph(j)
        report = check_condition(graph, beta, [r.a for r in group])
        print(
            f"área {j}: n={len(group)} conectado={str(report.connected).lower()} "
            f"fiedler={fiedler_value(graph):.12g} "
            f"1-rho={report.second_largest:.12g} gamma={report.gamma:.12g} "
            f"satisfied={str(report.satisfied).lower()}"
        )
    return 0


def cmd_dispatch(args) -> int:
    config = _load(args)
    j = _area(args, config)
    costs = [r.a for r in config.resources[j]]
    load = args.load if args.load is not None else float(config.loads[j].series(config.n_slots, config.slot_len)[-1])
    sol = optimal_dispatch(costs, load)
    print(f"área {j}: ΔP_L={load:.12g} lambda*={sol.lambda_star:.12g} costo={sol.total_cost:.12g}")
    for i, u in enumerate(sol.u_star):
        print(f"  u*[{i}] = {u:.12g}")
    return 0


def cmd_bound(args) -> int:
    config = _load(args)
    j = _area(args, config)
    bound = compute_cost_bound(config.graph(j), _beta(args, config), [r.a for r in config.resources[j]],
                               _epsilon(args, config, j))
    print(f"área {j}: gamma={bound.gamma:.12g} delta={bound.delta:.12g} c={bound.c:.12g} "
          f"epsilon={bound.epsilon:.12g} c*epsilon={bound.bound:.12g}")
    return 0


def cmd_ramp_check(args) -> int:
    config = _load(args)
    j = _area(args, config)
    graph = config.graph(j)
    beta = _beta(args, config)
    group = config.resources[j]
    bound = compute_cost_bound(graph, beta, [r.a for r in group], _epsilon(args, config, j))
    rows = ramp_relaxation_check(bound, graph, beta, group)
    print(f"{'recurso':>8} {'vecinos':>8} {'lhs':>14} {'r':>10} {'margen':>14}  estado")
    for row in rows:
        estado = "ok" if row.satisfied else "RAMPA ACTIVA"
        print(f"{row.resource:>8} {row.neighbors:>8} {row.lhs:>14.6g} {row.ramp_r:>10.4g} {row.margin:>14.6g}  {estado}")
    return 0


def cmd_tune_agc(args) -> int:
    config = _load(args)
    kp, ki, t = tune_agc_gains(config, args.kp, args.ki, _band(args, config))
    resultado = f"{t:.2f} s" if t is not None else "no asienta dentro del horizonte"
    print(f"kp={kp:.6g} ki={ki:.6g} asentamiento={resultado}")
    return 0


def cmd_sweep(args) -> int:
    config = _load(args)
    rows = sweep_slot_len(config, args.values, _band(args, config), jobs=args.jobs)
    print(f"{'ΔT (s)':>10} {'asentamiento (s)':>18}")
    for dt, t in rows:
        print(f"{dt:>10.4g} {(f'{t:.2f}' if t is not None else '—'):>18}")
    return 0


# ------------------------------------------------------------------------------
# Parser
# ------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="frecuenciaok",
        description="Simulador de control secundario de frecuencia: distribuido vs AGC.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, func, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="Archivo de escenario (.cfg)")
        p.add_argument("--band", type=float, default=None, help="Banda de asentamiento en Hz")
        p.add_argument("--seed-override", type=int, default=None, help="Reemplaza la semilla del escenario")
        p.set_defaults(func=func)
        return p

    p = add("run", cmd_run, "Corre un escenario y escribe traza + reporte")
    p.add_argument("--out", default="trace.csv", help="CSV de salida (el reporte va al lado)")

    p = add("compare", cmd_compare, "Corre dos escenarios con la misma planta y compara")
    p.add_argument("--against", required=True, help="Segundo escenario")
    p.add_argument("--out", default="compare.csv", help="Prefijo de los CSV de salida")

    p = add("check-graph", cmd_check_graph, "Chequea la condición espectral del grafo de comunicación")
    p.add_argument("--beta", type=float, default=None, help="Paso de consenso (por defecto el del escenario)")

    p = add("dispatch", cmd_dispatch, "Despacho económico óptimo en forma cerrada")
    p.add_argument("--load", type=float, default=None, help="ΔP_L en pu (por defecto la carga final del escenario)")
    p.add_argument("--area", type=int, default=0)

    for name, func, help_text in (
        ("bound", cmd_bound, "Cota de costo c·ε"),
        ("ramp-check", cmd_ramp_check, "Chequeo de que las rampas no se activan"),
    ):
        p = add(name, func, help_text)
        p.add_argument("--epsilon", type=float, default=None, help="Cambio máximo de carga por período (pu)")
        p.add_argument("--beta", type=float, default=None)
        p.add_argument("--area", type=int, default=0)

    p = add("tune-agc", cmd_tune_agc, "Búsqueda en grilla de ganancias AGC")
    p.add_argument("--kp", type=_float_list, required=True, help="Lista separada por comas")
    p.add_argument("--ki", type=_float_list, required=True, help="Lista separada por comas")

    p = add("sweep", cmd_sweep, "Tiempo de asentamiento en función de ΔT")
    p.add_argument("--values", type=_float_list, required=True, help="Valores de ΔT separados por comas")
    p.add_argument("--jobs", type=int, default=1, help="Corridas en paralelo")

    return parser


def cli_main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else 0

    logger = setup_logging()
    try:
        return args.func(args)
    except (FrecuenciaError, OSError) as e:
        logger.error(f"{args.command}: {e}")
        print(f"ERROR: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(cli_main())
