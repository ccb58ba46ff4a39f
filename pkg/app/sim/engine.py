"""
Motor de simulación: secuencia por slot

  1) se aplica el cambio de carga,
  2) se forma la innovación (exacta o estimada con las dos últimas
     mediciones de frecuencia en borde de slot),
  3) cada controlador calcula u(t+1),
  4) se integra la planta durante ΔT con u y ΔP_L constantes.

Además: métricas (asentamiento, nadir, brecha de despacho), comparación
de controladores, barrido de ΔT y búsqueda de ganancias AGC.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.analytics.dispatch import dispatch_gap
from app.control.agc import (
    AgcControllerState,
    agc_step,
    area_control_error,
    frequency_bias,
    participation_factors,
    uniform_participation,
)
from app.control.distributed import (
    DistributedControllerState,
    InnovationMode,
    consensus_innovation_step,
    estimate_innovation,
)
from app.errors import ConfigError
from app.grid.graph import check_condition
from app.grid.plant import SystemState, default_inner_step, integrate_slot_averaged
from app.sim.scenario import ScenarioConfig

logger = logging.getLogger("frecuenciaok")

RECORD_STEP = 0.04  # s, paso de registro dentro del slot


# ------------------------------------------------------------------------------
# Traza
# ------------------------------------------------------------------------------

@dataclass
class SimTrace:
    """
    Registro temporal de una corrida. Filas = instantes; las columnas por
    recurso siguen el orden de PlantModel (área 0 primero).
    """
    times: np.ndarray           # (T,)
    slot: np.ndarray            # (T,) índice de slot vigente
    freq_dev: np.ndarray        # (T, áreas)
    load: np.ndarray            # (T, áreas)
    tie_flow: np.ndarray        # (T, áreas)
    mech_power: np.ndarray      # (T, recursos)
    valve_pos: np.ndarray       # (T, recursos)
    control: np.ndarray         # (T, recursos)
    marginal_price: np.ndarray  # (T, recursos)
    area_of: np.ndarray         # (recursos,)
    slot_len: float = 0.0
    warnings: List[str] = field(default_factory=list)

    @property
    def n_areas(self) -> int:
        return self.freq_dev.shape[1]

    @property
    def n_resources(self) -> int:
        return self.mech_power.shape[1]

    def __len__(self) -> int:
        return int(self.times.size)

    def boundary_rows(self) -> np.ndarray:
        """Índice de la primera fila de cada slot (instante de actualización)."""
        if not len(self):
            return np.zeros(0, dtype=int)
        first = np.ones(len(self), dtype=bool)
        first[1:] = self.slot[1:] != self.slot[:-1]
        return np.flatnonzero(first)

    def last_load_change(self) -> float:
        if len(self) < 2:
            return 0.0
        changed = np.any(self.load[1:] != self.load[:-1], axis=1)
        idx = np.flatnonzero(changed)
        return float(self.times[idx[-1] + 1]) if idx.size else 0.0

    def aligned_freq(self, other: "SimTrace") -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Frecuencias de ambas trazas interpoladas sobre la unión de instantes."""
        grid = np.union1d(self.times, other.times)
        mine = np.column_stack([np.interp(grid, self.times, self.freq_dev[:, j]) for j in range(self.n_areas)])
        theirs = np.column_stack([np.interp(grid, other.times, other.freq_dev[:, j]) for j in range(other.n_areas)])
        return grid, mine, theirs


class _Recorder:
    def __init__(self):
        self.rows: Dict[str, list] = {k: [] for k in (
            "times", "slot", "freq_dev", "load", "tie_flow",
            "mech_power", "valve_pos", "control", "marginal_price",
        )}

    def add(self, t: float, slot: int, state: SystemState, tie: np.ndarray, load: np.ndarray) -> None:
        r = self.rows
        r["times"].append(t)
        r["slot"].append(slot)
        r["freq_dev"].append(state.freq_dev.copy())
        r["load"].append(np.asarray(load, dtype=float).copy())
        r["tie_flow"].append(tie.copy())
        r["mech_power"].append(state.mech_power.copy())
        r["valve_pos"].append(state.valve_pos.copy())
        r["control"].append(state.control.copy())
        r["marginal_price"].append(state.marginal_price.copy())

    def build(self, area_of: np.ndarray, slot_len: float, warnings: List[str]) -> SimTrace:
        arrays = {k: np.array(v) for k, v in self.rows.items()}
        return SimTrace(area_of=area_of, slot_len=slot_len, warnings=warnings, **arrays)


def _record_substeps(slot_len: float, inner_step: float) -> Tuple[int, float, float]:
    """(subintervalos por slot, largo del subintervalo, paso RK4), todos múltiplos exactos."""
    n_steps = int(round(slot_len / inner_step))
    if n_steps < 1 or abs(n_steps * inner_step - slot_len) > 1e-9 * slot_len:
        raise ConfigError(
            f"slot_len must be an integer multiple of inner_step (slot_len={slot_len}, inner_step={inner_step})",
            field="scenario.inner_step",
        )
    h = slot_len / n_steps
    k = max(1, int(math.floor(RECORD_STEP / h + 1e-9)))
    while n_steps % k:
        k -= 1
    return n_steps // k, k * h, h


# ------------------------------------------------------------------------------
# Corrida
# ------------------------------------------------------------------------------

def run_scenario(config: ScenarioConfig) -> SimTrace:
    """Corre el escenario completo (una o varias áreas) y devuelve la traza."""
    plant = config.plant()
    dt = config.slot_len
    inner = config.inner_step if config.inner_step is not None else default_inner_step(dt)
    n_sub, sub_len, h = _record_substeps(dt, inner)
    n_slots = config.n_slots
    m = plant.n_areas
    slices = [plant.area_slice(j) for j in range(m)]
    warnings: List[str] = []

    loads = np.column_stack([profile.series(n_slots, dt) for profile in config.loads]).reshape(n_slots, m)

    dist_ctrls: List[DistributedControllerState] = []
    agc_ctrls: List[AgcControllerState] = []
    biases: List[float] = []
    if config.is_distributed:
        spec = config.controller
        for j in range(m):
            graph = config.graph(j)
            report = check_condition(graph, spec.beta, plant.a[slices[j]])
            if not report.satisfied:
                msg = (f"área {j}: condición de conectividad no satisfecha (gamma={report.gamma:.4g}); "
                       "la cota de costo no aplica")
                logger.warning(msg)
                warnings.append(msg)
            dist_ctrls.append(DistributedControllerState.initial(graph, spec.beta, spec.innovation_mode))
    else:
        spec = config.controller
        for j in range(m):
            group = config.resources[j]
            if spec.participation == "cost":
                alpha = participation_factors([r.a for r in group])
            else:
                alpha = uniform_participation(len(group))
            agc_ctrls.append(AgcControllerState(kp=spec.kp, ki=spec.ki, alpha=alpha))
            biases.append(frequency_bias(config.areas[j], group))

    logger.info(
        f"Escenario '{config.name}': {m} área(s), {plant.n_resources} recursos, "
        f"{n_slots} slots de {dt} s, controlador {config.controller.kind}"
    )

    state = SystemState.zeros(plant)
    freq_prev = state.freq_dev.copy()
    # medición del slot anterior: promedios de ΔP_m y del intercambio neto
    measured_pm = state.mech_power.copy()
    measured_tie = state.tie_flow(plant)
    rec = _Recorder()

    for k in range(n_slots):
        load_k = loads[k]
        freq_now = state.freq_dev.copy()
        tie_now = state.tie_flow(plant)
        u = np.zeros(plant.n_resources)
        prices = np.zeros(plant.n_resources)

        for j, sl in enumerate(slices):
            if config.is_distributed:
                ctrl = dist_ctrls[j].anchored(plant.a[sl], measured_pm[sl])
                if ctrl.innovation_mode == InnovationMode.ORACLE_LOAD:
                    innovation = load_k[j] - measured_pm[sl].sum()
                else:
                    innovation = estimate_innovation(config.areas[j], freq_prev[j], freq_now[j], measured_tie[j], dt)
                u[sl], prices[sl] = consensus_innovation_step(ctrl, plant.a[sl], measured_pm[sl], innovation)
                dist_ctrls[j] = ctrl
            else:
                ace = area_control_error(j, freq_now[j], freq_prev[j], tie_now[j], biases[j])
                u[sl], agc_ctrls[j] = agc_step(agc_ctrls[j], ace, dt)
                prices[sl] = 2.0 * plant.a[sl] * u[sl]

        if config.enforce_ramping:
            clipped = np.clip(u, state.control - plant.ramp_r, state.control + plant.ramp_r)
            if np.any(clipped != u):
                logger.debug(f"Rampa activa en el slot {k}")
            u = clipped
            # el precio registrado corresponde al control aplicado
            prices = 2.0 * plant.a * u

        state = replace(state, marginal_price=prices)
        if plant.ideal:
            state = replace(state, mech_power=u.copy(), valve_pos=u.copy(), control=u.copy())
        else:
            state = replace(state, control=u.copy())

        pm_integral = np.zeros(plant.n_resources)
        line_integral = np.zeros_like(state.line_flow)
        for s in range(n_sub):
            rec.add(k * dt + s * sub_len, k, state, state.tie_flow(plant), load_k)
            state, mean = integrate_slot_averaged(state, plant, load_k, u, sub_len, h, slot=k)
            pm_integral += mean.mech_power * sub_len
            line_integral += mean.line_flow * sub_len
        measured_pm = pm_integral / dt
        measured_tie = plant.net_tie_flow(line_integral / dt)

        freq_prev = freq_now

    if n_slots:
        rec.add(n_slots * dt, n_slots - 1, state, state.tie_flow(plant), loads[-1])
    trace = rec.build(plant.area_of.copy(), dt, warnings)
    logger.info(f"Escenario '{config.name}' terminado: {len(trace)} filas")
    return trace


def run_multi_area(config: ScenarioConfig) -> SimTrace:
    """Igual que run_scenario, exigiendo ≥ 2 áreas con enlaces definidos."""
    if len(config.areas) < 2:
        raise ConfigError(f"multi-area requiere al menos 2 áreas (hay {len(config.areas)})", field="areas")
    if not config.plant().pairs.size:
        raise ConfigError("multi-area requiere enlaces entre áreas", field="ties")
    return run_scenario(config)


# ------------------------------------------------------------------------------
# Métricas
# ------------------------------------------------------------------------------

def settling_time(trace: SimTrace, band: float) -> Optional[float]:
    """
    Primer instante posterior al último cambio de carga desde el cual
    |Δf| ≤ band en todas las áreas hasta el final de la traza; None si nunca.
    """
    if not len(trace):
        raise ConfigError("traza vacía", field="trace")
    t0 = trace.last_load_change()
    after = trace.times >= t0 - 1e-12
    outside = np.any(np.abs(trace.freq_dev) > band, axis=1) & after
    idx = np.flatnonzero(outside)
    if not idx.size:
        return t0
    last = idx[-1]
    if last + 1 >= len(trace):
        return None
    return float(trace.times[last + 1])


def freq_nadir(trace: SimTrace) -> np.ndarray:
    """Mínimo de Δf por área."""
    return trace.freq_dev.min(axis=0)


def max_abs_freq(trace: SimTrace) -> float:
    return float(np.max(np.abs(trace.freq_dev))) if len(trace) else 0.0


@dataclass(frozen=True)
class GapPoint:
    time: float
    area: int
    max_lambda_dev: float
    max_u_dev: float
    relative_error: Optional[float]


def dispatch_gap_series(trace: SimTrace, costs: Sequence[float]) -> List[GapPoint]:
    """Brecha de despacho del control aplicado en cada slot contra el óptimo para la carga del slot."""
    a = np.asarray(costs, dtype=float)
    out = []
    for row in trace.boundary_rows():
        for j in range(trace.n_areas):
            sel = trace.area_of == j
            gap = dispatch_gap(trace.marginal_price[row, sel], trace.control[row, sel], a[sel], trace.load[row, j])
            out.append(GapPoint(float(trace.times[row]), j, gap.max_lambda_dev, gap.max_u_dev, gap.relative_error))
    return out


def balance_residual(trace: SimTrace) -> Dict[str, np.ndarray]:
    """Residuos de equilibrio por área en la última fila: Σu − ΔP_L y ΣΔP_m − ΔP_L."""
    last = -1
    u_sum = np.bincount(trace.area_of, weights=trace.control[last], minlength=trace.n_areas)
    pm_sum = np.bincount(trace.area_of, weights=trace.mech_power[last], minlength=trace.n_areas)
    return {"control": u_sum - trace.load[last], "mech_power": pm_sum - trace.load[last]}


# ------------------------------------------------------------------------------
# Comparaciones y barridos
# ------------------------------------------------------------------------------

@dataclass(frozen=True)
class ControllerSummary:
    label: str
    slot_len: float
    settling_time: Optional[float]
    nadir: Tuple[float, ...]
    max_abs_freq: float
    final_relative_error: Optional[float]


@dataclass
class ComparisonReport:
    traces: Tuple[SimTrace, SimTrace]
    summaries: Tuple[ControllerSummary, ControllerSummary]
    gaps: Tuple[List[GapPoint], List[GapPoint]]


def _costs(config: ScenarioConfig) -> np.ndarray:
    return np.array([r.a for group in config.resources for r in group], dtype=float)


def summarize(config: ScenarioConfig, trace: SimTrace, band: Optional[float] = None,
              label: Optional[str] = None) -> Tuple[ControllerSummary, List[GapPoint]]:
    band = band if band is not None else config.settling_band
    gaps = dispatch_gap_series(trace, _costs(config))
    rel = [g.relative_error for g in gaps if g.relative_error is not None]
    summary = ControllerSummary(
        label=label or f"{config.controller.kind} (ΔT={config.slot_len} s)",
        slot_len=config.slot_len,
        settling_time=settling_time(trace, band),
        nadir=tuple(float(x) for x in freq_nadir(trace)),
        max_abs_freq=max_abs_freq(trace),
        final_relative_error=rel[-1] if rel else None,
    )
    return summary, gaps


def _same_plant(a: ScenarioConfig, b: ScenarioConfig) -> bool:
    return (
        a.areas == b.areas
        and a.resources == b.resources
        and a.loads == b.loads
        and a.ideal_resources == b.ideal_resources
        and math.isclose(a.horizon, b.horizon)
    )


def compare_controllers(config_a: ScenarioConfig, config_b: ScenarioConfig,
                        band: Optional[float] = None) -> ComparisonReport:
    """Corre ambos escenarios (misma planta y carga) y resume cada controlador."""
    if not _same_plant(config_a, config_b):
        raise ConfigError("los escenarios a comparar deben tener la misma planta, carga y horizonte",
                          field="compare")
    trace_a = run_scenario(config_a)
    trace_b = run_scenario(config_b)
    sum_a, gaps_a = summarize(config_a, trace_a, band)
    sum_b, gaps_b = summarize(config_b, trace_b, band)
    return ComparisonReport(traces=(trace_a, trace_b), summaries=(sum_a, sum_b), gaps=(gaps_a, gaps_b))


def _settling_for(args) -> Optional[float]:
    config, band = args
    return settling_time(run_scenario(config), band)


def sweep_slot_len(config: ScenarioConfig, values: Sequence[float], band: Optional[float] = None,
                   jobs: int = 1) -> List[Tuple[float, Optional[float]]]:
    """Tiempo de asentamiento en función de ΔT. Cada corrida es independiente."""
    band = band if band is not None else config.settling_band
    configs = [config.with_slot_len(v) for v in values]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_settling_for, [(c, band) for c in configs]))
    else:
        results = [_settling_for((c, band)) for c in configs]
    return list(zip(values, results))


def tune_agc_gains(config: ScenarioConfig, kp_grid: Sequence[float], ki_grid: Sequence[float],
                   band: Optional[float] = None) -> Tuple[float, float, Optional[float]]:
    """Búsqueda en grilla de (kp, ki) que minimiza el tiempo de asentamiento."""
    if config.is_distributed:
        raise ConfigError("tune-agc requiere un escenario con controller.kind = 'agc'", field="controller.kind")
    band = band if band is not None else config.settling_band
    best: Tuple[float, float, Optional[float]] = (config.controller.kp, config.controller.ki, None)
    best_time = math.inf
    for kp in kp_grid:
        for ki in ki_grid:
            candidate = config.with_controller(replace(config.controller, kp=kp, ki=ki))
            t = settling_time(run_scenario(candidate), band)
            logger.debug(f"AGC kp={kp} ki={ki}: asentamiento {t}")
            if t is not None and t < best_time:
                best_time = t
                best = (kp, ki, t)
    if best[2] is None:
        logger.warning("Ninguna combinación de la grilla AGC asienta dentro del horizonte")
    return best
