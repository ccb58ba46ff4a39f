"""
Modelo de planta: ecuación de oscilación por área + gobernador/turbina de
segundo orden por recurso, e integración numérica entre actualizaciones
de control.

Contenido:
  - ResourceParams, TieCoupling, AreaParams   parámetros físicos y de costo
  - PlantModel                                 vista vectorizada de un escenario
  - SystemState                                estado completo en un instante
  - plant_derivatives                          lado derecho de las EDO
  - integrate_slot                             RK4 de paso fijo sobre un slot
  - integrate_slot_averaged                    ídem, con el promedio temporal del estado
  - ideal_resource_mode                        modo algebraico ΔP_m = ΔP_g = u

Unidades: Δf en Hz, potencias en pu sobre la base común, D en pu/Hz.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Tuple

import numpy as np

from app.errors import ConfigError, DimensionError, IntegrationBlowupError

logger = logging.getLogger("frecuenciaok")

DEFAULT_MAX_INNER_STEP = 0.01  # s


# ------------------------------------------------------------------------------
# Parámetros
# ------------------------------------------------------------------------------

@dataclass(frozen=True)
class ResourceParams:
    """Costo a·P² + b·P + c, droop R y constantes de tiempo de un recurso."""
    a: float
    b: float = 0.0
    c: float = 0.0
    droop_R: float = 2.5
    T_g: float = 0.05
    T_t: float = 0.4
    ramp_r: float = 1.0

    def __post_init__(self) -> None:
        checks = [
            ("a", self.a > 0, "a must be > 0"),
            ("droop_R", self.droop_R > 0, "droop_R must be > 0"),
            ("T_g", self.T_g >= 0, "T_g must be >= 0"),
            ("T_t", self.T_t >= 0, "T_t must be >= 0"),
            ("ramp_r", self.ramp_r > 0, "ramp_r must be > 0"),
        ]
        for name, ok, msg in checks:
            if not ok:
                raise ConfigError(f"{msg} (valor: {getattr(self, name)})", field=name)
        for name in ("a", "b", "c", "droop_R", "T_g", "T_t", "ramp_r"):
            if not np.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite", field=name)


@dataclass(frozen=True)
class TieCoupling:
    neighbor: int
    coefficient: float  # pu/(Hz·s)


@dataclass(frozen=True)
class AreaParams:
    inertia_H: float
    damping_D: float
    tie_couplings: Tuple[TieCoupling, ...] = ()

    def __post_init__(self) -> None:
        if not self.inertia_H > 0:
            raise ConfigError(f"inertia_H must be > 0 (valor: {self.inertia_H})", field="inertia_H")
        if not self.damping_D >= 0:
            raise ConfigError(f"damping_D must be >= 0 (valor: {self.damping_D})", field="damping_D")
        for tie in self.tie_couplings:
            if not tie.coefficient > 0:
                raise ConfigError(
                    f"tie coefficient must be > 0 (vecino {tie.neighbor}: {tie.coefficient})",
                    field="tie_couplings",
                )


# ------------------------------------------------------------------------------
# Vista vectorizada del escenario
# ------------------------------------------------------------------------------

@dataclass(frozen=True)
class PlantModel:
    """
    Áreas y recursos aplanados en arreglos numpy.

    Los recursos se guardan en orden de área: primero los del área 0, luego
    los del área 1, etc.; `area_of[i]` da el área del recurso i. Las líneas
    de enlace se guardan una vez por par (j < k) con flujo positivo de j a k.
    """
    areas: Tuple[AreaParams, ...]
    resources: Tuple[Tuple[ResourceParams, ...], ...]
    ideal: bool = False

    H: np.ndarray = field(init=False, repr=False)
    D: np.ndarray = field(init=False, repr=False)
    area_of: np.ndarray = field(init=False, repr=False)
    a: np.ndarray = field(init=False, repr=False)
    R: np.ndarray = field(init=False, repr=False)
    T_g: np.ndarray = field(init=False, repr=False)
    T_t: np.ndarray = field(init=False, repr=False)
    ramp_r: np.ndarray = field(init=False, repr=False)
    pairs: np.ndarray = field(init=False, repr=False)
    pair_T: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if not self.areas:
            raise ConfigError("al menos un área es obligatoria", field="areas")
        if len(self.resources) != len(self.areas):
            raise DimensionError(
                f"{len(self.resources)} listas de recursos para {len(self.areas)} áreas"
            )
        for j, group in enumerate(self.resources):
            if not group:
                raise ConfigError(f"el área {j} no tiene recursos", field="resources")

        flat = [r for group in self.resources for r in group]
        b_values = {r.b for r in flat}
        if len(b_values) > 1:
            raise ConfigError(
                f"all b must be equal across resources (valores: {sorted(b_values)})", field="b"
            )

        pairs, coeffs = _tie_pairs(self.areas)

        set_ = object.__setattr__
        set_(self, "H", np.array([ar.inertia_H for ar in self.areas], dtype=float))
        set_(self, "D", np.array([ar.damping_D for ar in self.areas], dtype=float))
        set_(self, "area_of", np.array(
            [j for j, group in enumerate(self.resources) for _ in group], dtype=int))
        set_(self, "a", np.array([r.a for r in flat], dtype=float))
        set_(self, "R", np.array([r.droop_R for r in flat], dtype=float))
        set_(self, "T_g", np.array([r.T_g for r in flat], dtype=float))
        set_(self, "T_t", np.array([r.T_t for r in flat], dtype=float))
        set_(self, "ramp_r", np.array([r.ramp_r for r in flat], dtype=float))
        set_(self, "pairs", pairs)
        set_(self, "pair_T", coeffs)

    @property
    def n_areas(self) -> int:
        return len(self.areas)

    @property
    def n_resources(self) -> int:
        return int(self.a.size)

    def area_slice(self, j: int) -> slice:
        """Rango de índices de recursos del área j."""
        start = sum(len(g) for g in self.resources[:j])
        return slice(start, start + len(self.resources[j]))

    def area_sum(self, per_resource: np.ndarray) -> np.ndarray:
        """Suma por área de un vector por recurso."""
        return np.bincount(self.area_of, weights=per_resource, minlength=self.n_areas)

    def net_tie_flow(self, line_flow: np.ndarray) -> np.ndarray:
        """ΔP_tie,j: flujo neto saliente de cada área a partir de los flujos por par."""
        net = np.zeros(self.n_areas)
        if self.pairs.size:
            np.add.at(net, self.pairs[:, 0], line_flow)
            np.add.at(net, self.pairs[:, 1], -line_flow)
        return net


def _tie_pairs(areas: Sequence[AreaParams]) -> Tuple[np.ndarray, np.ndarray]:
    """Pares (j, k) con j < k y su coeficiente; exige simetría entre áreas."""
    n = len(areas)
    declared = {}
    for j, area in enumerate(areas):
        for tie in area.tie_couplings:
            k = tie.neighbor
            if not 0 <= k < n or k == j:
                raise ConfigError(f"vecino de enlace inválido {k} en el área {j}", field="tie_couplings")
            if (j, k) in declared:
                raise ConfigError(f"enlace duplicado {j}-{k}", field="tie_couplings")
            declared[(j, k)] = tie.coefficient

    pairs, coeffs = [], []
    for (j, k), coef in sorted(declared.items()):
        back = declared.get((k, j))
        if back is None or back != coef:
            raise ConfigError(
                f"synchronizing coefficients must be symmetric ({j}->{k}: {coef}, {k}->{j}: {back})",
                field="tie_couplings",
            )
        if j < k:
            pairs.append((j, k))
            coeffs.append(coef)
    return np.array(pairs, dtype=int).reshape(-1, 2), np.array(coeffs, dtype=float)


# ------------------------------------------------------------------------------
# Estado
# ------------------------------------------------------------------------------

@dataclass(frozen=True)
class SystemState:
    freq_dev: np.ndarray        # Hz, por área
    mech_power: np.ndarray      # pu, por recurso
    valve_pos: np.ndarray       # pu, por recurso
    marginal_price: np.ndarray  # por recurso
    control: np.ndarray         # pu, por recurso
    line_flow: np.ndarray       # pu, por par de áreas (j < k)

    @classmethod
    def zeros(cls, plant: PlantModel) -> "SystemState":
        n, m = plant.n_resources, plant.n_areas
        return cls(
            freq_dev=np.zeros(m),
            mech_power=np.zeros(n),
            valve_pos=np.zeros(n),
            marginal_price=np.zeros(n),
            control=np.zeros(n),
            line_flow=np.zeros(len(plant.pairs)),
        )

    def tie_flow(self, plant: PlantModel) -> np.ndarray:
        return plant.net_tie_flow(self.line_flow)

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(v)) for v in (
            self.freq_dev, self.mech_power, self.valve_pos,
            self.marginal_price, self.control, self.line_flow,
        ))

    def check_dimensions(self, plant: PlantModel) -> None:
        expected = {
            "freq_dev": plant.n_areas,
            "mech_power": plant.n_resources,
            "valve_pos": plant.n_resources,
            "marginal_price": plant.n_resources,
            "control": plant.n_resources,
            "line_flow": len(plant.pairs),
        }
        for name, size in expected.items():
            got = getattr(self, name).shape
            if got != (size,):
                raise DimensionError(f"{name}: forma {got}, se esperaba ({size},)")


@dataclass(frozen=True)
class StateDerivative:
    d_freq: np.ndarray
    d_mech: np.ndarray
    d_valve: np.ndarray
    d_line: np.ndarray


# ------------------------------------------------------------------------------
# Dinámica
# ------------------------------------------------------------------------------

def _rhs(plant: PlantModel, f, pm, pg, line, load_dev, controls):
    tie = plant.net_tie_flow(line)
    d_f = (-plant.D * f + plant.area_sum(pm) - load_dev - tie) / (2.0 * plant.H)
    if plant.ideal:
        d_pm = np.zeros_like(pm)
        d_pg = np.zeros_like(pg)
    else:
        f_res = f[plant.area_of]
        d_pm = -(pm - pg) / plant.T_t
        d_pg = -f_res / (plant.T_g * plant.R) - (pg - controls) / plant.T_g
    if plant.pairs.size:
        d_line = plant.pair_T * (f[plant.pairs[:, 0]] - f[plant.pairs[:, 1]])
    else:
        d_line = np.zeros(0)
    return d_f, d_pm, d_pg, d_line


def _check_inputs(plant: PlantModel, load_dev, controls) -> Tuple[np.ndarray, np.ndarray]:
    load_dev = np.asarray(load_dev, dtype=float).reshape(-1)
    controls = np.asarray(controls, dtype=float).reshape(-1)
    if load_dev.shape != (plant.n_areas,):
        raise DimensionError(f"load_dev debe tener {plant.n_areas} valores (uno por área)")
    if controls.shape != (plant.n_resources,):
        raise DimensionError(f"controls debe tener {plant.n_resources} valores (uno por recurso)")
    if not plant.ideal and (np.any(plant.T_g <= 0) or np.any(plant.T_t <= 0)):
        raise ConfigError(
            "T_g and T_t must be > 0 unless the scenario uses ideal_resources",
            field="T_g",
        )
    return load_dev, controls


def plant_derivatives(state: SystemState, plant: PlantModel, load_dev, controls) -> StateDerivative:
    """Evalúa las derivadas del estado con carga y controles dados."""
    load_dev, controls = _check_inputs(plant, load_dev, controls)
    state.check_dimensions(plant)
    d_f, d_pm, d_pg, d_line = _rhs(
        plant, state.freq_dev, state.mech_power, state.valve_pos, state.line_flow, load_dev, controls
    )
    return StateDerivative(d_freq=d_f, d_mech=d_pm, d_valve=d_pg, d_line=d_line)


def ideal_resource_mode(state: SystemState, controls) -> SystemState:
    """Recursos sin dinámica: ΔP_m = ΔP_g = u exactamente."""
    u = np.array(controls, dtype=float).reshape(-1)
    return replace(state, mech_power=u.copy(), valve_pos=u.copy(), control=u.copy())


def default_inner_step(slot_len: float) -> float:
    return min(DEFAULT_MAX_INNER_STEP, slot_len / 10.0)


def _steps_per_slot(slot_len: float, inner_step: float) -> int:
    if not (inner_step > 0 and inner_step <= slot_len * (1 + 1e-12)):
        raise ConfigError(
            f"inner_step must satisfy 0 < inner_step <= slot_len (inner_step={inner_step}, slot_len={slot_len})",
            field="inner_step",
        )
    n_steps = int(round(slot_len / inner_step))
    if abs(n_steps * inner_step - slot_len) > 1e-9 * slot_len:
        raise ConfigError(
            f"slot_len must be an integer multiple of inner_step (slot_len={slot_len}, inner_step={inner_step})",
            field="inner_step",
        )
    return n_steps


def _rk4_slot(
    state: SystemState,
    plant: PlantModel,
    load_dev,
    controls,
    slot_len: float,
    inner_step: Optional[float],
    slot: int,
) -> Tuple[SystemState, SystemState]:
    load_dev, controls = _check_inputs(plant, load_dev, controls)
    state.check_dimensions(plant)
    if inner_step is None:
        inner_step = default_inner_step(slot_len)
    n_steps = _steps_per_slot(slot_len, inner_step)
    h = slot_len / n_steps

    if plant.ideal:
        state = ideal_resource_mode(state, controls)
    else:
        state = replace(state, control=controls.copy())

    m, n = plant.n_areas, plant.n_resources
    cuts = np.cumsum([m, n, n])

    def fn(x: np.ndarray) -> np.ndarray:
        f, pm, pg, line = np.split(x, cuts)
        return np.concatenate(_rhs(plant, f, pm, pg, line, load_dev, controls))

    x = np.concatenate([state.freq_dev, state.mech_power, state.valve_pos, state.line_flow])
    # integral del estado con los mismos puntos de etapa que avanzan a x
    acc = np.zeros_like(x)
    for _ in range(n_steps):
        k1 = fn(x)
        x2 = x + h * k1 / 2
        k2 = fn(x2)
        x3 = x + h * k2 / 2
        k3 = fn(x3)
        x4 = x + h * k3
        k4 = fn(x4)
        acc += h / 6 * (x + 2 * x2 + 2 * x3 + x4)
        x = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(x)):
            logger.error(f"Integración no finita en el slot {slot}")
            raise IntegrationBlowupError(slot, "valores no finitos en el estado")

    f, pm, pg, line = np.split(x, cuts)
    end = replace(state, freq_dev=f, mech_power=pm, valve_pos=pg, line_flow=line)
    f, pm, pg, line = np.split(acc / slot_len, cuts)
    mean = replace(state, freq_dev=f, mech_power=pm, valve_pos=pg, line_flow=line)
    return end, mean


def integrate_slot(
    state: SystemState,
    plant: PlantModel,
    load_dev,
    controls,
    slot_len: float,
    inner_step: Optional[float] = None,
    slot: int = 0,
) -> SystemState:
    """
    Avanza el estado un slot ΔT con RK4 clásico de paso fijo.

    Carga y controles se mantienen constantes durante el slot. Mismas
    entradas producen exactamente la misma salida (sin paso adaptativo).
    """
    end, _ = _rk4_slot(state, plant, load_dev, controls, slot_len, inner_step, slot)
    return end


def integrate_slot_averaged(
    state: SystemState,
    plant: PlantModel,
    load_dev,
    controls,
    slot_len: float,
    inner_step: Optional[float] = None,
    slot: int = 0,
) -> Tuple[SystemState, SystemState]:
    """
    Como integrate_slot, devolviendo además el promedio temporal del estado
    sobre el intervalo.

    El promedio usa las mismas etapas RK4 que el avance, así que cumple la
    ecuación de oscilación promediada a precisión de máquina:
    2H·(Δf_fin − Δf_ini)/ΔT = ΣΔP_m − ΔP_L − D·Δf − ΔP_tie (promedios).
    """
    return _rk4_slot(state, plant, load_dev, controls, slot_len, inner_step, slot)
