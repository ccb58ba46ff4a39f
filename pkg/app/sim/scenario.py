"""
Configuración validada de un escenario (lo que devuelve parse_scenario).
"""

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple, Union

from app.control.distributed import InnovationMode
from app.errors import ConfigError
from app.grid.graph import CommGraph, build_graph
from app.grid.plant import AreaParams, PlantModel, ResourceParams
from app.sim.loads import LoadProfile


@dataclass(frozen=True)
class GraphSpec:
    kind: str = "ring"
    k: int = 2
    edges: Tuple[Tuple[int, int], ...] = ()

    def build(self, n: int) -> CommGraph:
        return build_graph(self.kind, n, self.k, self.edges)


@dataclass(frozen=True)
class DistributedSpec:
    beta: float
    innovation_mode: InnovationMode = InnovationMode.FREQUENCY_ESTIMATED
    kind: str = field(default="distributed", init=False)

    def __post_init__(self) -> None:
        if not self.beta > 0:
            raise ConfigError(f"beta must be > 0 (valor: {self.beta})", field="controller.beta")


@dataclass(frozen=True)
class AgcSpec:
    kp: float
    ki: float
    participation: str = "uniform"  # "uniform" | "cost"
    kind: str = field(default="agc", init=False)

    def __post_init__(self) -> None:
        if self.kp < 0 or self.ki < 0:
            raise ConfigError(f"kp and ki must be >= 0 (kp={self.kp}, ki={self.ki})", field="controller")
        if self.participation not in ("uniform", "cost"):
            raise ConfigError(f"participation must be 'uniform' or 'cost' (valor: {self.participation!r})",
                              field="controller.participation")


ControllerSpec = Union[DistributedSpec, AgcSpec]


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    areas: Tuple[AreaParams, ...]
    resources: Tuple[Tuple[ResourceParams, ...], ...]
    graphs: Tuple[GraphSpec, ...]
    controller: ControllerSpec
    slot_len: float
    horizon: float
    loads: Tuple[LoadProfile, ...]
    seed: int = 0
    inner_step: Optional[float] = None
    settling_band: float = 5e-4
    ideal_resources: bool = False
    enforce_ramping: bool = False

    def __post_init__(self) -> None:
        m = len(self.areas)
        if not (len(self.resources) == len(self.graphs) == len(self.loads) == m):
            raise ConfigError(
                f"cada área necesita recursos, grafo y carga ({m} áreas, {len(self.resources)} recursos, "
                f"{len(self.graphs)} grafos, {len(self.loads)} cargas)",
                field="areas",
            )
        if not self.slot_len > 0:
            raise ConfigError(f"slot_len must be > 0 (valor: {self.slot_len})", field="scenario.slot_len")
        if not self.horizon > 0:
            raise ConfigError(f"horizon must be > 0 (valor: {self.horizon})", field="scenario.horizon")
        n_slots = round(self.horizon / self.slot_len)
        if abs(n_slots * self.slot_len - self.horizon) > 1e-9 * self.horizon:
            raise ConfigError(
                f"horizon must be a multiple of slot_len (horizon={self.horizon}, slot_len={self.slot_len})",
                field="scenario.horizon",
            )
        if not self.settling_band > 0:
            raise ConfigError(f"settling_band must be > 0 (valor: {self.settling_band})",
                              field="scenario.settling_band")
        for j, load in enumerate(self.loads):
            if load.bounded and load.period < self.slot_len - 1e-9:
                raise ConfigError(
                    f"load.period must be >= slot_len en el área {j} (period={load.period}, slot_len={self.slot_len})",
                    field="load.period",
                )
        # valida la construcción de cada grafo y el modelo de planta
        for j, spec in enumerate(self.graphs):
            spec.build(len(self.resources[j]))
        self.plant()

    @property
    def n_slots(self) -> int:
        return int(round(self.horizon / self.slot_len))

    @property
    def is_distributed(self) -> bool:
        return self.controller.kind == "distributed"

    def plant(self) -> PlantModel:
        return PlantModel(areas=self.areas, resources=self.resources, ideal=self.ideal_resources)

    def graph(self, j: int) -> CommGraph:
        return self.graphs[j].build(len(self.resources[j]))

    def with_slot_len(self, slot_len: float) -> "ScenarioConfig":
        """Copia con otro ΔT; el horizonte se redondea hacia arriba a un múltiplo."""
        horizon = math.ceil(self.horizon / slot_len - 1e-9) * slot_len
        return replace(self, slot_len=slot_len, horizon=horizon, inner_step=None)

    def with_controller(self, controller: ControllerSpec) -> "ScenarioConfig":
        return replace(self, controller=controller)
