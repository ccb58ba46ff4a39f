"""
Lectura de archivos de escenario (.cfg en formato TOML).

El archivo se decodifica con tomllib y se valida con modelos pydantic
(claves desconocidas rechazadas). Todo error se reporta como ConfigError
con el campo y, cuando se puede ubicar, la línea del archivo.

Formato completo: docs/FORMATO_ESCENARIO.md
"""

import logging
import re
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt, ValidationError, model_validator

from app.control.distributed import InnovationMode
from app.errors import ConfigError
from app.grid.plant import AreaParams, ResourceParams, TieCoupling
from app.sim.loads import LOAD_KINDS, LoadProfile
from app.sim.scenario import AgcSpec, DistributedSpec, GraphSpec, ScenarioConfig

logger = logging.getLogger("frecuenciaok")

Range = Tuple[float, float]


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ScenarioSection(_Section):
    name: str = "escenario"
    slot_len: PositiveFloat
    horizon: PositiveFloat
    inner_step: Optional[PositiveFloat] = None
    seed: int = 0
    settling_band: Optional[PositiveFloat] = None
    ideal_resources: bool = False
    enforce_ramping: bool = False


class ControllerSection(_Section):
    kind: Literal["distributed", "agc"]
    beta: Optional[PositiveFloat] = None
    innovation_mode: Literal["oracle-load", "frequency-estimated"] = "frequency-estimated"
    kp: Optional[float] = Field(default=None, ge=0)
    ki: Optional[float] = Field(default=None, ge=0)
    participation: Literal["uniform", "cost"] = "uniform"

    @model_validator(mode="after")
    def _required_by_kind(self):
        if self.kind == "distributed" and self.beta is None:
            raise ValueError("beta es obligatorio para kind = 'distributed'")
        if self.kind == "agc" and (self.kp is None or self.ki is None):
            raise ValueError("kp y ki son obligatorios para kind = 'agc'")
        return self


class GraphSection(_Section):
    kind: Literal["ring", "complete", "k-neighbor-ring", "edges"] = "ring"
    k: int = 2
    edges: List[Tuple[int, int]] = []


class LoadSection(_Section):
    kind: str = "step"
    magnitude: float = 0.0
    start: float = 0.0
    period: float = 4.0
    epsilon: float = 0.0
    seed: Optional[int] = None
    path: Optional[str] = None


class ResourceSection(_Section):
    a: float
    b: float = 0.0
    c: float = 0.0
    R: float = 2.5
    T_g: float = 0.05
    T_t: float = 0.4
    ramp_r: float = 1.0


class RandomResourcesSection(_Section):
    count: PositiveInt
    a: Optional[List[float]] = None
    a_range: Range = (0.2, 1.0)
    R_range: Range = (2.0, 3.0)
    T_g_range: Range = (0.05, 0.06)
    T_t_range: Range = (0.3, 0.5)
    ramp_r: float = 1.0

    @model_validator(mode="after")
    def _coherent(self):
        if self.a is not None and len(self.a) != self.count:
            raise ValueError(f"a tiene {len(self.a)} valores para count = {self.count}")
        for name in ("a_range", "R_range", "T_g_range", "T_t_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name}: el mínimo supera al máximo ({lo} > {hi})")
        return self


class AreaSection(_Section):
    inertia_H: float
    damping_D: float
    graph: GraphSection = GraphSection()
    load: LoadSection = LoadSection()
    resources: Optional[List[ResourceSection]] = None
    random_resources: Optional[RandomResourcesSection] = None

    @model_validator(mode="after")
    def _one_resource_source(self):
        if (self.resources is None) == (self.random_resources is None):
            raise ValueError("cada área necesita exactamente uno de [[areas.resources]] o [areas.random_resources]")
        if self.resources is not None and not self.resources:
            raise ValueError("el área no tiene recursos")
        return self


class TieSection(_Section):
    area_a: int = Field(ge=0)
    area_b: int = Field(ge=0)
    coefficient: PositiveFloat


class ScenarioFile(_Section):
    scenario: ScenarioSection
    controller: ControllerSection
    areas: List[AreaSection] = Field(min_length=1)
    ties: List[TieSection] = []


# ------------------------------------------------------------------------------
# Ubicación de errores en el archivo
# ------------------------------------------------------------------------------

def locate_line(text: str, loc: Sequence) -> Optional[int]:
    """
    Línea (1-based) donde aparece la clave indicada por `loc`, el camino de
    pydantic (p. ej. ('areas', 1, 'resources', 0, 'a')). None si no se ubica.
    """
    lines = text.splitlines()
    pos = 0
    found: Optional[int] = None
    parts = list(loc)
    for idx, part in enumerate(parts):
        if not isinstance(part, str):
            continue
        nxt = parts[idx + 1] if idx + 1 < len(parts) else None
        if isinstance(nxt, int):
            header = re.compile(rf"^\s*\[\[\s*(?:[\w.]+\.)?{re.escape(part)}\s*\]\]")
            hits = [i for i in range(pos, len(lines)) if header.match(lines[i])]
            if len(hits) > nxt:
                pos = hits[nxt]
                found = pos + 1
            continue
        key = re.compile(rf"^\s*(?:\[\s*(?:[\w.]+\.)?{re.escape(part)}\s*\]|{re.escape(part)}\s*=)")
        for i in range(pos, len(lines)):
            if key.match(lines[i]):
                pos = i
                found = i + 1
                break
    return found


def _config_error(exc: ConfigError, text: str, loc: Sequence) -> ConfigError:
    if exc.line is not None:
        return exc
    dotted = ".".join(str(p) for p in loc)
    field = f"{dotted}.{exc.field}" if exc.field else dotted
    line = locate_line(text, list(loc) + ([exc.field] if exc.field else []))
    return ConfigError(str(exc), field=field, line=line)


# ------------------------------------------------------------------------------
# Construcción del ScenarioConfig
# ------------------------------------------------------------------------------

def _derived_seed(seed: int, *keys: int) -> int:
    return int(np.random.SeedSequence([seed, *keys]).generate_state(1)[0])


def _draw_resources(spec: RandomResourcesSection, seed: int, area: int) -> Tuple[ResourceParams, ...]:
    rng = np.random.default_rng([seed, area])
    a = np.array(spec.a, dtype=float) if spec.a is not None else rng.uniform(*spec.a_range, size=spec.count)
    R = rng.uniform(*spec.R_range, size=spec.count)
    T_g = rng.uniform(*spec.T_g_range, size=spec.count)
    T_t = rng.uniform(*spec.T_t_range, size=spec.count)
    return tuple(
        ResourceParams(a=float(a[i]), droop_R=float(R[i]), T_g=float(T_g[i]), T_t=float(T_t[i]), ramp_r=spec.ramp_r)
        for i in range(spec.count)
    )


def _resolve(path: Optional[str], base: Path) -> Optional[str]:
    if path is None:
        return None
    p = Path(path)
    return str(p if p.is_absolute() else base / p)


def build_config(doc: ScenarioFile, text: str = "", base_dir: Path = Path("."),
                 seed_override: Optional[int] = None) -> ScenarioConfig:
    seed = doc.scenario.seed if seed_override is None else seed_override
    m = len(doc.areas)

    couplings: List[List[TieCoupling]] = [[] for _ in range(m)]
    for t, tie in enumerate(doc.ties):
        for end in (tie.area_a, tie.area_b):
            if end >= m:
                raise ConfigError(f"tie hacia un área inexistente ({end}; hay {m} áreas)",
                                  field=f"ties.{t}", line=locate_line(text, ("ties", t)))
        if tie.area_a == tie.area_b:
            raise ConfigError("un tie no puede unir un área consigo misma",
                              field=f"ties.{t}", line=locate_line(text, ("ties", t)))
        couplings[tie.area_a].append(TieCoupling(neighbor=tie.area_b, coefficient=tie.coefficient))
        couplings[tie.area_b].append(TieCoupling(neighbor=tie.area_a, coefficient=tie.coefficient))

    areas, resources, graphs, loads = [], [], [], []
    for j, sec in enumerate(doc.areas):
        try:
            areas.append(AreaParams(sec.inertia_H, sec.damping_D, tuple(couplings[j])))
        except ConfigError as e:
            raise _config_error(e, text, ("areas", j))

        if sec.resources is not None:
            group = []
            for i, r in enumerate(sec.resources):
                try:
                    group.append(ResourceParams(a=r.a, b=r.b, c=r.c, droop_R=r.R, T_g=r.T_g, T_t=r.T_t,
                                                ramp_r=r.ramp_r))
                except ConfigError as e:
                    key = "R" if e.field == "droop_R" else e.field
                    raise _config_error(ConfigError(str(e), field=key), text, ("areas", j, "resources", i))
            resources.append(tuple(group))
        else:
            try:
                resources.append(_draw_resources(sec.random_resources, seed, j))
            except ConfigError as e:
                raise _config_error(e, text, ("areas", j, "random_resources"))

        graphs.append(GraphSpec(kind=sec.graph.kind, k=sec.graph.k,
                                edges=tuple(tuple(e) for e in sec.graph.edges)))

        ld = sec.load
        if ld.kind not in LOAD_KINDS:
            raise ConfigError(f"load kind desconocido: {ld.kind!r} (válidos: {', '.join(LOAD_KINDS)})",
                              field=f"areas.{j}.load.kind", line=locate_line(text, ("areas", j, "load", "kind")))
        load_seed = ld.seed if ld.seed is not None and seed_override is None else _derived_seed(seed, j)
        try:
            loads.append(LoadProfile(kind=ld.kind, magnitude=ld.magnitude, start=ld.start, period=ld.period,
                                     epsilon=ld.epsilon, seed=load_seed, path=_resolve(ld.path, base_dir)))
        except ConfigError as e:
            raise _config_error(ConfigError(str(e), field=(e.field or "").removeprefix("load.") or None),
                                text, ("areas", j, "load"))

    ctrl = doc.controller
    if ctrl.kind == "distributed":
        controller = DistributedSpec(beta=ctrl.beta, innovation_mode=InnovationMode(ctrl.innovation_mode))
    else:
        controller = AgcSpec(kp=ctrl.kp, ki=ctrl.ki, participation=ctrl.participation)

    sc = doc.scenario
    try:
        return ScenarioConfig(
            name=sc.name,
            areas=tuple(areas),
            resources=tuple(resources),
            graphs=tuple(graphs),
            controller=controller,
            slot_len=sc.slot_len,
            horizon=sc.horizon,
            loads=tuple(loads),
            seed=seed,
            inner_step=sc.inner_step,
            settling_band=sc.settling_band if sc.settling_band is not None else 5e-4,
            ideal_resources=sc.ideal_resources,
            enforce_ramping=sc.enforce_ramping,
        )
    except ConfigError as e:
        loc = tuple((e.field or "scenario").split("."))
        raise ConfigError(str(e), field=e.field, line=locate_line(text, loc))


def parse_scenario_text(text: str, base_dir: Path = Path("."), seed_override: Optional[int] = None,
                        default_band: Optional[float] = None) -> ScenarioConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"TOML inválido: {e}", line=getattr(e, "lineno", None))
    try:
        doc = ScenarioFile.model_validate(raw)
    except ValidationError as e:
        err = e.errors()[0]
        loc = tuple(err["loc"])
        dotted = ".".join(str(p) for p in loc)
        raise ConfigError(f"{dotted}: {err['msg']}", field=dotted, line=locate_line(text, loc))
    if default_band is not None and doc.scenario.settling_band is None:
        doc = doc.model_copy(update={"scenario": doc.scenario.model_copy(update={"settling_band": default_band})})
    return build_config(doc, text, base_dir, seed_override)


def parse_scenario(path, seed_override: Optional[int] = None, default_band: Optional[float] = None) -> ScenarioConfig:
    """Lee y valida un archivo de escenario. Rutas relativas se resuelven contra su carpeta."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"no se pudo leer {path}: {e}", field="config")
    config = parse_scenario_text(text, path.parent, seed_override, default_band)
    logger.info(f"Escenario '{config.name}' leído desde {path}")
    return config
