"""
Fixtures compartidos de la batería de tests.
"""

import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from app.control.distributed import InnovationMode  # noqa: E402
from app.grid.plant import AreaParams, ResourceParams  # noqa: E402
from app.sim.loads import LoadProfile  # noqa: E402
from app.sim.scenario import AgcSpec, DistributedSpec, GraphSpec, ScenarioConfig  # noqa: E402

CONFIG_DIR = ROOT / "configs"
REFERENCE_COSTS = (0.4, 0.65, 0.45, 0.6, 0.5)


@pytest.fixture
def config_dir() -> Path:
    return CONFIG_DIR


@pytest.fixture
def reference_costs():
    return REFERENCE_COSTS


@pytest.fixture
def area() -> AreaParams:
    return AreaParams(inertia_H=0.0833, damping_D=0.0084)


@pytest.fixture
def resources():
    return tuple(ResourceParams(a=a, droop_R=2.5, T_g=0.055, T_t=0.4) for a in REFERENCE_COSTS)


def make_config(
    costs=REFERENCE_COSTS,
    controller=None,
    load=None,
    slot_len=4.0,
    horizon=40.0,
    graph=GraphSpec(kind="ring"),
    ideal=False,
    enforce_ramping=False,
    ramp_r=1.0,
    H=0.0833,
    D=0.0084,
) -> ScenarioConfig:
    """Escenario de un área armado en código, sin archivo."""
    return ScenarioConfig(
        name="test",
        areas=(AreaParams(inertia_H=H, damping_D=D),),
        resources=(tuple(ResourceParams(a=a, T_g=0.055, T_t=0.4, ramp_r=ramp_r) for a in costs),),
        graphs=(graph,),
        controller=controller or DistributedSpec(beta=0.003, innovation_mode=InnovationMode.FREQUENCY_ESTIMATED),
        slot_len=slot_len,
        horizon=horizon,
        loads=(load or LoadProfile(kind="step", magnitude=0.005),),
        ideal_resources=ideal,
        enforce_ramping=enforce_ramping,
    )


@pytest.fixture
def distributed_config() -> ScenarioConfig:
    return make_config()


@pytest.fixture
def agc_config() -> ScenarioConfig:
    return make_config(controller=AgcSpec(kp=0.05, ki=0.06), slot_len=0.4)
