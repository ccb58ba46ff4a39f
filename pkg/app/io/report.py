"""
Reporte de texto de una corrida o de una comparación de controladores.

Todo número del reporte sale de la traza emitida o de una operación de
análisis sobre el escenario (espectro, cota, rampas); no hay estado propio.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from app.analytics.bounds import CostBound, RampCheckRow, compute_cost_bound, ramp_relaxation_check
from app.analytics.dispatch import dispatch_cost, optimal_dispatch
from app.control.distributed import PiEquivalent, pi_equivalent_gains
from app.errors import BoundUndefinedError
from app.grid.graph import SpectralReport, check_condition, fiedler_value
from app.sim.engine import ControllerSummary, SimTrace, balance_residual
from app.sim.scenario import ScenarioConfig
from app.templates_config import templates_env

TEMPLATE = "report.txt.j2"


@dataclass
class AreaAnalysis:
    area: int
    n: int
    spectral: SpectralReport
    fiedler: float = 0.0
    pi_gains: List[PiEquivalent] = field(default_factory=list)
    bound: Optional[CostBound] = None
    bound_note: str = ""
    ramp_rows: List[RampCheckRow] = field(default_factory=list)


def scenario_analysis(config: ScenarioConfig) -> List[AreaAnalysis]:
    """
    Espectro, cota de costo, chequeo de rampas y PI equivalente por área
    (solo control distribuido).
    """
    if not config.is_distributed:
        return []
    beta = config.controller.beta
    out = []
    for j, group in enumerate(config.resources):
        graph = config.graph(j)
        costs = [r.a for r in group]
        item = AreaAnalysis(
            area=j,
            n=graph.n,
            spectral=check_condition(graph, beta, costs),
            fiedler=fiedler_value(graph),
            pi_gains=pi_equivalent_gains(group, config.areas[j], config.slot_len),
        )
        load = config.loads[j]
        if not load.bounded:
            item.bound_note = f"carga '{load.kind}' sin cota ε por período"
        else:
            try:
                item.bound = compute_cost_bound(graph, beta, costs, load.epsilon)
                item.ramp_rows = ramp_relaxation_check(item.bound, graph, beta, group)
            except BoundUndefinedError as e:
                item.bound_note = str(e)
        out.append(item)
    return out


def _final_costs(config: ScenarioConfig, trace: SimTrace) -> List[dict]:
    out = []
    for j, group in enumerate(config.resources):
        a = np.array([r.a for r in group])
        u = trace.control[-1, trace.area_of == j]
        out.append({
            "area": j,
            "simulated": dispatch_cost(a, u),
            "optimal": optimal_dispatch(a, float(trace.load[-1, j])).total_cost,
        })
    return out


def render_report(
    title: str,
    summaries: Sequence[ControllerSummary],
    band: float,
    config: Optional[ScenarioConfig] = None,
    trace: Optional[SimTrace] = None,
) -> str:
    residuals, costs, warnings = [], [], []
    if trace is not None and len(trace):
        res = balance_residual(trace)
        residuals = [
            {"area": j, "control": float(res["control"][j]), "mech_power": float(res["mech_power"][j])}
            for j in range(trace.n_areas)
        ]
        warnings = list(trace.warnings)
        if config is not None:
            costs = _final_costs(config, trace)
    return templates_env.get_template(TEMPLATE).render(
        title=title,
        summaries=list(summaries),
        band=band,
        analysis=scenario_analysis(config) if config is not None else [],
        residuals=residuals,
        costs=costs,
        warnings=warnings,
    )
