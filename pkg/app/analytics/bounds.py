"""
Cota de costo (recursos ideales) y chequeo de que las rampas no se activan.

La recursión del error e_t = λ_t − λ*_t·1 con recursos ideales es

    e_{t+1} = (I − βΛ⁻¹L) e_t + d·(ΔP_L(t+1) − ΔP_L(t)),
    d_i     = 2a_i/n − 2/Σ_j(1/a_j)

y la parte de consenso contrae e por un factor γ por slot. Con
δ = max_i |d_i| la constante de la cota es c = δ/(1 − γ), y
max_i |λ_i − λ*| ≤ c·ε cuando la carga cambia a lo sumo ε por slot.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from app.errors import BoundUndefinedError
from app.grid.graph import CommGraph, check_condition
from app.grid.plant import ResourceParams

logger = logging.getLogger("frecuenciaok")


@dataclass(frozen=True)
class CostBound:
    gamma: float
    delta: float
    c: float
    epsilon: float

    @property
    def bound(self) -> float:
        return self.c * self.epsilon


def disturbance_gain(costs: Sequence[float], n: Optional[int] = None) -> float:
    """δ = max_i |2a_i/n − 2/Σ_j(1/a_j)|."""
    a = np.asarray(costs, dtype=float)
    n = n if n is not None else a.size
    return float(np.max(np.abs(2.0 * a / n - 2.0 / np.sum(1.0 / a))))


def compute_cost_bound(graph: CommGraph, beta: float, costs: Sequence[float], epsilon: float,
                       n: Optional[int] = None) -> CostBound:
    n = n if n is not None else graph.n
    report = check_condition(graph, beta, costs)
    if not report.satisfied:
        raise BoundUndefinedError(
            "la condición de conectividad no se cumple "
            f"(gamma={report.gamma:.6g}, conectado={report.connected}); la cota no está definida"
        )
    delta = disturbance_gain(costs, n)
    c = delta / (1.0 - report.gamma)
    return CostBound(gamma=report.gamma, delta=delta, c=c, epsilon=float(epsilon))


@dataclass(frozen=True)
class RampCheckRow:
    resource: int
    neighbors: int
    lhs: float
    ramp_r: float
    margin: float
    satisfied: bool


def ramp_relaxation_check(cost_bound: CostBound, graph: CommGraph, beta: float,
                          resources: Sequence[ResourceParams], n: Optional[int] = None) -> List[RampCheckRow]:
    """(2β·c·|Ω_i| + 1/n)·ε ≤ r_i para cada recurso."""
    n = n if n is not None else graph.n
    degrees = graph.degrees()
    rows = []
    for i, r in enumerate(resources):
        lhs = (2.0 * beta * cost_bound.c * degrees[i] + 1.0 / n) * cost_bound.epsilon
        margin = r.ramp_r - lhs
        rows.append(RampCheckRow(
            resource=i,
            neighbors=int(degrees[i]),
            lhs=lhs,
            ramp_r=r.ramp_r,
            margin=margin,
            satisfied=bool(lhs <= r.ramp_r),
        ))
    failing = [row.resource for row in rows if not row.satisfied]
    if failing:
        logger.info(f"Rampas potencialmente activas en recursos {failing}")
    return rows
