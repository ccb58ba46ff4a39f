"""
Control distribuido consenso + innovación global.

Cada recurso i mantiene λ_i (costo marginal). En cada slot:

    λ̃_i = λ_i − 2a_iβ Σ_{l∈Ω_i}(λ_i − λ_l) + (2a_i/n)·innovación
    u_i  = λ̃_i / (2a_i)
    λ_i  ← 2a_i ΔP_m^i        (re-anclaje al inicio del slot siguiente)

ΔP_m^i es la potencia mecánica medida sobre el slot anterior (su promedio
temporal). La innovación es ΔP_L(t+1) − ΣΔP_m(t) con esa misma medición:
exacta en modo "oracle-load" o estimada desde la frecuencia en modo
"frequency-estimated". Anclaje e innovación usan la misma ventana de
medición.
"""

from dataclasses import dataclass, replace
from enum import Enum
from typing import List, Optional, Sequence

import numpy as np

from app.errors import ConfigError, DimensionError
from app.grid.graph import CommGraph, laplacian
from app.grid.plant import AreaParams, ResourceParams


class InnovationMode(str, Enum):
    ORACLE_LOAD = "oracle-load"
    FREQUENCY_ESTIMATED = "frequency-estimated"


@dataclass(frozen=True)
class DistributedControllerState:
    lambda_: np.ndarray
    beta: float
    innovation_mode: InnovationMode
    graph: CommGraph

    @classmethod
    def initial(
        cls,
        graph: CommGraph,
        beta: float,
        innovation_mode: InnovationMode = InnovationMode.FREQUENCY_ESTIMATED,
        costs: Optional[Sequence[float]] = None,
        mech_power: Optional[Sequence[float]] = None,
    ) -> "DistributedControllerState":
        """λ⁰ = 2a·ΔP_m(0); cero si no hay desvío inicial."""
        if not beta > 0:
            raise ConfigError(f"beta must be > 0 (valor: {beta})", field="beta")
        lam = np.zeros(graph.n)
        if costs is not None and mech_power is not None:
            lam = 2.0 * np.asarray(costs, dtype=float) * np.asarray(mech_power, dtype=float)
        return cls(lambda_=lam, beta=float(beta), innovation_mode=InnovationMode(innovation_mode), graph=graph)

    def anchored(self, costs: Sequence[float], mech_power: Sequence[float]) -> "DistributedControllerState":
        """Re-anclaje λ_i = 2a_i ΔP_m^i."""
        lam = 2.0 * np.asarray(costs, dtype=float) * np.asarray(mech_power, dtype=float)
        if lam.shape != (self.graph.n,):
            raise DimensionError(f"{lam.size} recursos para un grafo de {self.graph.n} nodos")
        return replace(self, lambda_=lam)


def _costs(resources) -> np.ndarray:
    if len(resources) and isinstance(resources[0], ResourceParams):
        return np.array([r.a for r in resources], dtype=float)
    return np.asarray(resources, dtype=float)


def consensus_innovation_step(
    ctrl: DistributedControllerState,
    resources,
    mech_power,
    innovation: float,
):
    """
    Un paso síncrono (Jacobi): todos los λ̃ salen de la misma foto de λ.

    `resources` acepta una lista de ResourceParams o directamente el vector a.
    Devuelve (u, λ̃).
    """
    a = _costs(resources)
    pm = np.asarray(mech_power, dtype=float).reshape(-1)
    n = ctrl.graph.n
    if a.shape != (n,) or pm.shape != (n,) or ctrl.lambda_.shape != (n,):
        raise DimensionError(
            f"grafo de {n} nodos, {a.size} costos, {pm.size} potencias, {ctrl.lambda_.size} precios"
        )

    lam = ctrl.lambda_
    disagreement = laplacian(ctrl.graph) @ lam  # Σ_l (λ_i − λ_l)
    lambda_tilde = lam - 2.0 * a * ctrl.beta * disagreement + (2.0 * a / n) * innovation
    u = lambda_tilde / (2.0 * a)
    return u, lambda_tilde


def control_law_matrix_form(graph: CommGraph, beta: float, costs, mech_power, load_next: float) -> np.ndarray:
    """u(t+1) = ΔP_m − βLΛ⁻¹ΔP_m + n⁻¹(ΔP_L(t+1) − 1ᵀΔP_m)."""
    a = np.asarray(costs, dtype=float)
    pm = np.asarray(mech_power, dtype=float)
    return pm - beta * laplacian(graph) @ (2.0 * a * pm) + (load_next - pm.sum()) / graph.n


# ------------------------------------------------------------------------------
# Innovación estimada desde la frecuencia
# ------------------------------------------------------------------------------

def estimate_innovation(
    area: AreaParams,
    freq_now: float,
    freq_next: float,
    tie_flow: float,
    slot_len: float,
) -> float:
    """−2H(Δf_next − Δf_now)/ΔT − D·Δf_now − ΔP_tie ≈ ΔP_L(t+1) − ΣΔP_m(t)."""
    if not slot_len > 0:
        raise ConfigError(f"slot_len must be > 0 (valor: {slot_len})", field="slot_len")
    return (
        -2.0 * area.inertia_H * (freq_next - freq_now) / slot_len
        - area.damping_D * freq_now
        - tie_flow
    )


def innovation_potential(costs, area: AreaParams, freq_now: float, freq_next: float, slot_len: float) -> np.ndarray:
    """Término de innovación por recurso en su forma de frecuencia (área aislada)."""
    a = np.asarray(costs, dtype=float)
    n = a.size
    return (
        -(2.0 * a / n) * area.damping_D * freq_now
        - (4.0 * a * area.inertia_H / (n * slot_len)) * (freq_next - freq_now)
    )


# ------------------------------------------------------------------------------
# Equivalente PI (solo diagnóstico)
# ------------------------------------------------------------------------------

@dataclass(frozen=True)
class PiEquivalent:
    T_u: float
    proportional_gain: float
    integral_gain: float


def pi_equivalent_gains(
    resources: Sequence[ResourceParams],
    area: AreaParams,
    slot_len: float,
    n: Optional[int] = None,
) -> List[PiEquivalent]:
    """T_u = ΔT + T_g + T_t; ganancia proporcional 2H/(n·T_u) e integral D/(n·T_u)."""
    n = n if n is not None else len(resources)
    out = []
    for r in resources:
        t_u = slot_len + r.T_g + r.T_t
        if not t_u > 0:
            raise ConfigError(
                f"T_u must be > 0 (slot_len={slot_len}, T_g={r.T_g}, T_t={r.T_t})", field="T_u"
            )
        out.append(PiEquivalent(
            T_u=t_u,
            proportional_gain=2.0 * area.inertia_H / (n * t_u),
            integral_gain=area.damping_D / (n * t_u),
        ))
    return out
