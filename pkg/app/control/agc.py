"""
Línea base AGC: PI sobre el ACE del área con factores de participación.

    ACE_j  = ΔP_tie,j + B_j·Δf_j,   B_j = D_j + Σ_i 1/R_i
    I     += ACE·ΔT
    P_cmd  = −(kp·ACE + ki·I)
    u_i    = α_i·P_cmd
"""

from dataclasses import dataclass, replace
from typing import Sequence, Tuple

import numpy as np

from app.errors import ConfigError
from app.grid.plant import AreaParams, ResourceParams


@dataclass(frozen=True)
class AceSignal:
    area_id: int
    value: float
    freq_dev_now: float
    freq_dev_prev: float
    tie_flow: float

    def __post_init__(self) -> None:
        if not np.all(np.isfinite([self.value, self.freq_dev_now, self.freq_dev_prev, self.tie_flow])):
            raise ConfigError(f"ACE no finito en el área {self.area_id}", field="ace")


@dataclass(frozen=True)
class AgcControllerState:
    kp: float
    ki: float
    alpha: np.ndarray
    integral_acc: float = 0.0

    def __post_init__(self) -> None:
        alpha = np.asarray(self.alpha, dtype=float)
        if np.any(alpha < 0) or abs(alpha.sum() - 1.0) > 1e-9:
            raise ConfigError(f"participation factors must be >= 0 and sum to 1 (suma: {alpha.sum()})",
                              field="alpha")
        object.__setattr__(self, "alpha", alpha)


def participation_factors(costs: Sequence[float]) -> np.ndarray:
    """α_i = (1/a_i) / Σ_j (1/a_j)."""
    a = np.asarray(costs, dtype=float)
    if np.any(a <= 0):
        raise ConfigError("a must be > 0", field="a")
    inv = 1.0 / a
    return inv / inv.sum()


def uniform_participation(n: int) -> np.ndarray:
    return np.full(n, 1.0 / n)


def frequency_bias(area: AreaParams, resources: Sequence[ResourceParams]) -> float:
    return area.damping_D + sum(1.0 / r.droop_R for r in resources)


def area_control_error(area_id: int, freq_now: float, freq_prev: float, tie_flow: float, bias: float) -> AceSignal:
    return AceSignal(
        area_id=area_id,
        value=float(tie_flow + bias * freq_now),
        freq_dev_now=float(freq_now),
        freq_dev_prev=float(freq_prev),
        tie_flow=float(tie_flow),
    )


def agc_step(ctrl: AgcControllerState, ace: AceSignal, slot_len: float) -> Tuple[np.ndarray, AgcControllerState]:
    """Avanza la integral (regla del rectángulo) y reparte el comando. Devuelve (u, estado nuevo)."""
    integral = ctrl.integral_acc + ace.value * slot_len
    p_cmd = -(ctrl.kp * ace.value + ctrl.ki * integral)
    return ctrl.alpha * p_cmd, replace(ctrl, integral_acc=integral)
