"""
Despacho económico centralizado (referencia exacta) y métricas de brecha.

    min Σ a_i u_i² + b u_i + c   s.a.  Σ u_i = ΔP_L
    λ* = 2ΔP_L / Σ_j (1/a_j),   u*_i = λ*/(2a_i)
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from app.errors import ConfigError, DispatchError


@dataclass(frozen=True)
class DispatchSolution:
    u_star: np.ndarray
    lambda_star: float
    total_cost: float


@dataclass(frozen=True)
class DispatchGap:
    max_lambda_dev: float
    max_u_dev: float
    relative_error: Optional[float]  # None si ningún u*_i es distinto de cero


def _check_costs(costs: Sequence[float]) -> np.ndarray:
    a = np.asarray(costs, dtype=float).reshape(-1)
    if a.size == 0:
        raise DispatchError("lista de recursos vacía")
    if np.any(a <= 0):
        raise ConfigError("a must be > 0", field="a")
    return a


def dispatch_cost(costs: Sequence[float], u, b: float = 0.0, c: float = 0.0) -> float:
    """Σ a_i u_i² + b u_i + c."""
    a = np.asarray(costs, dtype=float)
    u = np.asarray(u, dtype=float)
    return float(np.sum(a * u**2 + b * u + c))


def optimal_dispatch(costs: Sequence[float], load_dev: float, b: float = 0.0, c: float = 0.0) -> DispatchSolution:
    a = _check_costs(costs)
    lam = 2.0 * load_dev / np.sum(1.0 / a)
    u = lam / (2.0 * a)
    return DispatchSolution(u_star=u, lambda_star=float(lam), total_cost=dispatch_cost(a, u, b, c))


def dispatch_gap(lambda_, u, costs: Sequence[float], load_dev: float) -> DispatchGap:
    """max|λ_i − λ*|, max|u_i − u*_i| y max|u_i − u*_i|/|u*_i| (omitiendo u*_i = 0)."""
    sol = optimal_dispatch(costs, load_dev)
    lam = np.asarray(lambda_, dtype=float)
    u = np.asarray(u, dtype=float)
    u_dev = np.abs(u - sol.u_star)
    nonzero = sol.u_star != 0.0
    relative = float(np.max(u_dev[nonzero] / np.abs(sol.u_star[nonzero]))) if np.any(nonzero) else None
    return DispatchGap(
        max_lambda_dev=float(np.max(np.abs(lam - sol.lambda_star))),
        max_u_dev=float(np.max(u_dev)),
        relative_error=relative,
    )
