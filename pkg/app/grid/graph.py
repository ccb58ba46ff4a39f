"""
Topología de comunicación entre recursos y análisis espectral de la
condición de conectividad (segundo autovalor de I − βΛ⁻¹L).

Generadores aceptados en el escenario: "ring", "complete",
"k-neighbor-ring" y lista explícita de aristas.
"""

import logging
import math
from dataclasses import dataclass
from typing import FrozenSet, Iterable, Sequence, Tuple

import networkx as nx
import numpy as np
from scipy import linalg

from app.errors import ConfigError, DimensionError

logger = logging.getLogger("frecuenciaok")

Edge = Tuple[int, int]


@dataclass(frozen=True)
class CommGraph:
    """Grafo no dirigido sin pesos: n nodos y aristas como pares (i, j) con i < j."""
    n: int
    edges: FrozenSet[Edge]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ConfigError(f"graph needs at least one node (n={self.n})", field="graph")
        normalized = set()
        for i, j in self.edges:
            if i == j:
                raise ConfigError(f"self-loop en el nodo {i}", field="graph.edges")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ConfigError(f"arista ({i}, {j}) fuera de [0, {self.n})", field="graph.edges")
            normalized.add((min(i, j), max(i, j)))
        object.__setattr__(self, "edges", frozenset(normalized))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> "CommGraph":
        seen = set()
        for e in edges:
            i, j = int(e[0]), int(e[1])
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ConfigError(f"arista duplicada {key}", field="graph.edges")
            seen.add(key)
        return cls(n=n, edges=frozenset(seen))

    @classmethod
    def from_networkx(cls, g: nx.Graph) -> "CommGraph":
        return cls(n=g.number_of_nodes(), edges=frozenset((min(i, j), max(i, j)) for i, j in g.edges()))

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.edges)
        return g

    def neighbors(self, i: int) -> Tuple[int, ...]:
        return tuple(sorted([j for a, j in self.edges if a == i] + [a for a, j in self.edges if j == i]))

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=int)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    def adjacency(self) -> np.ndarray:
        return nx.to_numpy_array(self.to_networkx(), nodelist=range(self.n))

    def is_connected(self) -> bool:
        return nx.is_connected(self.to_networkx())

    def relabel(self, perm: Sequence[int]) -> "CommGraph":
        """Grafo con el nodo i renombrado perm[i]."""
        return CommGraph(n=self.n, edges=frozenset((perm[i], perm[j]) for i, j in self.edges))


def laplacian(graph: CommGraph) -> np.ndarray:
    """L = D_G − A_G (n×n)."""
    a = graph.adjacency()
    return np.diag(a.sum(axis=1)) - a


# ------------------------------------------------------------------------------
# Generadores
# ------------------------------------------------------------------------------

def build_k_neighbor_ring(n: int, k: int) -> CommGraph:
    """Anillo donde el nodo i se enlaza con i±1, …, i±k/2 (mod n)."""
    if n < 2 or k < 2 or k % 2 != 0 or k >= n:
        raise ConfigError(
            f"k-neighbor ring requires n >= 2, k even, 2 <= k < n (n={n}, k={k})", field="graph.k"
        )
    # watts_strogatz con p=0 es exactamente el anillo regular
    return CommGraph.from_networkx(nx.watts_strogatz_graph(n, k, 0.0))


def build_ring(n: int) -> CommGraph:
    if n < 1:
        raise ConfigError(f"ring requires n >= 1 (n={n})", field="graph")
    if n == 1:
        return CommGraph(n=1, edges=frozenset())
    if n == 2:
        return CommGraph(n=2, edges=frozenset({(0, 1)}))
    return CommGraph.from_networkx(nx.cycle_graph(n))


def build_complete(n: int) -> CommGraph:
    return CommGraph.from_networkx(nx.complete_graph(n))


def build_graph(kind: str, n: int, k: int = 2, edges: Sequence[Sequence[int]] = ()) -> CommGraph:
    """Construye el grafo a partir de la especificación del escenario."""
    if kind == "ring":
        return build_ring(n)
    if kind == "complete":
        return build_complete(n)
    if kind == "k-neighbor-ring":
        return build_k_neighbor_ring(n, k)
    if kind == "edges":
        return CommGraph.from_edges(n, edges)
    raise ConfigError(f"graph kind desconocido: {kind!r}", field="graph.kind")


# ------------------------------------------------------------------------------
# Condición espectral
# ------------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralReport:
    second_largest: float   # 1 − ρ
    gamma: float            # (1 − ρ)·max √a · max 1/√a
    connected: bool
    satisfied: bool
    eigenvalues: Tuple[float, ...] = ()


def consensus_matrix(graph: CommGraph, beta: float, costs: Sequence[float]) -> np.ndarray:
    """Forma simétrica I − βΛ^{-1/2} L Λ^{-1/2}, con Λ = diag(1/(2a_i))."""
    a = np.asarray(costs, dtype=float)
    scale = np.sqrt(2.0 * a)  # Λ^{-1/2}
    return np.eye(graph.n) - beta * (scale[:, None] * laplacian(graph) * scale[None, :])


def check_condition(graph: CommGraph, beta: float, costs: Sequence[float]) -> SpectralReport:
    """
    Evalúa (1−ρ)·max √a_i · max 1/√a_i < 1.

    Los autovalores se calculan sobre la matriz simétrica semejante, nunca
    sobre I − βΛ⁻¹L directamente.
    """
    a = np.asarray(costs, dtype=float)
    if a.shape != (graph.n,):
        raise DimensionError(f"{a.size} costos para un grafo de {graph.n} nodos")
    if np.any(a <= 0):
        raise ConfigError("a must be > 0", field="a")
    if not beta > 0:
        raise ConfigError(f"beta must be > 0 (valor: {beta})", field="beta")

    eig = np.sort(linalg.eigh(consensus_matrix(graph, beta, a), eigvals_only=True))[::-1]
    connected = graph.is_connected()
    second = float(eig[1]) if graph.n > 1 else 0.0
    if not connected:
        second = 1.0
    spread = math.sqrt(a.max()) * (1.0 / math.sqrt(a.min()))
    gamma = second * spread

    rest = eig[1:]
    in_range = bool(np.all(rest >= -1e-12) and np.all(rest < 1.0))
    satisfied = bool(connected and in_range and gamma < 1.0)
    if not satisfied:
        logger.debug(f"Condición espectral no satisfecha: 1-rho={second:.6g}, gamma={gamma:.6g}")
    return SpectralReport(
        second_largest=second,
        gamma=gamma,
        connected=connected,
        satisfied=satisfied,
        eigenvalues=tuple(float(x) for x in eig),
    )


def fiedler_value(graph: CommGraph) -> float:
    """Segundo autovalor más chico del Laplaciano."""
    if graph.n < 2:
        return 0.0
    return float(np.sort(linalg.eigh(laplacian(graph), eigvals_only=True))[1])
