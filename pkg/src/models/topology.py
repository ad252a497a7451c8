"""Modèles de la topologie transit-stub et moteur de plus courts chemins."""

import threading
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import networkx as nx
import numpy as np
from pydantic import BaseModel, Field, model_validator
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra


class RouterKind(str, Enum):
    TRANSIT = "transit"
    STUB = "stub"


class LinkLevel(str, Enum):
    INTER_TRANSIT = "inter_transit"
    INTRA_TRANSIT = "intra_transit"
    TRANSIT_STUB = "transit_stub"
    INTRA_STUB = "intra_stub"


@dataclass(frozen=True)
class Router:
    """Routeur de l'underlay; stub_domain est None pour un routeur de transit."""

    id: int
    kind: RouterKind
    transit_domain: int
    stub_domain: Optional[int] = None

    def __post_init__(self) -> None:
        if (self.kind is RouterKind.STUB) != (self.stub_domain is not None):
            raise ValueError(f"Routeur {self.id}: type {self.kind.value} incohérent avec son domaine")


@dataclass(frozen=True)
class UnderlayLink:
    u: int
    v: int
    delay_ms: float
    level: LinkLevel


class TransitStubParams(BaseModel):
    """Paramètres du générateur transit-stub."""

    transit_domains: int = Field(default=10, ge=1)
    transit_nodes_per_domain: float = Field(default=10.0, ge=1.0)
    transit_edge_prob: float = Field(default=0.6, ge=0.0, le=1.0)
    stub_domains_per_transit_node: float = Field(default=3.0, ge=1.0)
    stub_nodes_per_domain: float = Field(default=16.0, ge=1.0)
    stub_edge_prob: float = Field(default=0.42, ge=0.0, le=1.0)
    inter_transit_links: int = Field(default=1, ge=1)
    size_jitter: float = Field(default=0.5, ge=0.0, le=1.0)
    inter_transit_delay: tuple[float, float] = (50.0, 150.0)
    intra_transit_delay: tuple[float, float] = (10.0, 40.0)
    transit_stub_delay: tuple[float, float] = (5.0, 20.0)
    intra_stub_delay: tuple[float, float] = (1.0, 5.0)

    @model_validator(mode="after")
    def _ranges_ordered(self) -> "TransitStubParams":
        for level in LinkLevel:
            lo, hi = self.delay_range(level)
            if not 0.0 < lo <= hi:
                raise ValueError(f"Plage de délai invalide pour {level.value}: [{lo}, {hi}]")
        return self

    def delay_range(self, level: LinkLevel) -> tuple[float, float]:
        return getattr(self, f"{level.value}_delay")

    def expected_routers(self) -> float:
        per_transit_node = 1.0 + self.stub_domains_per_transit_node * self.stub_nodes_per_domain
        return self.transit_domains * self.transit_nodes_per_domain * per_transit_node


@dataclass(frozen=True)
class SsspTable:
    """Distances (ms) et prédécesseurs depuis une source."""

    source: int
    dist: np.ndarray
    pred: np.ndarray


@dataclass
class UnderlayGraph:
    """
    Graphe de routeurs avec délais par lien.

    Les tables de plus courts chemins sont calculées à la demande et mémorisées
    par source; le remplissage du cache est protégé par un verrou pour les
    essais parallèles.
    """

    routers: tuple[Router, ...]
    links: tuple[UnderlayLink, ...]
    graph: nx.Graph = field(init=False, repr=False)
    _matrix: csr_matrix = field(init=False, repr=False)
    _cache: dict[int, SsspTable] = field(init=False, repr=False, default_factory=dict)
    _lock: threading.Lock = field(init=False, repr=False, default_factory=threading.Lock)

    def __post_init__(self) -> None:
        g = nx.Graph()
        for router in self.routers:
            g.add_node(router.id, kind=router.kind, transit_domain=router.transit_domain,
                       stub_domain=router.stub_domain)
        for link in self.links:
            g.add_edge(link.u, link.v, delay=link.delay_ms, level=link.level)
        self.graph = nx.freeze(g)

        n = len(self.routers)
        rows = [link.u for link in self.links] + [link.v for link in self.links]
        cols = [link.v for link in self.links] + [link.u for link in self.links]
        data = [link.delay_ms for link in self.links] * 2
        self._matrix = csr_matrix((data, (rows, cols)), shape=(n, n))

    @property
    def size(self) -> int:
        return len(self.routers)

    def sssp(self, source: int) -> SsspTable:
        """Table des plus courts chemins depuis source (mémorisée)."""
        table = self._cache.get(source)
        if table is not None:
            return table
        with self._lock:
            table = self._cache.get(source)
            if table is None:
                dist, pred = dijkstra(self._matrix, directed=False, indices=source,
                                      return_predecessors=True)
                table = SsspTable(source=source, dist=dist, pred=pred)
                self._cache[source] = table
        return table

    def shortest_path_delay(self, a: int, b: int) -> float:
        """Délai minimal (ms) entre deux routeurs."""
        if a == b:
            return 0.0
        # La table déjà en cache pour l'une des extrémités suffit (graphe non orienté)
        if b in self._cache and a not in self._cache:
            a, b = b, a
        return float(self.sssp(a).dist[b])

    def shortest_path(self, a: int, b: int) -> list[int]:
        """Suite de routeurs du plus court chemin de a vers b."""
        pred = self.sssp(a).pred
        path = [b]
        while path[-1] != a:
            previous = int(pred[path[-1]])
            if previous < 0:
                raise ValueError(f"Aucun chemin entre {a} et {b}")
            path.append(previous)
        path.reverse()
        return path

    def stub_domains(self) -> dict[int, tuple[int, ...]]:
        """Routeurs de chaque domaine stub, triés par identifiant."""
        domains: dict[int, list[int]] = {}
        for router in self.routers:
            if router.stub_domain is not None:
                domains.setdefault(router.stub_domain, []).append(router.id)
        return {dom: tuple(sorted(ids)) for dom, ids in sorted(domains.items())}

    def transit_domain_of_stub(self) -> dict[int, int]:
        return {
            router.stub_domain: router.transit_domain
            for router in self.routers
            if router.stub_domain is not None
        }

    def __repr__(self) -> str:
        return f"UnderlayGraph(routers={len(self.routers)}, links={len(self.links)})"
