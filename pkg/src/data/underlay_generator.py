"""Génération de topologies transit-stub.

Domaines de transit reliés deux à deux, domaines stub rattachés chacun à un
unique routeur de transit. Les sous-graphes internes sont des graphes de
Bernoulli; s'ils sont non connexes, leurs composantes sont chaînées.
"""

import logging
import math
from itertools import combinations
from typing import Optional

import networkx as nx
import numpy as np

from src.models.topology import (
    LinkLevel,
    Router,
    RouterKind,
    TransitStubParams,
    UnderlayGraph,
    UnderlayLink,
)
from src.utils.seeding import make_rng

logger = logging.getLogger(__name__)

# Délais multiples de 1/1024 ms: toute somme de délais est exacte en double précision
DELAY_QUANTUM = 1024


class TransitStubGenerator:
    """Générateur transit-stub déterministe pour (params, seed)."""

    def __init__(self, params: Optional[TransitStubParams] = None, seed: int = 0):
        self.params = params or TransitStubParams()
        self.seed = seed
        self.rng = make_rng(seed)
        self.routers: list[Router] = []
        self.links: list[UnderlayLink] = []
        self._linked: set[tuple[int, int]] = set()
        self.repairs = 0

    def _exact(self, mean: float) -> int:
        return max(1, round(mean))

    def _stub_size(self, mean: float) -> int:
        jitter = self.params.size_jitter
        lo = max(1, round(mean * (1.0 - jitter)))
        hi = max(lo, round(mean * (1.0 + jitter)))
        return int(self.rng.integers(lo, hi + 1))

    def _delay(self, level: LinkLevel) -> float:
        lo, hi = self.params.delay_range(level)
        q_lo, q_hi = math.ceil(lo * DELAY_QUANTUM), math.floor(hi * DELAY_QUANTUM)
        if q_lo > q_hi:
            return float(lo)
        drawn = round(self.rng.uniform(lo, hi) * DELAY_QUANTUM)
        return min(max(drawn, q_lo), q_hi) / DELAY_QUANTUM

    def _add_router(self, kind: RouterKind, transit_domain: int, stub_domain: Optional[int]) -> int:
        router_id = len(self.routers)
        self.routers.append(Router(router_id, kind, transit_domain, stub_domain))
        return router_id

    def _add_link(self, u: int, v: int, level: LinkLevel) -> bool:
        key = (min(u, v), max(u, v))
        if u == v or key in self._linked:
            return False
        self._linked.add(key)
        self.links.append(UnderlayLink(key[0], key[1], self._delay(level), level))
        return True

    def _bernoulli_domain(self, members: list[int], prob: float, level: LinkLevel) -> None:
        """Arêtes internes tirées avec probabilité prob, puis chaînage des composantes."""
        pairs = list(combinations(members, 2))
        draws = self.rng.random(len(pairs)) if pairs else np.empty(0)
        local = nx.Graph()
        local.add_nodes_from(members)
        for (u, v), draw in zip(pairs, draws):
            if draw < prob:
                self._add_link(u, v, level)
                local.add_edge(u, v)

        components = sorted((sorted(c) for c in nx.connected_components(local)), key=lambda c: c[0])
        if len(components) > 1:
            self.repairs += len(components) - 1
            for left, right in zip(components, components[1:]):
                u = left[int(self.rng.integers(len(left)))]
                v = right[int(self.rng.integers(len(right)))]
                self._add_link(u, v, level)

    def generate(self) -> UnderlayGraph:
        """
        Génère la topologie.

        Returns:
            UnderlayGraph connexe
        """
        p = self.params
        logger.info(
            f"Génération transit-stub: {p.transit_domains} domaines de transit "
            f"(~{p.expected_routers():.0f} routeurs attendus, graine {self.seed})"
        )

        transit_members: list[list[int]] = []
        for td in range(p.transit_domains):
            members = [self._add_router(RouterKind.TRANSIT, td, None)
                       for _ in range(self._exact(p.transit_nodes_per_domain))]
            transit_members.append(members)
            self._bernoulli_domain(members, p.transit_edge_prob, LinkLevel.INTRA_TRANSIT)

        for a, b in combinations(range(p.transit_domains), 2):
            for _ in range(p.inter_transit_links):
                u = transit_members[a][int(self.rng.integers(len(transit_members[a])))]
                v = transit_members[b][int(self.rng.integers(len(transit_members[b])))]
                self._add_link(u, v, LinkLevel.INTER_TRANSIT)

        stub_domain = 0
        for td, members in enumerate(transit_members):
            for transit_router in members:
                for _ in range(self._exact(p.stub_domains_per_transit_node)):
                    stubs = [self._add_router(RouterKind.STUB, td, stub_domain)
                             for _ in range(self._stub_size(p.stub_nodes_per_domain))]
                    self._bernoulli_domain(stubs, p.stub_edge_prob, LinkLevel.INTRA_STUB)
                    gateway = stubs[int(self.rng.integers(len(stubs)))]
                    self._add_link(transit_router, gateway, LinkLevel.TRANSIT_STUB)
                    stub_domain += 1

        if self.repairs:
            logger.warning(f"⚠ {self.repairs} arêtes de chaînage ajoutées aux domaines non connexes")

        underlay = UnderlayGraph(routers=tuple(self.routers), links=tuple(self.links))
        logger.info(
            f"✓ Topologie générée: {len(self.routers)} routeurs, {len(self.links)} liens, "
            f"{stub_domain} domaines stub"
        )
        return underlay


def generate_transit_stub(params: Optional[TransitStubParams] = None, seed: int = 0) -> UnderlayGraph:
    """Génère une topologie transit-stub (voir TransitStubGenerator)."""
    return TransitStubGenerator(params=params, seed=seed).generate()
