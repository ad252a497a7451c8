"""Placement des membres du graphe social sur les routeurs stub de l'underlay."""

import logging
from collections import deque
from typing import Optional

import numpy as np
import pandas as pd

from src.models.overlay import EmbedParams, Placement
from src.models.social import SocialGraph
from src.models.topology import UnderlayGraph
from src.utils.errors import CapacityError, GroupSizeError
from src.utils.geo import haversine_km
from src.utils.seeding import make_rng

logger = logging.getLogger(__name__)

PLACEMENT_COLUMNS = ["user_id", "router_id", "stub_domain", "access_delay_ms"]


def select_subset(g: SocialGraph, params: EmbedParams, seed: int) -> list[int]:
    """
    Sélectionne les membres à placer.

    Args:
        g: Graphe social
        params: subset_size et stratégie (random ou bfs_cluster)
        seed: Graine

    Returns:
        Identifiants triés; bfs_cluster donne un sous-graphe induit connexe
    """
    size = params.subset_size
    if size > g.n:
        raise ValueError(f"subset_size ({size}) > nombre de membres ({g.n})")
    if size == 0:
        return []
    rng = make_rng(seed)

    if params.selection == "random":
        return sorted(int(u) for u in rng.choice(g.n, size=size, replace=False))

    start = int(rng.integers(g.n))
    selected = [start]
    visited = {start}
    queue = deque([start])
    while queue and len(selected) < size:
        u = queue.popleft()
        for v in g.neighbors(u):
            if v not in visited:
                visited.add(v)
                selected.append(v)
                queue.append(v)
                if len(selected) == size:
                    break
    if len(selected) < size:
        raise GroupSizeError(size, len(selected))
    return sorted(selected)


def _geographic_bins(users: list[int], g: SocialGraph, capacity: int) -> list[list[int]]:
    """Regroupement glouton: graine = premier non affecté (région, id), puis ses plus proches voisins."""
    order = sorted(users, key=lambda u: (g.profiles[u].region, u))
    ids = np.array(order)
    lat = np.array([g.profiles[u].lat for u in order])
    lon = np.array([g.profiles[u].lon for u in order])
    free = np.ones(len(order), dtype=bool)

    bins: list[list[int]] = []
    while free.any():
        seed_index = int(np.flatnonzero(free)[0])
        candidates = np.flatnonzero(free)
        distance = haversine_km(lat[seed_index], lon[seed_index], lat[candidates], lon[candidates])
        ranked = candidates[np.lexsort((ids[candidates], distance))][:capacity]
        free[ranked] = False
        bins.append([int(ids[i]) for i in ranked])
    return bins


def _assign_bins(
    bins: list[list[int]], g: SocialGraph, underlay: UnderlayGraph
) -> list[tuple[list[int], int]]:
    """Chaque région commence dans le domaine de transit le plus libre puis déborde cycliquement."""
    transit_of = underlay.transit_domain_of_stub()
    transit_ids = sorted(set(transit_of.values()))
    free: dict[int, deque[int]] = {td: deque() for td in transit_ids}
    for stub_domain in sorted(transit_of):
        free[transit_of[stub_domain]].append(stub_domain)

    by_region: dict[int, list[list[int]]] = {}
    for members in bins:
        by_region.setdefault(g.profiles[members[0]].region, []).append(members)
    regions = sorted(by_region, key=lambda r: (-sum(len(b) for b in by_region[r]), r))

    assignment: list[tuple[list[int], int]] = []
    for region in regions:
        start = max(transit_ids, key=lambda td: (len(free[td]), -td))
        cursor = transit_ids.index(start)
        for members in by_region[region]:
            for step in range(len(transit_ids)):
                td = transit_ids[(cursor + step) % len(transit_ids)]
                if free[td]:
                    cursor = (cursor + step) % len(transit_ids)
                    assignment.append((members, free[td].popleft()))
                    break
    return assignment


def embed(
    users: list[int],
    g: SocialGraph,
    underlay: UnderlayGraph,
    params: Optional[EmbedParams] = None,
    seed: int = 0,
) -> Placement:
    """
    Place les membres sur les routeurs stub.

    En mode géographique, les amis proches partagent un domaine stub et les régions
    éloignées se répartissent sur des domaines de transit différents. Le mode
    aléatoire sert de témoin.

    Args:
        users: Membres à placer
        g: Graphe social
        underlay: Topologie transit-stub
        params: Paramètres de placement
        seed: Graine (mode aléatoire)

    Returns:
        Placement immuable

    Raises:
        CapacityError: capacité × nombre de domaines stub < nombre de membres
    """
    params = params or EmbedParams()
    users = sorted(set(users))
    for u in users:
        if not 0 <= u < g.n:
            raise ValueError(f"Membre {u} absent du graphe")
    domains = underlay.stub_domains()
    capacity = params.capacity_for(len(users), len(domains))
    if capacity * len(domains) < len(users):
        raise CapacityError(len(users), len(domains), capacity)

    attachment: dict[int, int] = {}
    stub_of: dict[int, int] = {}

    if params.attachment == "random":
        rng = make_rng(seed)
        occupancy = dict.fromkeys(domains, 0)
        for u in users:
            open_domains = [d for d in domains if occupancy[d] < capacity]
            domain = open_domains[int(rng.integers(len(open_domains)))]
            routers = domains[domain]
            attachment[u] = routers[int(rng.integers(len(routers)))]
            stub_of[u] = domain
            occupancy[domain] += 1
    else:
        bins = _geographic_bins(users, g, capacity)
        for members, domain in _assign_bins(bins, g, underlay):
            routers = domains[domain]
            for i, u in enumerate(members):
                attachment[u] = routers[i % len(routers)]
                stub_of[u] = domain

    logger.info(
        f"✓ {len(users)} membres placés ({params.attachment}) sur "
        f"{len(set(stub_of.values()))} domaines stub, capacité {capacity}"
    )
    return Placement(
        attachment=attachment,
        access_delay=dict.fromkeys(users, params.access_delay_ms),
        stub_domain=stub_of,
    )


def user_delay(p: Placement, underlay: UnderlayGraph, a: int, b: int) -> float:
    """Délai membre à membre: accès(a) + plus court chemin entre routeurs + accès(b)."""
    router_a, router_b = p.router_of(a), p.router_of(b)
    if a == b:
        return 0.0
    return p.access_of(a) + underlay.shortest_path_delay(router_a, router_b) + p.access_of(b)


def mean_friend_delay(p: Placement, underlay: UnderlayGraph, g: SocialGraph) -> float:
    """Délai moyen sur les arêtes sociales dont les deux extrémités sont placées."""
    delays = [user_delay(p, underlay, u, v) for u, v in g.edges() if u in p and v in p]
    return float(np.mean(delays)) if delays else float("nan")


def placement_frame(p: Placement) -> pd.DataFrame:
    """Placement au format CSV `user_id,router_id,stub_domain,access_delay_ms`."""
    rows = [(u, p.attachment[u], p.stub_domain[u], p.access_delay[u]) for u in p.users]
    return pd.DataFrame(rows, columns=PLACEMENT_COLUMNS)
