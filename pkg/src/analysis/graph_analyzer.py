"""Analyse structurelle du graphe social."""

import logging
import math
from collections import Counter
from collections.abc import Callable, Iterable
from dataclasses import dataclass
from typing import Optional, Union

import networkx as nx
import numpy as np
import pandas as pd
from networkx.utils import UnionFind
from scipy.sparse.csgraph import shortest_path

from src.models.social import InterestCategory, SocialGraph
from src.utils.errors import DisconnectedGraphError
from src.utils.geo import haversine_km
from src.utils.seeding import make_rng

logger = logging.getLogger(__name__)

SHORT_LINK_KM = 1000.0

EdgeWeight = Callable[[int, int], float]


@dataclass(frozen=True)
class DegreeStats:
    """Histogramme des degrés et statistiques associées."""

    histogram: dict[int, int]
    mean: float
    mode: int
    max: int

    def __repr__(self) -> str:
        return f"DegreeStats(moyen={self.mean:.2f}, mode={self.mode}, max={self.max})"


def global_clustering(g: SocialGraph) -> float:
    """Transitivité: 3 × triangles / triplets connexes (0 sans triplet)."""
    return float(nx.transitivity(g.graph))


def average_local_clustering(g: SocialGraph) -> float:
    """Moyenne des coefficients de clustering locaux."""
    if g.n == 0:
        return 0.0
    return float(nx.average_clustering(g.graph))


def degree_histogram(g: SocialGraph) -> DegreeStats:
    """
    Calcule la distribution des degrés.

    Returns:
        DegreeStats; le mode est le degré le plus fréquent (le plus petit en cas d'égalité)
    """
    degrees = [g.degree(u) for u in range(g.n)]
    histogram = dict(sorted(Counter(degrees).items()))
    if not degrees:
        return DegreeStats(histogram={}, mean=0.0, mode=0, max=0)
    mode = min(histogram, key=lambda d: (-histogram[d], d))
    return DegreeStats(
        histogram=histogram,
        mean=sum(degrees) / len(degrees),
        mode=mode,
        max=max(degrees),
    )


def degree_histogram_frame(stats: DegreeStats) -> pd.DataFrame:
    """Histogramme au format CSV `degree,count`."""
    return pd.DataFrame(
        {"degree": list(stats.histogram), "count": list(stats.histogram.values())},
        columns=["degree", "count"],
    )


def _require_connected(g: SocialGraph) -> None:
    if g.n == 0:
        return
    components = nx.number_connected_components(g.graph)
    if components > 1:
        raise DisconnectedGraphError(components)


def avg_shortest_path_sampled(g: SocialGraph, sample_pairs: int, seed: int) -> float:
    """
    Longueur moyenne des plus courts chemins (en sauts) sur des paires distinctes.

    Toutes les paires sont utilisées si sample_pairs ≥ n(n-1)/2.

    Args:
        g: Graphe connexe
        sample_pairs: Nombre de paires (≥ 1)
        seed: Graine de l'échantillonnage

    Raises:
        DisconnectedGraphError: graphe non connexe
        ValueError: moins de deux nœuds ou sample_pairs < 1
    """
    if sample_pairs < 1:
        raise ValueError("sample_pairs doit être >= 1")
    if g.n < 2:
        raise ValueError("Au moins deux nœuds sont nécessaires")
    _require_connected(g)

    total_pairs = g.n * (g.n - 1) // 2
    if sample_pairs >= total_pairs:
        pairs = [(u, v) for u in range(g.n) for v in range(u + 1, g.n)]
    else:
        rng = make_rng(seed)
        chosen: set[tuple[int, int]] = set()
        while len(chosen) < sample_pairs:
            u, v = (int(x) for x in rng.integers(g.n, size=2))
            if u != v:
                chosen.add((min(u, v), max(u, v)))
        pairs = sorted(chosen)

    sources = sorted({u for u, _ in pairs})
    matrix = nx.to_scipy_sparse_array(g.graph, nodelist=range(g.n), format="csr")
    distances = shortest_path(matrix, directed=False, unweighted=True, indices=sources)
    row = {source: i for i, source in enumerate(sources)}
    hops = [distances[row[u], v] for u, v in pairs]
    return float(np.mean(hops))


def _nearest_holder(
    g: SocialGraph,
    origin: int,
    category: InterestCategory,
    tokens: set[int],
    max_depth: Optional[int],
) -> Optional[int]:
    """Parcours en largeur niveau par niveau jusqu'au premier détenteur d'un des jetons."""
    if not tokens:
        return None
    visited = {origin}
    frontier = [origin]
    depth = 0
    while frontier and (max_depth is None or depth < max_depth):
        depth += 1
        next_frontier = []
        for u in frontier:
            for v in g.neighbors(u):
                if v not in visited:
                    visited.add(v)
                    next_frontier.append(v)
        for v in next_frontier:
            if tokens.intersection(g.profiles[v].tokens(category)):
                return depth
        frontier = next_frontier
    return None


def interest_search(
    g: SocialGraph,
    origin: int,
    category: InterestCategory,
    token: Union[int, Iterable[int]],
    max_depth: Optional[int] = None,
) -> Optional[int]:
    """
    Distance en sauts jusqu'au plus proche autre membre détenant le jeton.

    Args:
        g: Graphe social
        origin: Membre de départ (exclu de la recherche)
        category: Catégorie d'intérêt
        token: Jeton (ou ensemble de jetons, correspondance sur l'un d'eux)
        max_depth: Profondeur maximale (None: illimitée)

    Returns:
        Nombre de sauts, ou None si aucun détenteur n'est trouvé
    """
    if not 0 <= origin < g.n:
        raise ValueError(f"Origine {origin} hors de 0..{g.n - 1}")
    tokens = {int(token)} if isinstance(token, (int, np.integer)) else {int(t) for t in token}
    return _nearest_holder(g, origin, category, tokens, max_depth)


def geographic_weight(g: SocialGraph) -> EdgeWeight:
    """Poids d'arête par défaut: distance orthodromique (km) entre les deux membres."""

    def weight(u: int, v: int) -> float:
        a, b = g.profiles[u], g.profiles[v]
        return float(haversine_km(a.lat, a.lon, b.lat, b.lon))

    return weight


def kruskal_spanning_tree(
    g: SocialGraph, weight: Optional[EdgeWeight] = None
) -> list[tuple[int, int, float]]:
    """
    Arbre couvrant de poids minimal (Kruskal).

    Les égalités sont départagées par (poids, plus petite paire d'extrémités).

    Returns:
        Arêtes (u, v, poids) avec u < v, dans l'ordre d'acceptation

    Raises:
        DisconnectedGraphError: graphe non connexe
    """
    _require_connected(g)
    weight = weight or geographic_weight(g)
    candidates = []
    for u, v in g.edges():
        w = float(weight(u, v))
        if w < 0 or math.isnan(w):
            raise ValueError(f"Poids invalide {w} pour l'arête ({u}, {v})")
        candidates.append((w, u, v))
    candidates.sort()

    forest = UnionFind(range(g.n))
    tree: list[tuple[int, int, float]] = []
    for w, u, v in candidates:
        if forest[u] != forest[v]:
            forest.union(u, v)
            tree.append((u, v, w))
            if len(tree) == g.n - 1:
                break
    return tree


def edge_distance_stats(g: SocialGraph) -> tuple[float, float]:
    """Distance orthodromique moyenne des arêtes et part des liens courts (≤ 1000 km)."""
    edges = list(g.edges())
    if not edges:
        return 0.0, 0.0
    u = np.array([e[0] for e in edges])
    v = np.array([e[1] for e in edges])
    lat = np.array([p.lat for p in g.profiles])
    lon = np.array([p.lon for p in g.profiles])
    distance = haversine_km(lat[u], lon[u], lat[v], lon[v])
    return float(distance.mean()), float((distance <= SHORT_LINK_KM).mean())


def shared_interest_fraction(g: SocialGraph, category: InterestCategory) -> float:
    """Part des arêtes dont les extrémités partagent au moins un jeton de la catégorie."""
    edges = list(g.edges())
    if not edges:
        return 0.0
    shared = sum(
        1
        for u, v in edges
        if set(g.profiles[u].tokens(category)).intersection(g.profiles[v].tokens(category))
    )
    return shared / len(edges)


def region_mixing(g: SocialGraph) -> pd.DataFrame:
    """Nombre d'arêtes entre chaque paire de régions (matrice symétrique)."""
    regions = sorted({p.region for p in g.profiles})
    counts = pd.DataFrame(0, index=regions, columns=regions, dtype=int)
    for u, v in g.edges():
        ru, rv = g.profiles[u].region, g.profiles[v].region
        counts.loc[ru, rv] += 1
        if ru != rv:
            counts.loc[rv, ru] += 1
    return counts


class GraphAnalyzer:
    """Regroupe les mesures de structure d'un graphe social."""

    def __init__(self, graph: SocialGraph):
        self.graph = graph

    def summary(self, sample_pairs: int = 500, seed: int = 0) -> pd.DataFrame:
        """
        Calcule les indicateurs principaux.

        Returns:
            DataFrame `metric,value`
        """
        g = self.graph
        logger.info(f"Analyse du graphe: {g.n} nœuds, {g.number_of_edges()} arêtes")
        stats = degree_histogram(g)
        rows: list[tuple[str, float]] = [
            ("nodes", float(g.n)),
            ("edges", float(g.number_of_edges())),
            ("mean_degree", stats.mean),
            ("mode_degree", float(stats.mode)),
            ("max_degree", float(stats.max)),
            ("global_clustering", global_clustering(g)),
            ("average_local_clustering", average_local_clustering(g)),
        ]
        if g.n > 1:
            rows.append(("random_graph_clustering", stats.mean / (g.n - 1)))
            components = nx.number_connected_components(g.graph)
            rows.append(("components", float(components)))
            if components == 1:
                rows.append(("avg_shortest_path", avg_shortest_path_sampled(g, sample_pairs, seed)))
                if stats.mean > 1.0:
                    rows.append(("small_world_bound", 2.0 * math.log(g.n) / math.log(stats.mean)))
            else:
                logger.warning(f"⚠ Graphe non connexe ({components} composantes): chemins ignorés")
        mean_km, short_fraction = edge_distance_stats(g)
        rows.append(("mean_edge_km", mean_km))
        rows.append(("short_link_fraction", short_fraction))
        for category in InterestCategory:
            rows.append((f"shared_{category.value}", shared_interest_fraction(g, category)))

        logger.info(f"✓ Analyse terminée: {stats}")
        return pd.DataFrame(rows, columns=["metric", "value"])
