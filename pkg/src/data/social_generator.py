"""Génération d'un graphe social synthétique.

Croissance par attachement préférentiel (degré + 1), tantôt local (cibles dans
un rayon géographique), tantôt global, avec des étapes de fermeture de triangle
à la Holme-Kim. Les jetons d'intérêt suivent une loi de Zipf par catégorie;
chaque nouveau membre recopie un jeton d'un de ses nouveaux amis avec la
probabilité d'homophilie de la catégorie.
"""

import logging
import math
from typing import Optional

import networkx as nx
import numpy as np
from tqdm import tqdm

from src.models.social import (
    CATEGORIES,
    GeoModel,
    SocialGenParams,
    SocialGraph,
    UserProfile,
)
from src.utils.geo import haversine_km
from src.utils.seeding import make_rng

logger = logging.getLogger(__name__)

KM_PER_DEGREE = 111.32
_PA_RETRIES = 32


class SocialGraphGenerator:
    """Générateur de graphe social déterministe pour (params, geo, seed)."""

    def __init__(
        self,
        params: Optional[SocialGenParams] = None,
        geo: Optional[GeoModel] = None,
        seed: int = 0,
        progress: bool = False,
    ):
        """
        Initialise le générateur.

        Args:
            params: Paramètres de génération (par défaut: SocialGenParams())
            geo: Modèle géographique (par défaut: GeoModel())
            seed: Graine 64 bits
            progress: Affiche une barre de progression tqdm
        """
        self.params = params or SocialGenParams()
        self.geo = geo or GeoModel()
        self.seed = seed
        self.progress = progress
        self.rng = make_rng(seed)

        n = self.params.n
        self.degree = np.zeros(n, dtype=np.int64)
        self.adjacency: list[list[int]] = [[] for _ in range(n)]
        self.interests: list[list[set[int]]] = []
        self.region = np.zeros(n, dtype=np.int64)
        self.lat = np.zeros(n)
        self.lon = np.zeros(n)

    def generate(self) -> SocialGraph:
        """
        Génère le graphe complet.

        Returns:
            SocialGraph connexe, degré maximal ≤ max_degree_cap
        """
        n = self.params.n
        logger.info(f"Génération du graphe social: {n} membres (graine {self.seed})")

        self._assign_locations()
        self._assign_interests()
        self._grow()
        self._repair_connectivity()

        profiles = [
            UserProfile(
                id=u,
                region=int(self.region[u]),
                lat=float(self.lat[u]),
                lon=float(self.lon[u]),
                interests={
                    category: tuple(sorted(self.interests[c][u]))
                    for c, category in enumerate(CATEGORIES)
                },
            )
            for u in range(n)
        ]
        edges = [(u, v) for u in range(n) for v in self.adjacency[u] if u < v]
        graph = SocialGraph.from_edges(n, edges, profiles)

        mean_degree = 2.0 * len(edges) / n if n else 0.0
        logger.info(
            f"✓ Graphe généré: {n} nœuds, {len(edges)} arêtes, degré moyen {mean_degree:.2f}, "
            f"degré max {int(self.degree.max()) if n else 0}"
        )
        return graph

    def _assign_locations(self) -> None:
        """Tire la région puis une dispersion gaussienne (km) autour de son centre."""
        n = self.params.n
        if n == 0:
            return
        regions = self.geo.regions
        weights = np.array([r.weight for r in regions], dtype=float)
        weights = weights / weights.sum()
        self.region = self.rng.choice(len(regions), size=n, p=weights)

        centers_lat = np.array([r.lat for r in regions])[self.region]
        centers_lon = np.array([r.lon for r in regions])[self.region]
        dispersion = np.array([r.dispersion_km for r in regions])[self.region]
        offsets = self.rng.normal(size=(n, 2)) * dispersion[:, None]

        lat = np.clip(centers_lat + offsets[:, 0] / KM_PER_DEGREE, -90.0, 90.0)
        cos_lat = np.maximum(np.cos(np.radians(lat)), 0.01)
        lon = centers_lon + offsets[:, 1] / (KM_PER_DEGREE * cos_lat)
        self.lat = lat
        self.lon = (lon + 180.0) % 360.0 - 180.0

    def _assign_interests(self) -> None:
        """Jetons initiaux: 1 + Poisson(moyenne - 1) jetons distincts, popularité Zipf."""
        n = self.params.n
        vocab = self.params.vocab_size
        popularity = np.arange(1, vocab + 1, dtype=float) ** -self.params.zipf_exponent
        popularity /= popularity.sum()

        self.interests = []
        for _ in CATEGORIES:
            counts = np.minimum(
                1 + self.rng.poisson(self.params.tokens_per_category - 1.0, size=n), vocab
            )
            width = int(counts.max()) if n else 0
            draws = self.rng.choice(vocab, size=(n, width), p=popularity) if n else None
            per_user: list[set[int]] = []
            for u in range(n):
                per_user.append({int(tok) for tok in draws[u, : counts[u]]})
            self.interests.append(per_user)

    def _link(self, u: int, v: int) -> None:
        self.adjacency[u].append(v)
        self.adjacency[v].append(u)
        self.degree[u] += 1
        self.degree[v] += 1

    def _copy_interests(self, newcomer: int, friends: list[int]) -> None:
        """Homophilie: par catégorie, le nouveau membre recopie un jeton d'un de ses nouveaux amis."""
        if not friends:
            return
        draws = self.rng.random(len(CATEGORIES))
        for c, category in enumerate(CATEGORIES):
            if draws[c] < self.params.homophily[category]:
                friend = friends[int(self.rng.integers(len(friends)))]
                donor = sorted(self.interests[c][friend])
                self.interests[c][newcomer].add(donor[int(self.rng.integers(len(donor)))])

    def _grow(self) -> None:
        """
        Croissance nœud par nœud.

        Chaque étape d'attachement est locale avec la probabilité
        locality_strength: la cible est alors tirée parmi les membres situés
        à moins de locality_radius_km (repli sur un tirage global si aucun).
        """
        n = self.params.n
        cap = self.params.max_degree_cap
        half = self.params.target_mean_degree / 2.0
        m_floor = int(math.floor(half))
        m_per_node = m_floor + (self.rng.random(n) < half - m_floor).astype(np.int64)
        strength = self.params.locality_strength
        radius = self.params.locality_radius_km

        for t in tqdm(range(1, n), desc="Croissance", disable=not self.progress):
            k = int(min(m_per_node[t], t, cap))
            if k == 0:
                continue

            near = haversine_km(self.lat[t], self.lon[t], self.lat[:t], self.lon[:t]) <= radius
            weights = self.degree[:t] + 1.0
            weights[self.degree[:t] >= cap] = 0.0
            local_weights = np.where(near, weights, 0.0)
            pools = {
                False: (np.cumsum(weights), weights),
                True: (np.cumsum(local_weights), local_weights),
            }
            if pools[False][0][-1] <= 0.0:
                continue

            chosen: list[int] = []
            last_pa: Optional[int] = None
            while len(chosen) < k:
                local = strength > 0.0 and self.rng.random() < strength
                if last_pa is not None and self.rng.random() < self.params.triad_prob:
                    closing = [
                        x for x in self.adjacency[last_pa]
                        if x != t and x not in chosen and self.degree[x] < cap and (not local or near[x])
                    ]
                    if closing:
                        target = closing[int(self.rng.integers(len(closing)))]
                        chosen.append(target)
                        self._link(t, target)
                        continue

                cumulative, pool = pools[local]
                target = None
                if cumulative[-1] > 0.0:
                    target = self._draw_preferential(cumulative, float(cumulative[-1]), pool, set(chosen))
                if target is None and local:
                    cumulative, pool = pools[False]
                    target = self._draw_preferential(cumulative, float(cumulative[-1]), pool, set(chosen))
                if target is None:
                    break
                chosen.append(target)
                self._link(t, target)
                last_pa = target

            self._copy_interests(t, chosen)

    def _draw_preferential(
        self, cumulative: np.ndarray, total: float, weights: np.ndarray, exclude: set[int]
    ) -> Optional[int]:
        for _ in range(_PA_RETRIES):
            j = int(np.searchsorted(cumulative, self.rng.random() * total, side="right"))
            j = min(j, len(weights) - 1)
            if j not in exclude and weights[j] > 0.0:
                return j
        remaining = [j for j in np.flatnonzero(weights > 0.0) if int(j) not in exclude]
        if not remaining:
            return None
        return int(remaining[int(self.rng.integers(len(remaining)))])

    def _repair_connectivity(self) -> None:
        """Relie chaque petite composante (nœud de plus haut degré) au nœud le plus proche de la géante."""
        n = self.params.n
        if n <= 1:
            return
        g = nx.Graph()
        g.add_nodes_from(range(n))
        g.add_edges_from((u, v) for u in range(n) for v in self.adjacency[u] if u < v)
        components = sorted(
            (sorted(c) for c in nx.connected_components(g)), key=lambda c: (-len(c), c[0])
        )
        if len(components) == 1:
            return

        logger.warning(f"⚠ {len(components)} composantes après croissance, réparation")
        giant = np.array(components[0])
        cap = self.params.max_degree_cap
        for component in components[1:]:
            hub = min(component, key=lambda u: (-self.degree[u], u))
            open_nodes = giant[self.degree[giant] < cap]
            if open_nodes.size == 0:
                open_nodes = giant
            distance = haversine_km(self.lat[hub], self.lon[hub], self.lat[open_nodes], self.lon[open_nodes])
            order = np.lexsort((open_nodes, distance))
            anchor = int(open_nodes[order[0]])
            self.adjacency[hub].append(anchor)
            self.adjacency[anchor].append(hub)
            self.degree[hub] += 1
            self.degree[anchor] += 1
            giant = np.concatenate([giant, np.array(component)])


def generate_social_graph(
    params: Optional[SocialGenParams] = None,
    geo: Optional[GeoModel] = None,
    seed: int = 0,
    progress: bool = False,
) -> SocialGraph:
    """Génère un graphe social (voir SocialGraphGenerator)."""
    return SocialGraphGenerator(params=params, geo=geo, seed=seed, progress=progress).generate()
