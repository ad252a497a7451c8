"""Multicast applicatif: arbre social, ESM/Narada et NICE.

Les trois protocoles partagent la même matrice de délais membre à membre
(délais d'accès + plus court chemin underlay) et produisent un OverlayTree
évalué par delivery_stats.
"""

import heapq
import logging
from collections import deque
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from typing import Literal, Optional

import networkx as nx
import numpy as np
from scipy.sparse.csgraph import csgraph_from_dense, shortest_path

from src.models.overlay import (
    EsmMesh,
    MulticastGroup,
    NiceCluster,
    NiceHierarchy,
    OverlayTree,
    Placement,
)
from src.models.social import SocialGraph
from src.models.topology import UnderlayGraph
from src.simulation.embedding import user_delay
from src.utils.errors import DisconnectedGraphError, GroupSizeError
from src.utils.seeding import make_rng

logger = logging.getLogger(__name__)

SocialTreeMode = Literal["shortest_delay", "bfs", "highest_degree"]
_REFINE_ROUNDS = 10


# =============================================================================
# GROUPES ET DÉLAIS
# =============================================================================


def select_friend_group(
    g: SocialGraph,
    seed_user: int,
    target_size: int,
    allowed: Optional[set[int]] = None,
) -> MulticastGroup:
    """
    Groupe d'amis obtenu par parcours en largeur depuis seed_user.

    Args:
        g: Graphe social
        seed_user: Membre de départ (source du groupe)
        target_size: Taille voulue (≥ 1)
        allowed: Membres autorisés (par exemple les membres placés)

    Raises:
        GroupSizeError: composante trop petite (porte la taille atteignable)
    """
    if target_size < 1:
        raise ValueError("target_size doit être >= 1")
    if allowed is not None and seed_user not in allowed:
        raise ValueError(f"Membre {seed_user} hors de l'ensemble autorisé")

    members = [seed_user]
    visited = {seed_user}
    queue = deque([seed_user])
    while queue and len(members) < target_size:
        u = queue.popleft()
        for v in g.neighbors(u):
            if v in visited or (allowed is not None and v not in allowed):
                continue
            visited.add(v)
            members.append(v)
            queue.append(v)
            if len(members) == target_size:
                break
    if len(members) < target_size:
        raise GroupSizeError(target_size, len(members))
    return MulticastGroup(members=tuple(sorted(members)), source=seed_user)


def delay_matrix(members: tuple[int, ...], placement: Placement, underlay: UnderlayGraph) -> np.ndarray:
    """Matrice symétrique des délais membre à membre (ordre de members)."""
    n = len(members)
    matrix = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            matrix[i, j] = matrix[j, i] = user_delay(placement, underlay, members[i], members[j])
    return matrix


def _shortest_delay_tree(
    source: int, neighbors: Mapping[int, Iterable[int]], weight: Mapping[tuple[int, int], float]
) -> tuple[dict[int, int], dict[int, float]]:
    """Dijkstra; à délai égal, le plus petit membre puis le plus petit parent l'emportent."""
    parent: dict[int, int] = {}
    delay: dict[int, float] = {}
    heap: list[tuple[float, int, int]] = [(0.0, source, source)]
    while heap:
        d, u, p = heapq.heappop(heap)
        if u in parent:
            continue
        parent[u] = p
        delay[u] = d
        for v in neighbors[u]:
            if v not in parent:
                heapq.heappush(heap, (d + weight[(u, v)], v, u))
    return parent, delay


def _tree_delays(source: int, parent: Mapping[int, int], index: Mapping[int, int], matrix: np.ndarray) -> dict[int, float]:
    """Délais cumulés le long des chemins de l'arbre."""
    children: dict[int, list[int]] = {}
    for child, p in parent.items():
        if child != source:
            children.setdefault(p, []).append(child)
    delay = {source: 0.0}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for child in sorted(children.get(u, [])):
            delay[child] = delay[u] + float(matrix[index[u], index[child]])
            queue.append(child)
    return delay


# =============================================================================
# ARBRE SOCIAL
# =============================================================================


def build_social_tree(
    group: MulticastGroup,
    g: SocialGraph,
    placement: Placement,
    underlay: UnderlayGraph,
    mode: SocialTreeMode = "shortest_delay",
    matrix: Optional[np.ndarray] = None,
) -> OverlayTree:
    """
    Arbre de diffusion le long des liens d'amitié entre membres du groupe.

    Args:
        group: Groupe (sous-graphe induit connexe)
        g: Graphe social
        placement: Placement des membres
        underlay: Topologie
        mode: shortest_delay (Dijkstra sur user_delay), bfs (arbre en largeur)
            ou highest_degree (chaque membre se rattache à l'ami déjà atteint
            de plus fort degré social)
        matrix: Délais membre à membre déjà calculés (ordre de group.members)

    Raises:
        DisconnectedGraphError: sous-graphe induit non connexe
    """
    members = group.members
    member_set = set(members)
    index = {u: i for i, u in enumerate(members)}
    if matrix is None:
        matrix = delay_matrix(members, placement, underlay)
    neighbors = {u: [v for v in g.neighbors(u) if v in member_set] for u in members}

    induced = nx.Graph()
    induced.add_nodes_from(members)
    induced.add_edges_from((u, v) for u in members for v in neighbors[u])
    components = nx.number_connected_components(induced)
    if components > 1:
        raise DisconnectedGraphError(components)

    source = group.source
    if mode == "shortest_delay":
        weight = {(u, v): float(matrix[index[u], index[v]]) for u in members for v in neighbors[u]}
        parent, _ = _shortest_delay_tree(source, neighbors, weight)
    else:
        parent = {source: source}
        level = [source]
        while level:
            next_level = sorted({v for u in level for v in neighbors[u] if v not in parent})
            settled = set(parent)
            for v in next_level:
                reached = [u for u in neighbors[v] if u in settled]
                if mode == "bfs":
                    parent[v] = min(reached)
                else:
                    parent[v] = max(reached, key=lambda u: (g.degree(u), -u))
            level = next_level

    return OverlayTree(
        protocol="social",
        source=source,
        parent=parent,
        delay=_tree_delays(source, parent, index, matrix),
    )


# =============================================================================
# ESM / NARADA
# =============================================================================


def _mesh_distances(
    n: int, edges: Iterable[tuple[int, int]], matrix: np.ndarray, source: Optional[int] = None
) -> np.ndarray:
    """Plus courts chemins dans le maillage (indices locaux), depuis source seule si donnée; inf si non relié."""
    dense = np.full((n, n), np.inf)
    for i, j in edges:
        dense[i, j] = dense[j, i] = matrix[i, j]
    graph = csgraph_from_dense(dense, null_value=np.inf)
    if source is None:
        return shortest_path(graph, method="D", directed=False)
    return shortest_path(graph, method="D", directed=False, indices=source)


def _mesh_cost(distances: np.ndarray) -> float:
    return float(distances.sum() / 2.0)


def _initial_mesh(n: int, degree_bound: int, rng: np.random.Generator) -> set[tuple[int, int]]:
    """Arbre couvrant aléatoire sous la borne de degré, puis arêtes supplémentaires."""
    order = [int(i) for i in rng.permutation(n)]
    degree = [0] * n
    edges: set[tuple[int, int]] = set()

    def add(i: int, j: int) -> None:
        edges.add((min(i, j), max(i, j)))
        degree[i] += 1
        degree[j] += 1

    for position in range(1, n):
        open_nodes = [u for u in order[:position] if degree[u] < degree_bound]
        add(order[position], open_nodes[int(rng.integers(len(open_nodes)))])
    for _ in range(n):
        i, j = (int(x) for x in rng.integers(n, size=2))
        if i != j and (min(i, j), max(i, j)) not in edges and max(degree[i], degree[j]) < degree_bound:
            add(i, j)
    return edges


def _improve_member(
    i: int, edges: set[tuple[int, int]], matrix: np.ndarray, degree_bound: int,
    current: np.ndarray,
) -> Optional[tuple[set[tuple[int, int]], np.ndarray]]:
    """
    Échange de la pire arête de i (non-pont) contre la meilleure non-arête.

    Le candidat j minimise la somme des distances de i, estimée avec les tables
    actuelles de j; l'échange n'est vérifié sur tout le maillage que s'il
    améliore i, et n'est retenu que si le coût global baisse strictement.
    """
    n = len(matrix)
    incident = sorted(
        (b if a == i else a for a, b in edges if i in (a, b)),
        key=lambda j: (-matrix[i, j], j),
    )
    degree = np.zeros(n, dtype=int)
    for a, b in edges:
        degree[a] += 1
        degree[b] += 1
    neighbors = set(incident)

    for worst in incident:
        removed = (min(i, worst), max(i, worst))
        remaining = edges - {removed}
        without = _mesh_distances(n, remaining, matrix, source=i)
        if np.isinf(without[worst]):
            continue
        degree_after = degree.copy()
        degree_after[worst] -= 1
        candidates = np.array([
            j for j in range(n)
            if j != i and j not in neighbors and degree_after[j] < degree_bound
        ], dtype=int)
        if candidates.size == 0:
            return None
        reach = np.minimum(without[None, :], matrix[i, candidates][:, None] + current[candidates, :])
        sums = reach.sum(axis=1)
        best = int(np.argmin(sums))
        if sums[best] >= current[i].sum():
            return None

        j = int(candidates[best])
        proposed = remaining | {(min(i, j), max(i, j))}
        distances = _mesh_distances(n, proposed, matrix)
        if _mesh_cost(distances) < _mesh_cost(current):
            return proposed, distances
        return None
    return None


def build_esm_mesh(
    members: tuple[int, ...],
    matrix: np.ndarray,
    mesh_degree: int = 5,
    improvement_rounds: int = 20,
    seed: int = 0,
) -> EsmMesh:
    """
    Construit et améliore le maillage ESM (indices locaux convertis en membres).

    Chaque ronde, chaque membre (par id croissant) tente un échange d'arête;
    cost_history contient le coût initial puis le coût après chaque ronde.
    """
    n = len(members)
    rng = make_rng(seed)
    local_edges = _initial_mesh(n, mesh_degree, rng)
    distances = _mesh_distances(n, local_edges, matrix)
    history = [_mesh_cost(distances)]

    for round_index in range(improvement_rounds):
        accepted = 0
        for i in range(n):
            result = _improve_member(i, local_edges, matrix, mesh_degree, distances)
            if result is not None:
                local_edges, distances = result
                accepted += 1
        history.append(_mesh_cost(distances))
        logger.debug(f"ESM ronde {round_index + 1}: {accepted} échanges, coût {history[-1]:.1f}")
        if accepted == 0:
            break

    edges = {(members[a], members[b]) for a, b in local_edges}
    return EsmMesh(members=members, edges=edges, degree_bound=mesh_degree, cost_history=history)


def build_esm_tree(
    group: MulticastGroup,
    placement: Placement,
    underlay: UnderlayGraph,
    mesh_degree: int = 5,
    improvement_rounds: int = 20,
    seed: int = 0,
    matrix: Optional[np.ndarray] = None,
) -> tuple[OverlayTree, EsmMesh]:
    """
    Arbre ESM: maillage amélioré puis arbre des plus courts chemins depuis la source.

    Les délais étant symétriques, l'arbre inverse de Narada coïncide avec l'arbre direct.

    Returns:
        (arbre, maillage)
    """
    members = group.members
    index = {u: i for i, u in enumerate(members)}
    if matrix is None:
        matrix = delay_matrix(members, placement, underlay)
    mesh = build_esm_mesh(members, matrix, mesh_degree, improvement_rounds, seed)

    neighbors = {u: mesh.neighbors(u) for u in members}
    weight = {(u, v): float(matrix[index[u], index[v]]) for u in members for v in neighbors[u]}
    parent, _ = _shortest_delay_tree(group.source, neighbors, weight)
    tree = OverlayTree(
        protocol="esm",
        source=group.source,
        parent=parent,
        delay=_tree_delays(group.source, parent, index, matrix),
    )
    return tree, mesh


# =============================================================================
# NICE
# =============================================================================


def _leader(cluster: list[int], matrix: np.ndarray) -> int:
    """Membre minimisant son délai maximal aux pairs du cluster (plus petit indice en cas d'égalité)."""
    sub = matrix[np.ix_(cluster, cluster)]
    return cluster[int(np.argmin(sub.max(axis=1)))]


def _split(cluster: list[int], matrix: np.ndarray) -> tuple[list[int], list[int]]:
    """Coupe en deux moitiés autour de la paire la plus éloignée."""
    sub = matrix[np.ix_(cluster, cluster)]
    a, b = np.unravel_index(int(np.argmax(sub)), sub.shape)
    pole_a, pole_b = cluster[int(a)], cluster[int(b)]
    ordered = sorted(cluster, key=lambda x: (matrix[x, pole_a] - matrix[x, pole_b], x))
    half = len(ordered) // 2
    return sorted(ordered[:half]), sorted(ordered[half:])


def _refine_groups(sub: np.ndarray, centers: list[int]) -> list[np.ndarray]:
    """Affectation au centre le plus proche, puis recentrage sur le leader de chaque groupe."""
    groups = [np.flatnonzero(np.argmin(sub[:, centers], axis=1) == c) for c in range(len(centers))]
    groups = [group for group in groups if group.size]
    for _ in range(_REFINE_ROUNDS):
        leaders = [int(group[np.argmin(sub[np.ix_(group, group)].max(axis=1))]) for group in groups]
        assignment = np.argmin(sub[:, leaders], axis=1)
        regrouped = [np.flatnonzero(assignment == c) for c in range(len(leaders))]
        regrouped = [group for group in regrouped if group.size]
        if len(regrouped) == len(groups) and all(np.array_equal(a, b) for a, b in zip(regrouped, groups)):
            break
        groups = regrouped
    return groups


def _cluster_layer(nodes: list[int], matrix: np.ndarray, k: int) -> list[list[int]]:
    """Regroupe les nœuds (indices locaux) en clusters de taille [k, 3k−1]."""
    upper = 3 * k - 1
    if len(nodes) <= upper:
        return [sorted(nodes)]

    sub = matrix[np.ix_(nodes, nodes)]
    centers = [int(np.argmin(sub.sum(axis=1)))]
    target = max(1, len(nodes) // (2 * k))
    while len(centers) < target:
        nearest = sub[:, centers].min(axis=1)
        nearest[centers] = -1.0
        centers.append(int(np.argmax(nearest)))
    groups = _refine_groups(sub, centers)
    clusters = [sorted(nodes[i] for i in group) for group in groups]

    while True:
        oversized = [c for c in clusters if len(c) > upper]
        if oversized:
            cluster = oversized[0]
            clusters.remove(cluster)
            clusters.extend(_split(cluster, matrix))
            continue
        undersized = sorted((c for c in clusters if len(c) < k), key=lambda c: (len(c), c[0]))
        if not undersized:
            break
        small = undersized[0]
        clusters.remove(small)
        leader = _leader(small, matrix)
        target_cluster = min(clusters, key=lambda c: (matrix[leader, _leader(c, matrix)], c[0]))
        clusters.remove(target_cluster)
        clusters.append(sorted(target_cluster + small))
    return sorted(clusters, key=lambda c: c[0])


def build_nice_hierarchy(
    group: MulticastGroup,
    placement: Placement,
    underlay: UnderlayGraph,
    k: int = 3,
    matrix: Optional[np.ndarray] = None,
) -> NiceHierarchy:
    """
    Hiérarchie NICE statique.

    La couche 0 regroupe les membres proches en délai; chaque couche suivante
    regroupe les leaders de la précédente, jusqu'à un cluster unique.
    """
    if k < 2:
        raise ValueError("k doit être >= 2")
    members = group.members
    if matrix is None:
        matrix = delay_matrix(members, placement, underlay)

    layers: list[tuple[NiceCluster, ...]] = []
    nodes = list(range(len(members)))
    while True:
        clusters = _cluster_layer(nodes, matrix, k)
        layer = tuple(
            NiceCluster(members=tuple(members[i] for i in c), leader=members[_leader(c, matrix)])
            for c in clusters
        )
        layers.append(layer)
        if len(layer) == 1:
            break
        nodes = sorted(_leader(c, matrix) for c in clusters)
    return NiceHierarchy(k=k, layers=tuple(layers))


def nice_delivery(
    h: NiceHierarchy,
    source: int,
    placement: Placement,
    underlay: UnderlayGraph,
) -> OverlayTree:
    """
    Chemins de données NICE depuis source.

    La source transmet à tous les membres de tous ses clusters; un membre
    transmet à tous les clusters auxquels il appartient sauf celui d'où vient
    le message. Seule la première réception compte (délai, puis id).
    """
    membership: dict[int, list[tuple[int, int]]] = {}
    clusters: dict[tuple[int, int], NiceCluster] = {}
    for layer_index, layer in enumerate(h.layers):
        for cluster_index, cluster in enumerate(layer):
            key = (layer_index, cluster_index)
            clusters[key] = cluster
            for member in cluster.members:
                membership.setdefault(member, []).append(key)
    if source not in membership:
        raise ValueError(f"La source {source} n'appartient pas à la hiérarchie")

    parent: dict[int, int] = {}
    delay: dict[int, float] = {}
    heap: list[tuple[float, int, int, tuple[int, int]]] = [(0.0, source, source, (-1, -1))]
    while heap:
        d, u, sender, via = heapq.heappop(heap)
        if u in parent:
            continue
        parent[u] = sender
        delay[u] = d
        for key in membership[u]:
            if key == via:
                continue
            for v in clusters[key].members:
                if v not in parent:
                    heapq.heappush(heap, (d + user_delay(placement, underlay, u, v), v, u, key))
    return OverlayTree(protocol="nice", source=source, parent=parent, delay=delay)


# =============================================================================
# ÉVALUATION
# =============================================================================


@dataclass(frozen=True)
class DeliveryStats:
    """Délais de livraison, stress des liens physiques et étirement moyen."""

    mean_delay_ms: float
    max_delay_ms: float
    stress: dict[tuple[int, int], int]
    mean_stretch: float

    @property
    def max_stress(self) -> int:
        return max(self.stress.values(), default=0)


def delivery_stats(tree: OverlayTree, underlay: UnderlayGraph, placement: Placement) -> DeliveryStats:
    """
    Évalue un arbre de diffusion.

    Le stress d'un lien physique est le nombre d'arêtes de l'arbre dont le
    chemin underlay le traverse (liens d'accès exclus). L'étirement d'un
    récepteur est son délai de livraison divisé par le délai direct depuis la
    source (1 si ce délai est nul).
    """
    receivers = [m for m in tree.members if m != tree.source]
    stress: dict[tuple[int, int], int] = {}
    for p, child in tree.edges():
        path = underlay.shortest_path(placement.router_of(p), placement.router_of(child))
        for a, b in zip(path, path[1:]):
            key = (min(a, b), max(a, b))
            stress[key] = stress.get(key, 0) + 1

    if not receivers:
        return DeliveryStats(mean_delay_ms=0.0, max_delay_ms=0.0, stress=stress, mean_stretch=1.0)

    delays = np.array([tree.delay[m] for m in receivers])
    stretch = []
    for m, d in zip(receivers, delays):
        direct = user_delay(placement, underlay, tree.source, m)
        stretch.append(float(d) / direct if direct > 0 else 1.0)
    return DeliveryStats(
        mean_delay_ms=float(delays.mean()),
        max_delay_ms=float(delays.max()),
        stress=stress,
        mean_stretch=float(np.mean(stretch)),
    )
