"""Simulation du routage de requêtes par centres d'intérêt sur l'overlay social.

Les requêtes progressent par rondes synchrones (tous les messages du saut h
avant ceux du saut h+1), dans l'ordre (émetteur, destinataire). Un nœud qui
détient le jeton répond directement au demandeur; la recherche s'arrête à la
fin de la ronde du premier succès.
"""

import logging
from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import pandas as pd
from tqdm import tqdm

from src.models.overlay import (
    FriendEntry,
    PeerState,
    Placement,
    Query,
    QueryMetrics,
    QueryRecord,
    QuerySimParams,
    RoutingPolicy,
    Workload,
)
from src.models.social import CATEGORIES, InterestCategory, SocialGraph
from src.models.topology import UnderlayGraph
from src.simulation.embedding import user_delay
from src.utils.errors import PlacementError
from src.utils.seeding import make_rng

logger = logging.getLogger(__name__)

QUERY_SIM_COLUMNS = [
    "policy", "seed", "epoch", "success_rate", "mean_hops", "mean_msgs", "mean_latency_ms",
]

DegreeOf = Callable[[int], int]


def build_peer_states(g: SocialGraph) -> dict[int, PeerState]:
    """États initiaux: amis du graphe social (entrées d'origine), contenu du profil."""
    return {
        u: PeerState(
            owner=u,
            friends={v: FriendEntry(peer=v) for v in g.neighbors(u)},
            content={c: frozenset(g.profiles[u].tokens(c)) for c in CATEGORIES},
        )
        for u in range(g.n)
    }


def forward_set(
    state: PeerState,
    query: Query,
    policy: RoutingPolicy,
    degree_of: DegreeOf,
    arrived_from: Optional[int] = None,
    include_acquired: bool = True,
) -> list[int]:
    """
    Amis vers lesquels relayer la requête.

    Args:
        state: État du pair qui relaie
        query: Requête (ttl > 0)
        policy: flood, highest_degree(k) ou interest_weighted(k)
        degree_of: Degré courant d'un pair
        arrived_from: Pair d'où vient la requête (exclu)
        include_acquired: Inclut les amis acquis par adaptation

    Returns:
        Pairs choisis, triés selon le critère de la politique
    """
    excluded = {query.origin, arrived_from, state.owner}
    candidates = [
        peer
        for peer, entry in state.friends.items()
        if peer not in excluded and (include_acquired or entry.original)
    ]
    if policy.kind == "flood":
        return sorted(candidates)
    if policy.kind == "highest_degree":
        ranked = sorted(candidates, key=lambda p: (-degree_of(p), p))
    else:
        ranked = sorted(
            candidates,
            key=lambda p: (-state.friends[p].strength[query.category], -degree_of(p), p),
        )
    return ranked[: policy.k]


def on_hit_update(
    requester: PeerState,
    responder: PeerState,
    query: Query,
    precision: float,
    alpha: float = 0.3,
    responder_strength: float = 0.5,
) -> None:
    """
    Met à jour les listes d'amis après une réponse.

    Côté demandeur: force ← (1−α)·ancienne + α·précision (ancienne = 0 pour une
    nouvelle entrée). Côté répondant: ajout du demandeur avec la force initiale
    responder_strength s'il n'est pas déjà ami.
    """
    entry = requester.friends.get(responder.owner)
    if entry is None:
        entry = FriendEntry(peer=responder.owner, original=False)
        requester.friends[responder.owner] = entry
    old = entry.strength[query.category]
    entry.set_strength(query.category, (1.0 - alpha) * old + alpha * precision)
    entry.hits += 1

    if requester.owner not in responder.friends:
        back = FriendEntry(peer=requester.owner, original=False)
        back.set_strength(query.category, responder_strength)
        responder.friends[requester.owner] = back


def evict(
    state: PeerState,
    min_queries: int = 10,
    floor: float = 0.05,
    states: Optional[Mapping[int, PeerState]] = None,
) -> list[int]:
    """
    Retire les amis acquis qui ne répondent presque jamais.

    Une entrée acquise est retirée après au moins min_queries observations si sa
    force maximale reste sous floor; les amis d'origine ne sont jamais retirés.
    Si states est fourni, l'entrée réciproque acquise est retirée aussi.

    Returns:
        Pairs retirés
    """
    removed = [
        peer
        for peer, entry in state.friends.items()
        if not entry.original and entry.observations >= min_queries and entry.max_strength() < floor
    ]
    for peer in removed:
        del state.friends[peer]
        if states is not None:
            back = states[peer].friends.get(state.owner)
            if back is not None and not back.original:
                del states[peer].friends[state.owner]
    return removed


@dataclass(frozen=True)
class _Message:
    sender: int
    target: int
    ttl: int
    delay_ms: float
    hint: Optional[int] = None


@dataclass
class QuerySimResult:
    """Résultat d'une simulation: métriques globales, série par époque et détail."""

    policy: str
    seed: int
    metrics: QueryMetrics
    epochs: list[QueryMetrics]
    records: list[QueryRecord] = field(repr=False)

    def to_frame(self) -> pd.DataFrame:
        rows = [
            (self.policy, self.seed, epoch, m.success_rate, m.mean_hops, m.mean_messages,
             m.mean_latency_ms)
            for epoch, m in enumerate(self.epochs)
        ]
        return pd.DataFrame(rows, columns=QUERY_SIM_COLUMNS)


def generate_workload(g: SocialGraph, workload: Workload, seed: int) -> list[tuple[int, InterestCategory, int]]:
    """
    Tire la suite (origine, catégorie, jeton) des requêtes.

    stationary: un groupe fixe de demandeurs, chacun avec des souhaits fixes pris
    dans le profil d'autres membres. zipf: origine uniforme, jeton tiré selon son
    nombre de détenteurs.
    """
    if g.n < 2:
        raise ValueError("La charge de requêtes exige au moins deux membres")
    rng = make_rng(seed)
    queries: list[tuple[int, InterestCategory, int]] = []

    if workload.token_distribution == "stationary":
        pool = sorted(int(u) for u in rng.choice(g.n, size=min(workload.requesters, g.n), replace=False))
        wants: dict[int, list[tuple[InterestCategory, int]]] = {}
        for requester in pool:
            wants[requester] = []
            for _ in range(workload.wants_per_requester):
                category = CATEGORIES[int(rng.integers(len(CATEGORIES)))]
                donor = int(rng.integers(g.n - 1))
                donor = donor + 1 if donor >= requester else donor
                tokens = g.profiles[donor].tokens(category)
                wants[requester].append((category, tokens[int(rng.integers(len(tokens)))]))
        for _ in range(workload.num_queries):
            requester = pool[int(rng.integers(len(pool)))]
            category, token = wants[requester][int(rng.integers(len(wants[requester])))]
            queries.append((requester, category, token))
        return queries

    popularity: dict[InterestCategory, tuple[np.ndarray, np.ndarray]] = {}
    for category in CATEGORIES:
        counts: dict[int, int] = {}
        for profile in g.profiles:
            for tok in profile.tokens(category):
                counts[tok] = counts.get(tok, 0) + 1
        tokens = np.array(sorted(counts))
        weights = np.array([counts[t] for t in tokens], dtype=float)
        popularity[category] = (tokens, weights / weights.sum())
    for _ in range(workload.num_queries):
        origin = int(rng.integers(g.n))
        category = CATEGORIES[int(rng.integers(len(CATEGORIES)))]
        tokens, probs = popularity[category]
        queries.append((origin, category, int(rng.choice(tokens, p=probs))))
    return queries


class QuerySimulator:
    """Simulateur de requêtes sur l'overlay social, adaptatif ou non."""

    def __init__(
        self,
        g: SocialGraph,
        policy: RoutingPolicy,
        params: Optional[QuerySimParams] = None,
        placement: Optional[Placement] = None,
        underlay: Optional[UnderlayGraph] = None,
    ):
        """
        Initialise le simulateur.

        Args:
            g: Graphe social (listes d'amis initiales)
            policy: Politique de relais
            params: Paramètres de simulation
            placement: Placement de tous les membres (optionnel, pour la latence)
            underlay: Topologie associée au placement
        """
        self.g = g
        self.policy = policy
        self.params = params or QuerySimParams()
        self.placement = placement
        self.underlay = underlay
        if placement is not None:
            if underlay is None:
                raise ValueError("Un placement exige la topologie underlay")
            missing = [u for u in range(g.n) if u not in placement]
            if missing:
                raise PlacementError(f"{len(missing)} membres non placés (ex: {missing[0]})")
        self.states = build_peer_states(g)
        for state in self.states.values():
            self._refresh_vicinity(state)
        self._next_query_id = 0

    def degree_of(self, peer: int) -> int:
        return self.states[peer].degree

    def _delay(self, a: int, b: int) -> float:
        if self.placement is None or self.underlay is None:
            return 0.0
        return user_delay(self.placement, self.underlay, a, b)

    def _refresh_vicinity(self, state: PeerState) -> None:
        """Table des pairs à deux sauts (→ ami commun de plus petit id), supernœuds uniquement."""
        if state.degree < self.params.supernode_threshold:
            state.vicinity = None
            return
        vicinity: dict[int, int] = {}
        for friend in sorted(state.friends):
            for peer in sorted(self.states[friend].friends):
                if peer != state.owner and peer not in state.friends:
                    vicinity.setdefault(peer, friend)
        state.vicinity = vicinity

    def _supernode_route(self, state: PeerState, query: Query, ttl: int, excluded: set[int]) -> Optional[tuple[int, Optional[int]]]:
        """Relais direct vers un détenteur connu à un ou deux sauts: (cible, indice)."""
        holders = [
            peer for peer in sorted(state.friends)
            if peer not in excluded and self.states[peer].holds(query.category, query.token)
        ]
        if holders:
            return holders[0], None
        if state.vicinity is None or ttl < 2:
            return None
        for peer in sorted(state.vicinity):
            if peer not in excluded and self.states[peer].holds(query.category, query.token):
                return state.vicinity[peer], peer
        return None

    def _forward(self, state: PeerState, query: Query, ttl: int, delay_ms: float,
                 arrived_from: Optional[int], hint: Optional[int]) -> list[_Message]:
        """Messages émis par state pour une requête reçue avec le ttl donné (> 0)."""
        if hint is not None and hint in state.friends:
            return [_Message(state.owner, hint, ttl - 1, delay_ms + self._delay(state.owner, hint))]

        if self.policy.kind != "flood" and state.vicinity is not None:
            route = self._supernode_route(state, query, ttl, {query.origin, arrived_from, state.owner})
            if route is not None:
                target, via_hint = route
                return [_Message(state.owner, target, ttl - 1,
                                 delay_ms + self._delay(state.owner, target), via_hint)]

        targets = forward_set(state, query, self.policy, self.degree_of, arrived_from,
                              self.params.include_acquired)
        return [
            _Message(state.owner, target, ttl - 1, delay_ms + self._delay(state.owner, target))
            for target in targets
        ]

    def run_query(self, origin: int, category: InterestCategory, token: int, epoch: int = 0) -> QueryRecord:
        """Exécute une requête et applique les mises à jour adaptatives."""
        query = Query(self._next_query_id, origin, category, token, self.params.ttl)
        self._next_query_id += 1
        origin_state = self.states[origin]
        if query.ttl == 0:
            return QueryRecord(query.query_id, epoch, False, None, 0, None)
        origin_state.seen.add(query.query_id)
        reached = [origin]

        pending = self._forward(origin_state, query, query.ttl, 0.0, None, None)
        first_hop = [msg.target for msg in pending]
        messages = 0
        hop = 0
        hits: list[tuple[int, float]] = []
        while pending and not hits:
            hop += 1
            pending.sort(key=lambda m: (m.sender, m.target))
            next_round: list[_Message] = []
            for msg in pending:
                messages += 1
                state = self.states[msg.target]
                if query.query_id in state.seen:
                    continue
                state.seen.add(query.query_id)
                reached.append(msg.target)
                if state.holds(category, token):
                    hits.append((msg.target, msg.delay_ms))
                elif msg.ttl > 0:
                    next_round.extend(
                        self._forward(state, query, msg.ttl, msg.delay_ms, msg.sender, msg.hint)
                    )
            pending = next_round

        # requête terminée
        for peer in reached:
            self.states[peer].seen.discard(query.query_id)

        latency: Optional[float] = None
        if hits and self.placement is not None:
            latency = min(delay + self._delay(responder, origin) for responder, delay in hits)
        if self.params.adaptive:
            self._adapt(origin_state, query, [responder for responder, _ in hits], first_hop)

        return QueryRecord(query.query_id, epoch, bool(hits), hop if hits else None, messages, latency)

    def _adapt(self, origin_state: PeerState, query: Query, responders: list[int],
               first_hop: Iterable[int]) -> None:
        p = self.params
        touched = {origin_state.owner}
        for responder in sorted(set(responders)):
            on_hit_update(origin_state, self.states[responder], query, 1.0, p.alpha,
                          p.responder_strength)
            touched.add(responder)
        for peer in first_hop:
            entry = origin_state.friends.get(peer)
            if entry is None or peer in responders:
                continue
            entry.misses += 1
            old = entry.strength[query.category]
            entry.set_strength(query.category, (1.0 - p.alpha) * old)
        removed = evict(origin_state, p.min_queries, p.evict_floor, self.states)
        touched.update(removed)
        # la table à deux sauts d'un ami dépend aussi des listes modifiées
        stale = set(touched)
        for peer in touched:
            stale.update(self.states[peer].friends)
        for peer in sorted(stale):
            self._refresh_vicinity(self.states[peer])

    def run(self, queries: list[tuple[int, InterestCategory, int]], epochs: int = 1,
            progress: bool = False) -> list[QueryRecord]:
        """Exécute une suite de requêtes réparties en époques de taille égale."""
        records = []
        total = len(queries)
        for i, (origin, category, token) in enumerate(
            tqdm(queries, desc=f"Requêtes {self.policy.label}", disable=not progress)
        ):
            records.append(self.run_query(origin, category, token, epoch=i * epochs // total))
        return records


def run_query_sim(
    g: SocialGraph,
    workload: Workload,
    policy: RoutingPolicy,
    params: Optional[QuerySimParams] = None,
    seed: int = 0,
    placement: Optional[Placement] = None,
    underlay: Optional[UnderlayGraph] = None,
    progress: bool = False,
) -> QuerySimResult:
    """
    Simule une charge de requêtes et agrège les métriques par époque.

    Returns:
        QuerySimResult (métriques globales + série par époque)
    """
    queries = generate_workload(g, workload, seed)
    simulator = QuerySimulator(g, policy, params, placement, underlay)
    records = simulator.run(queries, epochs=workload.epochs, progress=progress)

    series = [
        QueryMetrics.from_records([r for r in records if r.epoch == epoch])
        for epoch in range(workload.epochs)
    ]
    metrics = QueryMetrics.from_records(records)
    logger.info(
        f"✓ {policy.label}: succès {metrics.success_rate:.1%}, sauts {metrics.mean_hops:.2f}, "
        f"messages {metrics.mean_messages:.1f}"
    )
    return QuerySimResult(policy=policy.label, seed=seed, metrics=metrics, epochs=series,
                          records=records)


def compare_policies(
    g: SocialGraph,
    workload: Workload,
    policies: list[RoutingPolicy],
    params: Optional[QuerySimParams] = None,
    seed: int = 0,
    placement: Optional[Placement] = None,
    underlay: Optional[UnderlayGraph] = None,
    progress: bool = False,
) -> pd.DataFrame:
    """Compare plusieurs politiques sur une charge identique (CSV de résultats)."""
    frames = [
        run_query_sim(g, workload, policy, params, seed, placement, underlay, progress).to_frame()
        for policy in policies
    ]
    return pd.concat(frames, ignore_index=True)
