"""Modèles de l'overlay: placement, routage de requêtes et structures multicast."""

import math
import re
from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field
from typing import Literal, Optional

from pydantic import BaseModel, Field

from src.models.social import CATEGORIES, InterestCategory
from src.utils.errors import PlacementError

# =============================================================================
# PLACEMENT
# =============================================================================


class EmbedParams(BaseModel):
    """Paramètres du placement des membres sur les domaines stub."""

    subset_size: int = Field(default=1000, ge=0)
    stub_capacity: Optional[int] = Field(default=None, ge=1)
    selection: Literal["random", "bfs_cluster"] = "bfs_cluster"
    attachment: Literal["geographic", "random"] = "geographic"
    access_delay_ms: float = Field(default=1.0, ge=0.0)

    def capacity_for(self, users: int, stub_domains: int) -> int:
        """Capacité effective: explicite, sinon ⌈users / domaines actifs⌉·2."""
        if self.stub_capacity is not None:
            return self.stub_capacity
        active = max(1, min(stub_domains, users))
        return max(1, math.ceil(users / active) * 2)


@dataclass(frozen=True)
class Placement:
    """Rattachement des membres aux routeurs stub."""

    attachment: Mapping[int, int]
    access_delay: Mapping[int, float]
    stub_domain: Mapping[int, int]

    def router_of(self, user: int) -> int:
        try:
            return self.attachment[user]
        except KeyError:
            raise PlacementError(f"Utilisateur {user} non placé") from None

    def access_of(self, user: int) -> float:
        try:
            return self.access_delay[user]
        except KeyError:
            raise PlacementError(f"Utilisateur {user} non placé") from None

    @property
    def users(self) -> tuple[int, ...]:
        return tuple(sorted(self.attachment))

    def relabel(self, members: list[int]) -> "Placement":
        """Placement renuméroté comme SocialGraph.induced(members)."""
        index = {u: i for i, u in enumerate(sorted(set(members)))}
        return Placement(
            attachment={index[u]: self.router_of(u) for u in index},
            access_delay={index[u]: self.access_of(u) for u in index},
            stub_domain={index[u]: self.stub_domain[u] for u in index},
        )

    def __contains__(self, user: object) -> bool:
        return user in self.attachment

    def __len__(self) -> int:
        return len(self.attachment)


# =============================================================================
# ROUTAGE DE REQUÊTES
# =============================================================================

_POLICY_PATTERN = re.compile(r"^\s*(flood|highest_degree|interest_weighted)\s*(?:\(\s*(\d+)\s*\))?\s*$")


@dataclass(frozen=True)
class RoutingPolicy:
    """Politique de relais: inondation ou sélection des k meilleurs amis."""

    kind: Literal["flood", "highest_degree", "interest_weighted"]
    k: int = 3

    def __post_init__(self) -> None:
        if self.kind != "flood" and self.k < 1:
            raise ValueError(f"k doit être >= 1 pour {self.kind} (reçu {self.k})")

    @classmethod
    def parse(cls, text: str) -> "RoutingPolicy":
        """Analyse "flood", "highest_degree(3)" ou "interest_weighted(2)"."""
        match = _POLICY_PATTERN.match(text)
        if not match:
            raise ValueError(f"Politique de routage inconnue: {text!r}")
        kind, k = match.group(1), match.group(2)
        return cls(kind=kind, k=int(k) if k else 3)  # type: ignore[arg-type]

    @property
    def label(self) -> str:
        return "flood" if self.kind == "flood" else f"{self.kind}({self.k})"


@dataclass(frozen=True)
class Query:
    query_id: int
    origin: int
    category: InterestCategory
    token: int
    ttl: int

    def __post_init__(self) -> None:
        if self.ttl < 0:
            raise ValueError(f"TTL négatif pour la requête {self.query_id}")


@dataclass
class FriendEntry:
    """Entrée de la liste d'amis avec force de relation par catégorie."""

    peer: int
    strength: dict[InterestCategory, float] = field(
        default_factory=lambda: {category: 0.0 for category in CATEGORIES}
    )
    hits: int = 0
    misses: int = 0
    original: bool = True

    @property
    def observations(self) -> int:
        return self.hits + self.misses

    def set_strength(self, category: InterestCategory, value: float) -> None:
        self.strength[category] = min(1.0, max(0.0, value))

    def max_strength(self) -> float:
        return max(self.strength.values(), default=0.0)


@dataclass
class PeerState:
    """État de routage d'un pair."""

    owner: int
    friends: dict[int, FriendEntry]
    content: Mapping[InterestCategory, frozenset[int]]
    vicinity: Optional[dict[int, int]] = None
    seen: set[int] = field(default_factory=set)

    @property
    def degree(self) -> int:
        return len(self.friends)

    def holds(self, category: InterestCategory, token: int) -> bool:
        return token in self.content.get(category, frozenset())


class QuerySimParams(BaseModel):
    """Paramètres de la simulation de requêtes."""

    ttl: int = Field(default=5, ge=0)
    supernode_threshold: int = Field(default=100, ge=1)
    adaptive: bool = True
    alpha: float = Field(default=0.3, ge=0.0, le=1.0)
    responder_strength: float = Field(default=0.5, ge=0.0, le=1.0)
    min_queries: int = Field(default=10, ge=1)
    evict_floor: float = Field(default=0.05, ge=0.0, le=1.0)
    include_acquired: bool = True


class Workload(BaseModel):
    """Charge de requêtes."""

    num_queries: int = Field(default=1000, ge=1)
    requesters: int = Field(default=50, ge=1)
    wants_per_requester: int = Field(default=3, ge=1)
    epochs: int = Field(default=10, ge=1)
    token_distribution: Literal["stationary", "zipf"] = "stationary"


@dataclass(frozen=True)
class QueryRecord:
    query_id: int
    epoch: int
    success: bool
    hops: Optional[int]
    messages: int
    latency_ms: Optional[float]


def _mean(values: list[float]) -> float:
    return sum(values) / len(values) if values else math.nan


@dataclass(frozen=True)
class QueryMetrics:
    """Agrégats d'un ensemble de requêtes."""

    queries: int
    success_rate: float
    mean_hops: float
    mean_messages: float
    mean_latency_ms: float

    @classmethod
    def from_records(cls, records: list[QueryRecord]) -> "QueryMetrics":
        hits = [r for r in records if r.success]
        latencies = [r.latency_ms for r in hits if r.latency_ms is not None]
        return cls(
            queries=len(records),
            success_rate=len(hits) / len(records) if records else 0.0,
            mean_hops=_mean([float(r.hops) for r in hits if r.hops is not None]),
            mean_messages=_mean([float(r.messages) for r in records]) if records else 0.0,
            mean_latency_ms=_mean(latencies),
        )


# =============================================================================
# MULTICAST
# =============================================================================


class MulticastParams(BaseModel):
    """Paramètres de l'expérience multicast."""

    sizes: list[int] = Field(default_factory=lambda: [8, 16, 32, 64, 128])
    trials: int = Field(default=20, ge=1)
    nice_k: int = Field(default=3, ge=2)
    mesh_degree: int = Field(default=5, ge=2)
    improvement_rounds: int = Field(default=20, ge=0)
    social_tree_mode: Literal["shortest_delay", "bfs", "highest_degree"] = "shortest_delay"


@dataclass(frozen=True)
class MulticastGroup:
    members: tuple[int, ...]
    source: int

    def __post_init__(self) -> None:
        if not self.members:
            raise ValueError("Un groupe multicast contient au moins un membre")
        if self.source not in self.members:
            raise ValueError(f"La source {self.source} n'appartient pas au groupe")

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class OverlayTree:
    """Arbre de diffusion: parent de chaque membre et délai de livraison."""

    protocol: str
    source: int
    parent: Mapping[int, int]
    delay: Mapping[int, float]

    @property
    def members(self) -> tuple[int, ...]:
        return tuple(sorted(self.parent))

    def edges(self) -> Iterator[tuple[int, int]]:
        """Arêtes (parent, enfant), triées par enfant."""
        for child in self.members:
            if child != self.source:
                yield self.parent[child], child

    def path_to(self, member: int) -> list[int]:
        """Chemin source → member dans l'arbre."""
        path = [member]
        while path[-1] != self.source:
            path.append(self.parent[path[-1]])
            if len(path) > len(self.parent):
                raise ValueError(f"Cycle détecté dans l'arbre {self.protocol}")
        path.reverse()
        return path


@dataclass
class EsmMesh:
    """Maillage ESM/Narada à degré borné."""

    members: tuple[int, ...]
    edges: set[tuple[int, int]]
    degree_bound: int
    cost_history: list[float] = field(default_factory=list)

    def degree(self, member: int) -> int:
        return sum(1 for edge in self.edges if member in edge)

    def neighbors(self, member: int) -> list[int]:
        return sorted(v if u == member else u for u, v in self.edges if member in (u, v))


@dataclass(frozen=True)
class NiceCluster:
    members: tuple[int, ...]
    leader: int


@dataclass(frozen=True)
class NiceHierarchy:
    """Hiérarchie NICE: couches de clusters, la couche i+1 regroupe les leaders de la couche i."""

    k: int
    layers: tuple[tuple[NiceCluster, ...], ...]

    @property
    def top(self) -> int:
        return self.layers[-1][0].leader

    def clusters_of(self, member: int) -> list[tuple[int, NiceCluster]]:
        """Clusters (couche, cluster) auxquels appartient un membre."""
        return [
            (layer_index, cluster)
            for layer_index, layer in enumerate(self.layers)
            for cluster in layer
            if member in cluster.members
        ]
