"""Modèles du graphe social: profils, géographie et paramètres de génération."""

from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

import networkx as nx
from pydantic import BaseModel, Field, field_validator, model_validator


class InterestCategory(str, Enum):
    """Catégories d'intérêts d'un profil utilisateur."""

    PASSIONS = "passions"
    TV_SHOWS = "tv_shows"
    MOVIES = "movies"
    MUSIC = "music"
    BOOKS = "books"
    SPORTS = "sports"
    ACTIVITIES = "activities"


CATEGORIES: tuple[InterestCategory, ...] = tuple(InterestCategory)

DEFAULT_HOMOPHILY: dict[InterestCategory, float] = {
    InterestCategory.PASSIONS: 0.4,
    InterestCategory.TV_SHOWS: 0.25,
    InterestCategory.MOVIES: 0.25,
    InterestCategory.MUSIC: 0.6,
    InterestCategory.BOOKS: 0.4,
    InterestCategory.SPORTS: 0.6,
    InterestCategory.ACTIVITIES: 0.4,
}


class GeoRegion(BaseModel):
    """Région géographique: poids de population et dispersion autour du centre."""

    name: str
    weight: float = Field(ge=0.0, le=1.0)
    lat: float = Field(ge=-90.0, le=90.0)
    lon: float = Field(ge=-180.0, le=180.0)
    dispersion_km: float = Field(gt=0.0)


def _default_regions() -> list[GeoRegion]:
    return [
        GeoRegion(name="brazil", weight=0.53, lat=-14.2, lon=-51.9, dispersion_km=800.0),
        GeoRegion(name="united_states", weight=0.18, lat=39.8, lon=-98.6, dispersion_km=1200.0),
        GeoRegion(name="iran", weight=0.08, lat=32.4, lon=53.7, dispersion_km=500.0),
        GeoRegion(name="india", weight=0.06, lat=21.0, lon=78.0, dispersion_km=900.0),
        GeoRegion(name="eastern_europe", weight=0.05, lat=50.0, lon=20.0, dispersion_km=600.0),
        GeoRegion(name="south_east_asia", weight=0.04, lat=10.0, lon=106.0, dispersion_km=900.0),
        GeoRegion(name="argentina", weight=0.03, lat=-34.0, lon=-64.0, dispersion_km=600.0),
        GeoRegion(name="pakistan", weight=0.03, lat=30.0, lon=70.0, dispersion_km=500.0),
    ]


class GeoModel(BaseModel):
    """Répartition géographique des membres."""

    regions: list[GeoRegion] = Field(default_factory=_default_regions, min_length=1)

    @model_validator(mode="after")
    def _weights_sum_to_one(self) -> "GeoModel":
        total = sum(region.weight for region in self.regions)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"La somme des poids des régions vaut {total}, attendu 1")
        return self


class SocialGenParams(BaseModel):
    """Paramètres du générateur de graphe social."""

    n: int = Field(default=5000, ge=0)
    target_mean_degree: float = Field(default=19.0, ge=1.0)
    max_degree_cap: int = Field(default=1077, ge=1)
    triad_prob: float = Field(default=0.6, ge=0.0, le=1.0)
    locality_strength: float = Field(default=0.8, ge=0.0, le=1.0)
    locality_radius_km: float = Field(default=1000.0, gt=0.0)
    homophily: dict[InterestCategory, float] = Field(
        default_factory=lambda: dict(DEFAULT_HOMOPHILY)
    )
    vocab_size: int = Field(default=2000, ge=1)
    zipf_exponent: float = Field(default=0.8, gt=0.0)
    tokens_per_category: float = Field(default=2.0, ge=1.0)

    @field_validator("homophily")
    @classmethod
    def _complete_homophily(
        cls, value: dict[InterestCategory, float]
    ) -> dict[InterestCategory, float]:
        merged = dict(DEFAULT_HOMOPHILY)
        merged.update(value)
        for category, prob in merged.items():
            if not 0.0 <= prob <= 1.0:
                raise ValueError(f"Homophilie hors de [0,1] pour {category.value}: {prob}")
        return merged

    @model_validator(mode="after")
    def _cap_above_target(self) -> "SocialGenParams":
        if self.max_degree_cap < self.target_mean_degree:
            raise ValueError(
                f"max_degree_cap ({self.max_degree_cap}) < target_mean_degree "
                f"({self.target_mean_degree})"
            )
        return self


@dataclass(frozen=True)
class UserProfile:
    """Profil d'un membre: région, coordonnées et jetons d'intérêt par catégorie."""

    id: int
    region: int
    lat: float
    lon: float
    interests: Mapping[InterestCategory, tuple[int, ...]]

    def tokens(self, category: InterestCategory) -> tuple[int, ...]:
        return self.interests.get(category, ())

    def holds(self, category: InterestCategory, token: int) -> bool:
        return token in self.interests.get(category, ())


def default_profile(user_id: int) -> UserProfile:
    """Profil minimal: région 0 en (0, 0), jeton 0 dans chaque catégorie."""
    return UserProfile(
        id=user_id,
        region=0,
        lat=0.0,
        lon=0.0,
        interests={category: (0,) for category in CATEGORIES},
    )


@dataclass(frozen=True)
class SocialGraph:
    """
    Graphe d'amitié non orienté avec profils.

    Immuable après construction: le graphe networkx est gelé et les listes
    d'adjacence triées sont précalculées.
    """

    n: int
    graph: nx.Graph = field(repr=False)
    profiles: tuple[UserProfile, ...] = field(repr=False)
    _adjacency: tuple[tuple[int, ...], ...] = field(repr=False, default=())

    @classmethod
    def from_edges(
        cls,
        n: int,
        edges: Iterable[tuple[int, int]],
        profiles: Optional[Iterable[UserProfile]] = None,
    ) -> "SocialGraph":
        """
        Construit un graphe à partir d'une liste d'arêtes.

        Args:
            n: Nombre de membres (identifiants 0..n-1)
            edges: Arêtes (u, v)
            profiles: Profils dans l'ordre des identifiants (par défaut: profils minimaux)

        Returns:
            SocialGraph gelé

        Raises:
            ValueError: boucle, arête dupliquée ou identifiant hors bornes
        """
        g = nx.Graph()
        g.add_nodes_from(range(n))
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"Boucle interdite sur le nœud {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"Arête ({u}, {v}) hors de 0..{n - 1}")
            if g.has_edge(u, v):
                raise ValueError(f"Arête dupliquée ({u}, {v})")
            g.add_edge(u, v)

        profile_list = list(profiles) if profiles is not None else [default_profile(i) for i in range(n)]
        if len(profile_list) != n:
            raise ValueError(f"{len(profile_list)} profils pour {n} nœuds")
        for expected, profile in enumerate(profile_list):
            if profile.id != expected:
                raise ValueError(f"Profil {profile.id} à la position {expected}")

        adjacency = tuple(tuple(sorted(g.adj[u])) for u in range(n))
        return cls(n=n, graph=nx.freeze(g), profiles=tuple(profile_list), _adjacency=adjacency)

    def neighbors(self, u: int) -> tuple[int, ...]:
        """Amis de u, triés par identifiant."""
        return self._adjacency[u]

    def degree(self, u: int) -> int:
        return len(self._adjacency[u])

    def edges(self) -> Iterator[tuple[int, int]]:
        """Arêtes (u, v) avec u < v, dans l'ordre lexicographique."""
        for u in range(self.n):
            for v in self._adjacency[u]:
                if u < v:
                    yield u, v

    def number_of_edges(self) -> int:
        return self.graph.number_of_edges()

    def induced(self, users: Iterable[int]) -> "SocialGraph":
        """Sous-graphe induit, renuméroté 0..k-1 dans l'ordre croissant des identifiants."""
        members = sorted(set(users))
        index = {u: i for i, u in enumerate(members)}
        edges = [
            (index[u], index[v])
            for u in members
            for v in self._adjacency[u]
            if u < v and v in index
        ]
        profiles = [replace(self.profiles[u], id=index[u]) for u in members]
        return SocialGraph.from_edges(len(members), edges, profiles)

    def __repr__(self) -> str:
        return f"SocialGraph(n={self.n}, m={self.number_of_edges()})"
