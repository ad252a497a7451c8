"""Tests pour le graphe social: modèle, générateur et analyses."""

import math

import networkx as nx
import pytest
from pydantic import ValidationError

from src.analysis.graph_analyzer import (
    GraphAnalyzer,
    average_local_clustering,
    avg_shortest_path_sampled,
    degree_histogram,
    degree_histogram_frame,
    edge_distance_stats,
    global_clustering,
    interest_search,
    kruskal_spanning_tree,
    region_mixing,
    shared_interest_fraction,
)
from src.data.social_generator import generate_social_graph
from src.models.social import (
    CATEGORIES,
    GeoModel,
    GeoRegion,
    InterestCategory,
    SocialGenParams,
    SocialGraph,
    UserProfile,
    default_profile,
)
from src.utils.errors import DisconnectedGraphError

MUSIC = InterestCategory.MUSIC


def profile(user_id, music=(0,), lat=0.0, lon=0.0, region=0):
    """Profil de test: jetons musicaux donnés, jeton propre à l'id ailleurs."""
    interests = {category: (1000 + user_id,) for category in CATEGORIES}
    interests[MUSIC] = tuple(music)
    return UserProfile(id=user_id, region=region, lat=lat, lon=lon, interests=interests)


@pytest.fixture
def triangle():
    return SocialGraph.from_edges(3, [(0, 1), (1, 2), (0, 2)])


@pytest.fixture
def path3():
    return SocialGraph.from_edges(3, [(0, 1), (1, 2)])


@pytest.fixture
def star():
    """Étoile: centre 0 et 5 feuilles."""
    return SocialGraph.from_edges(6, [(0, i) for i in range(1, 6)])


@pytest.fixture
def small_params():
    return SocialGenParams(n=300, target_mean_degree=8, max_degree_cap=40)


# =============================================================================
# MODÈLE
# =============================================================================


def test_from_edges_sorted_neighbors():
    g = SocialGraph.from_edges(4, [(3, 0), (0, 1), (2, 0)])
    assert g.neighbors(0) == (1, 2, 3)
    assert g.degree(0) == 3
    assert list(g.edges()) == [(0, 1), (0, 2), (0, 3)]
    assert g.profiles[2] == default_profile(2)


@pytest.mark.parametrize(
    "edges",
    [[(0, 0)], [(0, 1), (1, 0)], [(0, 5)], [(-1, 1)]],
)
def test_from_edges_rejects_invalid(edges):
    with pytest.raises(ValueError):
        SocialGraph.from_edges(3, edges)


def test_from_edges_rejects_profile_mismatch():
    with pytest.raises(ValueError, match="profils"):
        SocialGraph.from_edges(2, [(0, 1)], [default_profile(0)])


def test_graph_is_frozen(triangle):
    with pytest.raises(nx.NetworkXError):
        triangle.graph.add_edge(0, 5)


def test_induced_subgraph_relabels():
    g = SocialGraph.from_edges(5, [(0, 2), (2, 4), (1, 3)], [profile(i) for i in range(5)])
    sub = g.induced([4, 2, 0])
    assert sub.n == 3
    assert list(sub.edges()) == [(0, 1), (1, 2)]
    assert sub.profiles[2].tokens(InterestCategory.BOOKS) == (1004,)


def test_geo_weights_must_sum_to_one():
    with pytest.raises(ValidationError):
        GeoModel(regions=[GeoRegion(name="a", weight=0.5, lat=0, lon=0, dispersion_km=10)])


def test_params_cap_below_target():
    with pytest.raises(ValidationError):
        SocialGenParams(target_mean_degree=19, max_degree_cap=10)


def test_homophily_defaults_are_merged():
    params = SocialGenParams(homophily={"music": 0.9})
    assert params.homophily[MUSIC] == 0.9
    assert params.homophily[InterestCategory.MOVIES] == 0.25


# =============================================================================
# ANALYSES
# =============================================================================


def test_clustering_triangle(triangle):
    assert global_clustering(triangle) == 1.0
    assert average_local_clustering(triangle) == 1.0


def test_clustering_path(path3):
    assert global_clustering(path3) == 0.0


def test_clustering_k4_minus_edge():
    # 2 triangles, 8 triplets connexes
    g = SocialGraph.from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)])
    assert global_clustering(g) == pytest.approx(0.75)


def test_clustering_without_triples():
    assert global_clustering(SocialGraph.from_edges(2, [(0, 1)])) == 0.0


def test_degree_histogram_star(star):
    stats = degree_histogram(star)
    assert stats.histogram == {1: 5, 5: 1}
    assert stats.mode == 1
    assert stats.max == 5
    assert stats.mean == pytest.approx(10 / 6)

    frame = degree_histogram_frame(stats)
    assert list(frame.columns) == ["degree", "count"]
    assert frame["count"].sum() == 6


def test_degree_histogram_mode_tie_takes_smallest():
    # degrés 1, 2, 2, 1
    g = SocialGraph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    assert degree_histogram(g).mode == 1


def test_avg_shortest_path_all_pairs(path3):
    assert avg_shortest_path_sampled(path3, 100, seed=0) == pytest.approx(4 / 3)


def test_avg_shortest_path_sampled_is_deterministic(star):
    first = avg_shortest_path_sampled(star, 5, seed=7)
    assert first == avg_shortest_path_sampled(star, 5, seed=7)
    assert 1.0 <= first <= 2.0


def test_avg_shortest_path_disconnected():
    g = SocialGraph.from_edges(4, [(0, 1), (2, 3)])
    with pytest.raises(DisconnectedGraphError) as excinfo:
        avg_shortest_path_sampled(g, 10, seed=0)
    assert excinfo.value.components == 2


def test_avg_shortest_path_needs_two_nodes():
    with pytest.raises(ValueError):
        avg_shortest_path_sampled(SocialGraph.from_edges(1, []), 1, seed=0)


class TestInterestSearch:
    """Recherche en largeur du plus proche détenteur d'un jeton."""

    def test_friend_shares_token(self):
        g = SocialGraph.from_edges(3, [(0, 1), (1, 2)], [profile(0, (7,)), profile(1, (7,)), profile(2, (8,))])
        assert interest_search(g, 0, MUSIC, 7) == 1

    def test_two_hops(self):
        g = SocialGraph.from_edges(3, [(0, 1), (1, 2)], [profile(0, (7,)), profile(1, (9,)), profile(2, (7,))])
        assert interest_search(g, 0, MUSIC, 7) == 2
        assert interest_search(g, 0, MUSIC, 7, max_depth=1) is None

    def test_origin_is_excluded(self):
        g = SocialGraph.from_edges(2, [(0, 1)], [profile(0, (7,)), profile(1, (8,))])
        assert interest_search(g, 0, MUSIC, 7) is None

    def test_any_token_of_a_set(self):
        g = SocialGraph.from_edges(3, [(0, 1), (1, 2)], [profile(0, (1, 2)), profile(1, (3,)), profile(2, (2,))])
        assert interest_search(g, 0, MUSIC, g.profiles[0].tokens(MUSIC)) == 2

    def test_unique_tokens_everywhere(self):
        g = SocialGraph.from_edges(3, [(0, 1), (1, 2)], [profile(i, (i,)) for i in range(3)])
        assert all(interest_search(g, u, MUSIC, u) is None for u in range(3))


def test_kruskal_four_cycle():
    g = SocialGraph.from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
    weights = {(0, 1): 1.0, (1, 2): 2.0, (2, 3): 3.0, (0, 3): 4.0}
    tree = kruskal_spanning_tree(g, lambda u, v: weights[(u, v)])
    assert tree == [(0, 1, 1.0), (1, 2, 2.0), (2, 3, 3.0)]


def test_kruskal_ties_broken_by_endpoints():
    g = SocialGraph.from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
    tree = kruskal_spanning_tree(g, lambda u, v: 1.0)
    assert [(u, v) for u, v, _ in tree] == [(0, 1), (0, 3), (1, 2)]


def test_kruskal_default_weight_is_distance():
    profiles = [profile(0, lat=0.0, lon=0.0), profile(1, lat=0.0, lon=1.0), profile(2, lat=0.0, lon=10.0)]
    g = SocialGraph.from_edges(3, [(0, 1), (1, 2), (0, 2)], profiles)
    tree = kruskal_spanning_tree(g)
    assert [(u, v) for u, v, _ in tree] == [(0, 1), (1, 2)]
    assert tree[0][2] == pytest.approx(111.19, rel=1e-3)


def test_kruskal_disconnected():
    with pytest.raises(DisconnectedGraphError):
        kruskal_spanning_tree(SocialGraph.from_edges(3, [(0, 1)]), lambda u, v: 1.0)


def test_edge_statistics():
    profiles = [
        profile(0, music=(1,), lat=0.0, lon=0.0, region=0),
        profile(1, music=(1,), lat=0.0, lon=1.0, region=0),
        profile(2, music=(2,), lat=0.0, lon=90.0, region=1),
    ]
    g = SocialGraph.from_edges(3, [(0, 1), (1, 2)], profiles)
    _, short = edge_distance_stats(g)
    assert short == pytest.approx(0.5)
    assert shared_interest_fraction(g, MUSIC) == pytest.approx(0.5)
    assert shared_interest_fraction(g, InterestCategory.BOOKS) == 0.0

    mixing = region_mixing(g)
    assert mixing.loc[0, 0] == 1
    assert mixing.loc[0, 1] == mixing.loc[1, 0] == 1


def test_analyzer_summary_triangle(triangle):
    frame = GraphAnalyzer(triangle).summary(sample_pairs=10, seed=0)
    values = dict(zip(frame["metric"], frame["value"]))
    assert list(frame.columns) == ["metric", "value"]
    assert values["global_clustering"] == 1.0
    assert values["avg_shortest_path"] == 1.0
    assert values["components"] == 1.0


# =============================================================================
# GÉNÉRATEUR
# =============================================================================


def test_generator_is_deterministic(small_params):
    first = generate_social_graph(small_params, seed=3)
    second = generate_social_graph(small_params, seed=3)
    assert list(first.edges()) == list(second.edges())
    assert first.profiles == second.profiles


def test_generator_seed_changes_graph(small_params):
    first = generate_social_graph(small_params, seed=3)
    other = generate_social_graph(small_params, seed=4)
    assert list(first.edges()) != list(other.edges())


def test_generator_invariants(small_params):
    g = generate_social_graph(small_params, seed=11)
    stats = degree_histogram(g)
    assert g.n == 300
    assert nx.is_connected(g.graph)
    assert stats.max <= small_params.max_degree_cap
    assert 6.5 <= stats.mean <= 9.5
    for p in g.profiles:
        assert -90.0 <= p.lat <= 90.0 and -180.0 <= p.lon <= 180.0
        assert all(p.tokens(c) for c in CATEGORIES)
        assert all(0 <= tok < small_params.vocab_size for c in CATEGORIES for tok in p.tokens(c))


def test_generator_respects_tight_cap():
    params = SocialGenParams(n=200, target_mean_degree=6, max_degree_cap=8)
    g = generate_social_graph(params, seed=1)
    assert degree_histogram(g).max <= 8


def test_generator_trivial_sizes():
    assert generate_social_graph(SocialGenParams(n=0, target_mean_degree=1, max_degree_cap=1)).n == 0
    single = generate_social_graph(SocialGenParams(n=1, target_mean_degree=1, max_degree_cap=1))
    assert single.n == 1 and single.number_of_edges() == 0


def test_homophily_raises_shared_interests():
    base = dict(n=400, target_mean_degree=8, max_degree_cap=60)
    none = SocialGenParams(**base, homophily={c: 0.0 for c in CATEGORIES})
    full = SocialGenParams(**base, homophily={c: 1.0 for c in CATEGORIES})
    low = shared_interest_fraction(generate_social_graph(none, seed=5), MUSIC)
    high = shared_interest_fraction(generate_social_graph(full, seed=5), MUSIC)
    assert high > low


def test_locality_shortens_links():
    base = dict(n=600, target_mean_degree=8, max_degree_cap=60)
    local = generate_social_graph(SocialGenParams(**base, locality_strength=0.8), seed=7)
    spread = generate_social_graph(SocialGenParams(**base, locality_strength=0.0), seed=7)
    local_km, local_short = edge_distance_stats(local)
    spread_km, _ = edge_distance_stats(spread)
    assert local_km < spread_km
    assert local_short > 0.5


def test_triad_closure_raises_clustering():
    base = dict(n=1000, target_mean_degree=8, max_degree_cap=100, locality_strength=0.0)
    closed = generate_social_graph(SocialGenParams(**base, triad_prob=0.5), seed=2)
    open_ = generate_social_graph(SocialGenParams(**base, triad_prob=0.0), seed=2)
    assert global_clustering(closed) > global_clustering(open_)


def test_music_shared_more_than_movies():
    g = generate_social_graph(SocialGenParams(n=1500), seed=9)
    assert shared_interest_fraction(g, MUSIC) >= shared_interest_fraction(g, InterestCategory.MOVIES)


@pytest.mark.slow
def test_default_graph_realism():
    g = generate_social_graph(SocialGenParams(), seed=42)
    stats = degree_histogram(g)
    assert 17.0 <= stats.mean <= 21.0
    assert stats.max <= 1077
    # queue lourde: quelques membres très connectés
    assert stats.max >= 5 * stats.mean
    assert global_clustering(g) >= 5 * stats.mean / (g.n - 1)
    bound = 2 * math.log(g.n) / math.log(stats.mean)
    assert avg_shortest_path_sampled(g, 500, seed=1) <= bound
    _, short_fraction = edge_distance_stats(g)
    assert short_fraction > 0.5
