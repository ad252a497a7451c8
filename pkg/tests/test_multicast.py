"""Tests pour le multicast applicatif (arbre social, ESM, NICE) et l'expérience associée."""

import time

import networkx as nx
import pandas as pd
import pytest

from src.analysis.multicast_experiment import (
    FIG8_COLUMNS,
    SUMMARY_COLUMNS,
    MulticastExperiment,
    fig8_experiment,
    summarise_fig8,
)
from src.data.social_generator import generate_social_graph
from src.data.underlay_generator import generate_transit_stub
from src.models.overlay import EmbedParams, MulticastGroup, MulticastParams, OverlayTree, Placement
from src.models.social import SocialGenParams, SocialGraph
from src.models.topology import (
    LinkLevel,
    Router,
    RouterKind,
    TransitStubParams,
    UnderlayGraph,
    UnderlayLink,
)
from src.simulation.embedding import embed, select_subset, user_delay
from src.simulation.multicast import (
    build_esm_tree,
    build_nice_hierarchy,
    build_social_tree,
    delay_matrix,
    delivery_stats,
    nice_delivery,
    select_friend_group,
)
from src.utils.errors import DisconnectedGraphError, GroupSizeError
from src.utils.seeding import split_seed


# =============================================================================
# FIXTURES
# =============================================================================

@pytest.fixture
def chain():
    """Transit 0 puis chaîne stub 1 - 2 - 3 (délais 2 et 3 ms)."""
    routers = (
        Router(0, RouterKind.TRANSIT, 0),
        Router(1, RouterKind.STUB, 0, 0),
        Router(2, RouterKind.STUB, 0, 0),
        Router(3, RouterKind.STUB, 0, 0),
    )
    links = (
        UnderlayLink(0, 1, 5.0, LinkLevel.TRANSIT_STUB),
        UnderlayLink(1, 2, 2.0, LinkLevel.INTRA_STUB),
        UnderlayLink(2, 3, 3.0, LinkLevel.INTRA_STUB),
    )
    return UnderlayGraph(routers=routers, links=links)


def placed_on(routers):
    """Membre i rattaché au routeur routers[i], accès 0,5 ms."""
    return Placement(
        attachment=dict(enumerate(routers)),
        access_delay={i: 0.5 for i in range(len(routers))},
        stub_domain={i: 0 for i in range(len(routers))},
    )


@pytest.fixture(scope="module")
def world():
    """Graphe social, underlay et placement partagés par les tests de protocoles."""
    g = generate_social_graph(SocialGenParams(n=200, target_mean_degree=6, max_degree_cap=30), seed=21)
    underlay = generate_transit_stub(
        TransitStubParams(transit_domains=2, transit_nodes_per_domain=3, stub_domains_per_transit_node=2,
                          stub_nodes_per_domain=4, size_jitter=0.0),
        seed=21,
    )
    placement = embed(list(range(g.n)), g, underlay)
    return g, underlay, placement


@pytest.fixture(scope="module")
def experiment(world):
    g, underlay, placement = world
    return MulticastExperiment(g, placement, underlay, MulticastParams(mesh_degree=3), seed=5)


# =============================================================================
# GROUPES
# =============================================================================

def test_friend_group_bfs():
    g = SocialGraph.from_edges(5, [(i, i + 1) for i in range(4)])
    group = select_friend_group(g, 2, 3)
    assert group.members == (1, 2, 3)
    assert group.source == 2
    assert select_friend_group(g, 2, 1).members == (2,)


def test_friend_group_too_large():
    g = SocialGraph.from_edges(5, [(0, 1), (1, 2), (3, 4)])
    with pytest.raises(GroupSizeError) as excinfo:
        select_friend_group(g, 0, 4)
    assert excinfo.value.achievable_size == 3
    with pytest.raises(GroupSizeError):
        select_friend_group(g, 0, 3, allowed={0, 1, 3})
    with pytest.raises(ValueError):
        select_friend_group(g, 0, 0)


def test_group_source_must_be_member():
    with pytest.raises(ValueError):
        MulticastGroup(members=(1, 2), source=3)


def test_experiment_groups_are_connected(world, experiment):
    g, _, _ = world
    group = experiment.pick_group(16, trial=0)
    assert group.size == 16
    induced = nx.Graph(list(g.induced(group.members).edges()))
    assert induced.number_of_nodes() == 16
    assert nx.is_connected(induced)
    assert group == experiment.pick_group(16, trial=0)


def test_experiment_group_too_large(experiment):
    with pytest.raises(GroupSizeError):
        experiment.pick_group(10_000, trial=0)


# =============================================================================
# ARBRE SOCIAL
# =============================================================================

def test_two_member_social_tree(chain):
    g = SocialGraph.from_edges(2, [(0, 1)])
    placement = placed_on([1, 2])
    tree = build_social_tree(MulticastGroup((0, 1), 0), g, placement, chain)
    assert tree.parent == {0: 0, 1: 0}
    assert tree.delay[1] == 3.0


def test_social_tree_follows_friendships(chain):
    g = SocialGraph.from_edges(3, [(0, 1), (1, 2)])
    tree = build_social_tree(MulticastGroup((0, 1, 2), 0), g, placed_on([1, 2, 3]), chain)
    # 0 et 2 ne sont pas amis: le relais passe par 1 (3 + 4 ms)
    assert tree.parent[2] == 1
    assert tree.delay == {0: 0.0, 1: 3.0, 2: 7.0}
    assert tree.path_to(2) == [0, 1, 2]


def test_social_tree_prefers_shorter_delay(chain):
    g = SocialGraph.from_edges(3, [(0, 1), (1, 2), (0, 2)])
    tree = build_social_tree(MulticastGroup((0, 1, 2), 0), g, placed_on([1, 2, 3]), chain)
    assert tree.parent[2] == 0
    assert tree.delay[2] == 6.0


def test_social_tree_modes(chain):
    g = SocialGraph.from_edges(5, [(0, 1), (0, 2), (1, 3), (2, 3), (2, 4)])
    group = MulticastGroup((0, 1, 2, 3), 0)
    placement = placed_on([1, 2, 3, 1])
    assert build_social_tree(group, g, placement, chain, mode="bfs").parent[3] == 1
    assert build_social_tree(group, g, placement, chain, mode="highest_degree").parent[3] == 2


def test_social_tree_matches_dijkstra(world, experiment):
    g, underlay, placement = world
    group = experiment.pick_group(24, trial=1)
    tree = build_social_tree(group, g, placement, underlay)
    weighted = nx.Graph()
    for u, v in g.induced(group.members).edges():
        a, b = group.members[u], group.members[v]
        weighted.add_edge(a, b, weight=user_delay(placement, underlay, a, b))
    expected = nx.single_source_dijkstra_path_length(weighted, group.source)
    assert set(tree.delay) == set(group.members)
    for member, delay in expected.items():
        assert tree.delay[member] == pytest.approx(delay)


def test_bfs_tree_depth_is_hop_distance(world, experiment):
    g, underlay, placement = world
    group = experiment.pick_group(20, trial=2)
    hops = nx.single_source_shortest_path_length(
        nx.Graph([(group.members[u], group.members[v]) for u, v in g.induced(group.members).edges()]),
        group.source,
    )
    for mode in ("bfs", "highest_degree"):
        tree = build_social_tree(group, g, placement, underlay, mode=mode)
        for member in group.members:
            assert len(tree.path_to(member)) - 1 == hops[member]


def test_disconnected_group(chain):
    g = SocialGraph.from_edges(4, [(0, 1), (2, 3)])
    with pytest.raises(DisconnectedGraphError):
        build_social_tree(MulticastGroup((0, 1, 2, 3), 0), g, placed_on([1, 2, 3, 3]), chain)


# =============================================================================
# ESM
# =============================================================================

def test_esm_mesh_respects_degree_bound(world, experiment):
    _, underlay, placement = world
    group = experiment.pick_group(20, trial=3)
    tree, mesh = build_esm_tree(group, placement, underlay, mesh_degree=3, improvement_rounds=10, seed=7)
    assert all(mesh.degree(m) <= 3 for m in group.members)
    assert nx.is_connected(nx.Graph(list(mesh.edges)))
    assert all(a >= b for a, b in zip(mesh.cost_history, mesh.cost_history[1:]))
    assert set(tree.members) == set(group.members)
    assert tree.delay[group.source] == 0.0
    for p, child in tree.edges():
        assert (min(p, child), max(p, child)) in {(min(e), max(e)) for e in mesh.edges}


def test_esm_is_deterministic(world, experiment):
    _, underlay, placement = world
    group = experiment.pick_group(12, trial=0)
    first = build_esm_tree(group, placement, underlay, seed=3)
    second = build_esm_tree(group, placement, underlay, seed=3)
    assert first[0].parent == second[0].parent
    assert first[1].cost_history == second[1].cost_history


def test_esm_two_members(chain):
    tree, mesh = build_esm_tree(MulticastGroup((0, 1), 1), placed_on([1, 3]), chain)
    assert mesh.edges == {(0, 1)}
    assert tree.delay[0] == user_delay(placed_on([1, 3]), chain, 0, 1)


# =============================================================================
# NICE
# =============================================================================

def test_nice_twelve_members_two_layers(world, experiment):
    _, underlay, placement = world
    group = experiment.pick_group(12, trial=0)
    h = build_nice_hierarchy(group, placement, underlay, k=3)
    assert len(h.layers) == 2
    bottom = h.layers[0]
    assert sorted(m for c in bottom for m in c.members) == list(group.members)
    assert all(3 <= len(c.members) <= 8 for c in bottom)
    assert sorted(h.layers[1][0].members) == sorted(c.leader for c in bottom)


def test_nice_cluster_bounds(world, experiment):
    _, underlay, placement = world
    group = experiment.pick_group(40, trial=1)
    h = build_nice_hierarchy(group, placement, underlay, k=3)
    for layer in h.layers[:-1]:
        assert all(3 <= len(c.members) <= 8 for c in layer)
        assert all(c.leader in c.members for c in layer)
    assert len(h.layers[-1]) == 1
    assert len(h.layers[-1][0].members) <= 8
    assert h.top in h.layers[-1][0].members


def test_nice_delivery_spans_group(world, experiment):
    _, underlay, placement = world
    group = experiment.pick_group(30, trial=4)
    h = build_nice_hierarchy(group, placement, underlay)
    tree = nice_delivery(h, group.source, placement, underlay)
    assert tree.members == group.members
    assert tree.delay[group.source] == 0.0
    for member in group.members:
        assert tree.path_to(member)[0] == group.source
        if member != group.source:
            assert tree.delay[member] >= user_delay(placement, underlay, group.source, member)


@pytest.fixture
def three_sites():
    """Transit 0 et trois routeurs stub à 10, 20 et 30 ms; quatre membres par routeur."""
    routers = (
        Router(0, RouterKind.TRANSIT, 0),
        Router(1, RouterKind.STUB, 0, 0),
        Router(2, RouterKind.STUB, 0, 1),
        Router(3, RouterKind.STUB, 0, 2),
    )
    links = (
        UnderlayLink(0, 1, 10.0, LinkLevel.TRANSIT_STUB),
        UnderlayLink(0, 2, 20.0, LinkLevel.TRANSIT_STUB),
        UnderlayLink(0, 3, 30.0, LinkLevel.TRANSIT_STUB),
    )
    return UnderlayGraph(routers=routers, links=links), placed_on([1] * 4 + [2] * 4 + [3] * 4)


def test_nice_twelve_members_hand_trace(three_sites):
    underlay, placement = three_sites
    group = MulticastGroup(tuple(range(12)), source=5)
    h = build_nice_hierarchy(group, placement, underlay, k=3)
    # délais: 1 ms sur un même routeur, 31 (sites 1-2), 41 (1-3), 51 (2-3)
    assert [c.members for c in h.layers[0]] == [tuple(range(8)), (8, 9, 10, 11)]
    assert [c.leader for c in h.layers[0]] == [0, 8]
    assert [(c.members, c.leader) for c in h.layers[1]] == [((0, 8), 0)]

    tree = nice_delivery(h, 5, placement, underlay)
    expected = {0: 31.0, 1: 31.0, 2: 31.0, 3: 31.0, 4: 1.0, 5: 0.0, 6: 1.0, 7: 1.0,
                8: 72.0, 9: 73.0, 10: 73.0, 11: 73.0}
    assert tree.delay == expected
    assert tree.parent[8] == 0
    assert all(tree.parent[m] == 8 for m in (9, 10, 11))


def test_nice_rejects_bad_input(chain):
    group = MulticastGroup((0, 1), 0)
    with pytest.raises(ValueError):
        build_nice_hierarchy(group, placed_on([1, 2]), chain, k=1)
    h = build_nice_hierarchy(group, placed_on([1, 2]), chain)
    with pytest.raises(ValueError):
        nice_delivery(h, 5, placed_on([1, 2]), chain)


# =============================================================================
# ÉVALUATION
# =============================================================================

def test_delay_matrix(chain):
    matrix = delay_matrix((0, 1, 2), placed_on([1, 2, 3]), chain)
    assert matrix.tolist() == [[0.0, 3.0, 6.0], [3.0, 0.0, 4.0], [6.0, 4.0, 0.0]]


def test_chain_tree_stress_and_stretch(chain):
    tree = OverlayTree("social", 0, parent={0: 0, 1: 0, 2: 1}, delay={0: 0.0, 1: 3.0, 2: 7.0})
    stats = delivery_stats(tree, chain, placed_on([1, 2, 3]))
    assert stats.stress == {(1, 2): 1, (2, 3): 1}
    assert stats.max_stress == 1
    assert stats.mean_delay_ms == 5.0
    assert stats.max_delay_ms == 7.0
    assert stats.mean_stretch == pytest.approx((1.0 + 7.0 / 6.0) / 2)


def test_star_tree_stress(chain):
    tree = OverlayTree("esm", 0, parent={0: 0, 1: 0, 2: 0}, delay={0: 0.0, 1: 3.0, 2: 6.0})
    stats = delivery_stats(tree, chain, placed_on([1, 2, 3]))
    assert stats.stress == {(1, 2): 2, (2, 3): 1}
    assert stats.max_stress == 2
    assert stats.mean_stretch == 1.0


def test_single_member_stats(chain):
    tree = OverlayTree("nice", 0, parent={0: 0}, delay={0: 0.0})
    stats = delivery_stats(tree, chain, placed_on([1]))
    assert (stats.mean_delay_ms, stats.max_delay_ms, stats.stress, stats.mean_stretch) == (0.0, 0.0, {}, 1.0)


def test_two_member_groups_agree(experiment):
    for trial in range(3):
        group = experiment.pick_group(2, trial=trial)
        results = experiment.evaluate(group, trial=trial)
        delays = {stats.mean_delay_ms for stats in results.values()}
        assert len(delays) == 1


def test_groups_prefer_covering_friend_circles(world, experiment):
    g, _, _ = world
    group = experiment.pick_group(8, trial=0)
    friends = set(g.neighbors(group.source))
    assert all(m in friends for m in group.members if m != group.source)


def test_stretch_at_least_one(world, experiment):
    group = experiment.pick_group(16, trial=5)
    for stats in experiment.evaluate(group, trial=5).values():
        assert stats.mean_stretch >= 1.0
        assert stats.max_delay_ms >= stats.mean_delay_ms


# =============================================================================
# EXPÉRIENCE
# =============================================================================

def test_fig8_rows_in_order(world):
    g, underlay, placement = world
    params = MulticastParams(sizes=[1, 6], trials=2, improvement_rounds=3)
    frame = fig8_experiment(g, placement, underlay, params, seed=9)
    assert list(frame.columns) == FIG8_COLUMNS
    assert len(frame) == 2 * 2 * 3
    assert frame["protocol"].tolist()[:3] == ["social", "esm", "nice"]
    assert frame["group_size"].tolist() == [1] * 6 + [6] * 6
    assert frame["trial"].tolist() == [0, 0, 0, 1, 1, 1] * 2
    singles = frame[frame["group_size"] == 1]
    assert (singles["mean_delay_ms"] == 0.0).all()
    assert (singles["mean_stretch"] == 1.0).all()
    assert (singles["max_stress"] == 0).all()


def test_fig8_independent_of_threads(world):
    g, underlay, placement = world
    params = MulticastParams(sizes=[4, 8], trials=3, improvement_rounds=3)
    serial = fig8_experiment(g, placement, underlay, params, seed=2, jobs=1)
    threaded = fig8_experiment(g, placement, underlay, params, seed=2, jobs=3)
    pd.testing.assert_frame_equal(serial, threaded)


def test_summarise_fig8():
    frame = pd.DataFrame(
        [
            ("social", 8, 0, 10.0, 12.0, 1.0, 2),
            ("social", 8, 1, 20.0, 25.0, 2.0, 4),
            ("esm", 8, 0, 30.0, 35.0, 1.5, 3),
        ],
        columns=FIG8_COLUMNS,
    )
    summary = summarise_fig8(frame)
    assert list(summary.columns) == SUMMARY_COLUMNS
    assert summary["protocol"].tolist() == ["esm", "social"]
    social = summary.set_index("protocol").loc["social"]
    assert social["trials"] == 2
    assert social["mean_delay_ms"] == 15.0
    assert social["std_delay_ms"] == 5.0
    assert social["mean_max_stress"] == 3.0
    assert summary.set_index("protocol").loc["esm", "std_stretch"] == 0.0


@pytest.mark.slow
def test_default_friend_groups_favour_social_tree():
    master = 42
    g = generate_social_graph(SocialGenParams(), seed=split_seed(master, "social"))
    underlay = generate_transit_stub(TransitStubParams(), split_seed(master, "underlay"))
    embed_params = EmbedParams()
    subset = select_subset(g, embed_params, split_seed(master, "embed.subset"))
    placement = embed(subset, g, underlay, embed_params, split_seed(master, "embed.placement"))

    start = time.perf_counter()
    frame = fig8_experiment(g, placement, underlay, MulticastParams(), split_seed(master, "multicast"))
    elapsed = time.perf_counter() - start

    means = summarise_fig8(frame).pivot(index="group_size", columns="protocol", values="mean_delay_ms")
    assert (means["social"] <= means["nice"]).all()
    assert (means["nice"] <= means["esm"]).mean() >= 0.6
    overall = frame.groupby("protocol")["mean_delay_ms"].mean()
    assert overall["social"] < overall["nice"]
    assert overall["social"] < overall["esm"]
    assert elapsed < 300
