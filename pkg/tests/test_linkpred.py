import math
import random

import networkx as nx
import pytest
from hypothesis import given, settings

from conftest import small_graphs
from hmgf.graph import GraphBuilder, format_graph, parse_graph
from hmgf.linkpred import ScoredPair, SelectionPolicy, score_pairs, select_edges


def friends_graph(edges):
    b = GraphBuilder()
    for a, c in edges:
        b.add_friend(str(a), str(c))
    return b.build()


def nx_scores(g, method):
    """Reference scores from networkx on all pairs at friend distance exactly 2."""
    G = nx.Graph()
    G.add_nodes_from(range(g.n))
    G.add_edges_from(g.friend_edges())
    lengths = dict(nx.all_pairs_shortest_path_length(G, cutoff=2))
    pairs = [(u, v) for u in range(g.n) for v, d in lengths[u].items() if d == 2 and u < v]
    if method == "common-neighbors":
        return {(u, v): float(len(list(nx.common_neighbors(G, u, v)))) for u, v in pairs}
    fn = nx.jaccard_coefficient if method == "jaccard" else nx.adamic_adar_index
    return {(u, v): s for u, v, s in fn(G, pairs)}


def test_path_common_neighbors():
    g = friends_graph([("a", "b"), ("b", "c")])
    [sp] = score_pairs(g, "common-neighbors")
    assert (g.labels[sp.u], g.labels[sp.v], sp.raw_score) == ("a", "c", 1.0)


def test_star_leaves_all_score_one():
    g = friends_graph([("c", "x"), ("c", "y"), ("c", "z")])
    pairs = score_pairs(g, "cn")
    assert sorted((g.labels[p.u], g.labels[p.v]) for p in pairs) == [
        ("x", "y"), ("x", "z"), ("y", "z")]
    assert all(p.raw_score == 1 for p in pairs)


def test_four_cycle_adamic_adar():
    g = friends_graph([(1, 2), (2, 3), (3, 4), (4, 1)])
    got = {(g.labels[p.u], g.labels[p.v]): p.raw_score for p in score_pairs(g, "adamic-adar")}
    assert set(got) == {("1", "3"), ("2", "4")}
    for s in got.values():
        assert s == pytest.approx(2 / math.log(2), rel=1e-15)
        assert s == pytest.approx(2.885, abs=5e-4)


def test_jaccard_value():
    # a-b-c plus a-d-c: N(a) = N(c) = {b, d}
    g = friends_graph([("a", "b"), ("b", "c"), ("a", "d"), ("d", "c")])
    got = {(g.labels[p.u], g.labels[p.v]): p.raw_score for p in score_pairs(g, "jaccard")}
    assert got[("a", "c")] == 1.0


def test_unknown_method():
    with pytest.raises(ValueError):
        score_pairs(friends_graph([(1, 2)]), "katz")


@pytest.mark.parametrize("method", ["common-neighbors", "jaccard", "adamic-adar"])
@settings(max_examples=40, deadline=None)
@given(g=small_graphs(max_n=9))
def test_scores_match_networkx(method, g):
    pairs = score_pairs(g, method)
    assert [(p.u, p.v) for p in pairs] == sorted((p.u, p.v) for p in pairs)
    got = {(p.u, p.v): p.raw_score for p in pairs}
    ref = nx_scores(g, method)
    assert got.keys() == ref.keys()
    for k in ref:
        assert got[k] == pytest.approx(ref[k], rel=1e-12)
    for p in pairs:
        assert p.u != p.v and not g.are_friends(p.u, p.v)
        assert p.raw_score > 0
        if method == "common-neighbors":
            assert p.raw_score == int(p.raw_score)


@settings(max_examples=30, deadline=None)
@given(small_graphs(max_n=9))
def test_relabeling_invariance(g):
    perm = list(range(g.n))
    random.Random(g.n).shuffle(perm)
    b = GraphBuilder()
    for i in range(g.n):
        b.add_vertex(f"v{perm[i]}")
    for u, v in g.friend_edges():
        b.add_friend(f"v{perm[u]}", f"v{perm[v]}")
    h = b.build()
    for method in ("cn", "jaccard", "aa"):
        assert sorted(p.raw_score for p in score_pairs(g, method)) == \
            sorted(p.raw_score for p in score_pairs(h, method))


def _pairs(*scores):
    return [ScoredPair(0, i + 1, s, "common-neighbors") for i, s in enumerate(scores)]


def test_select_threshold_normalizes_by_max():
    g = parse_graph("V 0\nV 1")
    out = select_edges(g, _pairs(3.0), SelectionPolicy(threshold=0.5))
    assert list(out.potential_edges()) == [(0, 1, 1.0)]


def test_select_threshold_drops_low():
    g = parse_graph("V 0\nV 1\nV 2")
    out = select_edges(g, _pairs(2.0, 1.0), SelectionPolicy(threshold=0.6))
    assert list(out.potential_edges()) == [(0, 1, 1.0)]
    keep_both = select_edges(g, _pairs(2.0, 1.0), SelectionPolicy(threshold=0.5))
    assert sorted(w for *_, w in keep_both.potential_edges()) == [0.5, 1.0]


def test_select_top_k_breaks_ties_by_pair():
    g = parse_graph("V 0\nV 1\nV 2\nV 3\nV 4")
    out = select_edges(g, _pairs(1.0, 2.0, 2.0, 2.0), SelectionPolicy(top_k=2))
    assert [(u, v) for u, v, _ in out.potential_edges()] == [(0, 2), (0, 3)]


def test_select_empty_and_zero_scores():
    g = friends_graph([(1, 2)])
    out = select_edges(g, [], SelectionPolicy(top_k=3))
    assert out.num_potential_edges == 0 and out.num_friend_edges == 1
    assert select_edges(g, [ScoredPair(0, 1, 0.0, "jaccard")],
                        SelectionPolicy(top_k=1)).num_potential_edges == 0


@pytest.mark.parametrize("kw", [{}, {"top_k": 0}, {"threshold": 0.0}, {"threshold": 1.5},
                                {"top_k": 1, "threshold": 0.5}])
def test_invalid_policy(kw):
    with pytest.raises(ValueError):
        SelectionPolicy(**kw)


def test_select_replaces_existing_potentials():
    g = parse_graph("F a b\nF b c\nP a d 0.3")
    out = select_edges(g, score_pairs(g, "aa"), SelectionPolicy(top_k=5))
    assert format_graph(out) == "V d\nF a b\nF b c\nP a c 1.0\n"


@settings(max_examples=30, deadline=None)
@given(small_graphs(max_n=9))
def test_normalized_weights_in_range(g):
    pairs = score_pairs(g, "aa")
    out = select_edges(g.with_potentials([]), pairs, SelectionPolicy(threshold=1e-9))
    ws = [w for *_, w in out.potential_edges()]
    if pairs:
        assert max(ws) == 1.0
        assert all(0 < w <= 1 for w in ws)
        assert len(ws) == len(pairs)
