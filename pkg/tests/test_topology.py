import itertools

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stabilis import topology as T
from stabilis.errors import (
    DisconnectedGraph,
    DuplicateEdge,
    InvalidParams,
    NotLocallyProper,
    SelfLoop,
    TooLarge,
)

from conftest import connected_graphs


def brute_longest_path(g):
    """Longest simple path by trying every ordered vertex sequence."""
    best = 0
    adj = [set(ch) for ch in g.channel]
    for k in range(2, g.n + 1):
        for seq in itertools.permutations(range(g.n), k):
            if all(seq[i + 1] in adj[seq[i]] for i in range(k - 1)):
                best = k - 1
                break
    return best


def test_single_edge():
    g = T.build_graph([(0, 1)])
    assert (g.n, g.m, g.max_degree) == (2, 1, 1)
    assert g.degrees == (1, 1)


def test_p3():
    g = T.build_graph([(0, 1), (1, 2)])
    assert g.max_degree == 2
    assert g.diameter == 2


def test_exmatching_fixture():
    g = T.exmatching_fixture()
    assert g.max_degree == 4 and g.m == 14


def test_build_errors():
    with pytest.raises(SelfLoop):
        T.build_graph([(0, 0)])
    with pytest.raises(DuplicateEdge):
        T.build_graph([(0, 1), (1, 0)])
    with pytest.raises(DisconnectedGraph):
        T.build_graph([(0, 1), (2, 3)])
    with pytest.raises(InvalidParams):
        T.build_graph([])


def test_channel_default_and_explicit():
    g = T.build_graph([(0, 2), (0, 1), (0, 3)])
    assert g.channel[0] == (1, 2, 3)
    assert g.neighbor(0, 1) == 1 and g.local_index(0, 3) == 3
    h = T.build_graph([(0, 2), (0, 1), (0, 3)], channel_order=[(3, 1, 2), (0,), (0,), (0,)])
    assert h.neighbor(0, 1) == 3 and h.local_index(0, 2) == 3
    with pytest.raises(InvalidParams):
        T.build_graph([(0, 1), (0, 2)], channel_order=[(1,), (0,), (0,)])


def test_generators():
    assert T.five_chain().edges == ((0, 1), (1, 2), (2, 3), (3, 4))
    r = T.generate("ring", 4, seed=123)
    assert r.n == 4 and set(r.degrees) == {2}
    k = T.generate("clique", 5)
    assert k.m == 10
    with pytest.raises(InvalidParams):
        T.generate("ring", 2)
    with pytest.raises(InvalidParams):
        T.generate("random_connected", 5, 0.0)
    with pytest.raises(InvalidParams):
        T.generate("torus", 3)


@pytest.mark.parametrize("delta", [2, 3, 4, 5])
def test_star_caterpillar(delta):
    g = T.star_caterpillar(delta)
    assert g.n == delta ** 2 + 1
    assert g.max_degree == delta
    assert g.degree(0) == delta
    assert all(g.degree(h) == delta for h in g.channel[0])
    assert sum(d == 1 for d in g.degrees) == delta * (delta - 1)


def test_random_connected_deterministic():
    a = T.random_connected(12, 0.3, seed=5)
    b = T.generate("random_connected", 12, 0.3, seed=5)
    assert a == b


@given(connected_graphs(max_n=14))
def test_generated_graphs_well_formed(g):
    ng = nx.Graph(list(g.edges))
    assert nx.is_connected(ng) and ng.number_of_nodes() == g.n
    for p in range(g.n):
        assert sorted(g.channel[p]) == sorted(ng.neighbors(p))
        assert [g.local_index(p, g.neighbor(p, i)) for i in range(1, g.degree(p) + 1)] == \
            list(range(1, g.degree(p) + 1))
    assert g.max_degree == max(d for _, d in ng.degree())
    assert g.diameter == nx.diameter(ng)


def test_greedy_coloring_examples():
    assert sorted(T.greedy_local_coloring(T.path(2), 3).color) == [1, 2]
    assert sorted(T.greedy_local_coloring(T.clique(4), 9).color) == [1, 2, 3, 4]
    for seed in range(10):
        c = T.greedy_local_coloring(T.path(3), seed).color
        assert c[1] != c[0] and c[1] != c[2]


@given(connected_graphs(max_n=16), st.integers(0, 1000))
def test_greedy_coloring_proper(g, seed):
    c = T.greedy_local_coloring(g, seed)
    assert all(c.color[u] != c.color[v] for u, v in g.edges)
    assert max(c.color) <= g.max_degree + 1
    assert c == T.greedy_local_coloring(g, seed)


def test_dag_orientation_examples():
    assert T.dag_orientation(T.path(2), [1, 2]).arcs == {(0, 1)}
    assert T.dag_orientation(T.path(3), [2, 1, 3]).arcs == {(1, 0), (1, 2)}
    with pytest.raises(NotLocallyProper):
        T.dag_orientation(T.path(3), [1, 1, 2])


@settings(max_examples=100)
@given(connected_graphs(max_n=16), st.integers(0, 1000))
def test_dag_orientation_acyclic(g, seed):
    arcs = T.dag_orientation(g, T.greedy_local_coloring(g, seed)).arcs
    assert len(arcs) == g.m
    assert nx.is_directed_acyclic_graph(nx.DiGraph(list(arcs)))


@pytest.mark.parametrize("g, expected", [
    (T.path(3), 4),
    (T.clique(3), 6),
    (T.ring(4), 14),
    (T.star_caterpillar(2), 2 ** 4),
])
def test_orientation_colorings_count(g, expected):
    # acyclic orientations = |chromatic polynomial at -1|; trees have 2^m
    cs = T.orientation_colorings(g)
    assert len(cs) == expected
    assert all(g.is_locally_proper(c) for c in cs)


@pytest.mark.parametrize("g, expected", [
    (T.path(5), 4),
    (T.clique(4), 3),
    (T.ring(6), 5),
    (T.star_caterpillar(3), 4),
])
def test_longest_path_examples(g, expected):
    assert T.longest_elementary_path(g) == expected


@settings(max_examples=40, deadline=None)
@given(connected_graphs(max_n=7))
def test_longest_path_matches_brute_force(g):
    assert T.longest_elementary_path(g) == brute_longest_path(g)


def test_longest_path_too_large():
    with pytest.raises(TooLarge):
        T.longest_elementary_path(T.path(19))
    assert T.longest_elementary_path(T.path(18)) == 17


def test_file_roundtrip(tmp_path):
    g = T.exds_fixture()
    f = tmp_path / "g.txt"
    T.write_graph(g, f)
    text = f.read_text()
    assert text.splitlines()[0] == "5 4"
    assert text.splitlines()[-1] == "colors 1 2 1 2 1"
    assert T.read_graph(f) == g
    h = T.loads_graph("3 2\n2 1\n0 1\n")
    assert T.dumps_graph(h) == "3 2\n0 1\n1 2\n"
    with pytest.raises(InvalidParams):
        T.loads_graph("3 3\n0 1\n1 2\n")
