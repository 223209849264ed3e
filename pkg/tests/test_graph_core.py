import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import gnp_reference
from spanembed.graph import (
    Degree2Spec,
    EdgeListError,
    Graph,
    complete_graph,
    derive_seed,
    empty_graph,
    gen_degree2,
    gen_gnp,
    gen_random_degree2,
    graph_union,
    make_rng,
    pad,
    read_edge_list,
    write_edge_list,
)


def assert_simple(g: Graph):
    adj = g.adjacency
    for v, row in enumerate(adj):
        assert all(a < b for a, b in zip(row, row[1:])), f"row {v} not strictly sorted"
        assert v not in row
        for u in row:
            assert v in adj[u]
    assert 2 * g.m == sum(len(r) for r in adj)


@st.composite
def graphs(draw, max_n=12):
    n = draw(st.integers(0, max_n))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    return Graph.from_edges(n, chosen)


# ---- gen_gnp ----


def test_gnp_complete_and_empty():
    g = gen_gnp(4, 1.0, 7)
    assert g.m == 6 and g == complete_graph(4)
    assert gen_gnp(100, 0.0, 7).m == 0
    assert gen_gnp(0, 0.5, 1).n == 0


def test_gnp_edge_count_within_five_sigma():
    g = gen_gnp(1000, 0.1, 12345)
    mean = math.comb(1000, 2) * 0.1
    sigma = math.sqrt(math.comb(1000, 2) * 0.1 * 0.9)
    assert abs(g.m - mean) < 5 * sigma


def test_gnp_mean_over_seeds():
    counts = np.array([gen_gnp(200, 0.3, s).m for s in range(200)])
    sigma = math.sqrt(19900 * 0.21)
    assert abs(counts.mean() - 5970) < 4 * sigma / math.sqrt(200)


def test_gnp_deterministic_and_simple():
    a, b = gen_gnp(150, 0.2, 99), gen_gnp(150, 0.2, 99)
    assert a == b
    assert a != gen_gnp(150, 0.2, 100)
    assert_simple(a)


@pytest.mark.parametrize("n,p", [(2, 0.5), (17, 0.3), (60, 0.7)])
def test_gnp_matches_documented_pair_order(n, p):
    u = make_rng(5).random(n * (n - 1) // 2)
    assert gen_gnp(n, p, 5).edges().tolist() == [list(e) for e in gnp_reference(n, p, u)]


def test_gnp_rejects_bad_p():
    with pytest.raises(ValueError):
        gen_gnp(5, 1.5, 0)


def test_derive_seed_distinguishes_labels():
    assert derive_seed(1, "a") == derive_seed(1, "a")
    assert len({derive_seed(1, "a"), derive_seed(1, "b"), derive_seed(2, "a"), derive_seed(1, "a", 0)}) == 4


# ---- degree-2 generators ----


def test_degree2_examples():
    g = gen_degree2(Degree2Spec(paths=(3,)))
    assert g.edges().tolist() == [[0, 1], [1, 2]]
    t = gen_degree2(Degree2Spec(cycles=(3,)))
    assert t == complete_graph(3)
    g = gen_degree2(Degree2Spec(paths=(1, 2), cycles=(5,)))
    assert g.n == 8 and g.m == 6 and g.max_degree() <= 2


def test_degree2_spec_validation():
    with pytest.raises(ValueError):
        Degree2Spec(cycles=(2,))
    with pytest.raises(ValueError):
        Degree2Spec(paths=(0,))


@given(st.lists(st.integers(1, 8), max_size=5), st.lists(st.integers(3, 8), max_size=5))
def test_degree2_edge_count(paths, cycles):
    g = gen_degree2(Degree2Spec(tuple(paths), tuple(cycles)))
    assert g.n == sum(paths) + sum(cycles)
    assert g.m == sum(x - 1 for x in paths) + sum(cycles)
    assert g.max_degree() <= 2
    assert_simple(g)


def test_random_degree2_small_cases():
    assert gen_random_degree2(0, 3).n == 0
    g = gen_random_degree2(1, 3)
    assert g.n == 1 and g.m == 0


@pytest.mark.parametrize("seed", range(20))
def test_random_degree2_max_degree(seed):
    g = gen_random_degree2(50, seed)
    assert g.n == 50
    assert g.degrees().max() <= 2
    assert g == gen_random_degree2(50, seed)


# ---- union ----


def test_union_examples():
    k3 = complete_graph(3)
    assert graph_union(k3, empty_graph(3)) == k3
    p01 = Graph.from_edges(3, [(0, 1)])
    p12 = Graph.from_edges(3, [(1, 2)])
    u = graph_union(p01, p12)
    assert u.m == 2 and u.edges().tolist() == [[0, 1], [1, 2]]
    g = gen_gnp(30, 0.3, 1)
    assert graph_union(g, g) == g


def test_union_with_injection():
    big = empty_graph(5)
    small = Graph.from_edges(2, [(0, 1)])
    assert graph_union(big, small, [4, 2]).edges().tolist() == [[2, 4]]
    with pytest.raises(ValueError):
        graph_union(big, small, [4, 5])
    with pytest.raises(ValueError):
        graph_union(empty_graph(1), small)


# ---- construction and immutability ----


def test_from_edges_collapses_duplicates():
    g = Graph.from_edges(3, [(0, 1), (1, 0), (0, 1)])
    assert g.m == 1


def test_from_edges_rejects_bad_input():
    with pytest.raises(ValueError):
        Graph.from_edges(3, [(1, 1)])
    with pytest.raises(ValueError):
        Graph.from_edges(3, [(0, 3)])


def test_graph_is_immutable():
    g = complete_graph(4)
    with pytest.raises(AttributeError):
        g.n = 5
    with pytest.raises(ValueError):
        g.indices[0] = 3


def test_pad():
    g = pad(Graph.from_edges(2, [(0, 1)]), 4)
    assert g.n == 4 and g.m == 1 and g.degree(3) == 0
    with pytest.raises(ValueError):
        pad(g, 2)


# ---- edge-list format ----


def test_read_examples():
    g = read_edge_list("3 2\n0 1\n1 2\n")
    assert g.n == 3 and g.edges().tolist() == [[0, 1], [1, 2]]
    g = read_edge_list("2 0\n")
    assert g.n == 2 and g.m == 0


def test_read_skips_comments():
    assert read_edge_list("# hi\n3 1\n# mid\n0 2\n").m == 1


def test_round_trip_path():
    g = gen_degree2(Degree2Spec(paths=(3,)))
    assert read_edge_list(write_edge_list(g)) == g


@settings(max_examples=200)
@given(graphs())
def test_round_trip_property(g):
    assert read_edge_list(write_edge_list(g)) == g


def test_round_trip_random_graphs():
    for s in range(1000):
        g = gen_gnp(int(s % 40), 0.3, s)
        assert read_edge_list(write_edge_list(g)) == g


@pytest.mark.parametrize(
    "text,line",
    [
        ("x 1\n0 1\n", 1),
        ("3 1\n0 0\n", 2),
        ("3 1\n0 3\n", 2),
        ("3 2\n0 1\n0 1\n", 3),
        ("3 1\n1 0\n", 2),
        ("3 1\n0 1 2\n", 2),
        ("3 2\n0 1\n", 2),
        ("3 1\n0 1\n1 2\n", 3),
        ("3 1\n0  1\n", 2),
    ],
)
def test_read_errors_carry_line_numbers(text, line):
    with pytest.raises(EdgeListError) as exc:
        read_edge_list(text)
    assert exc.value.lineno == line


def test_read_empty_text():
    with pytest.raises(EdgeListError):
        read_edge_list("")
