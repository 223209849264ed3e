import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import adjacency_sets, addable_pairs, bfs_distances, pairs_within, square_edges
from spanembed.graph import Degree2Spec, Graph, complete_graph, empty_graph, gen_degree2, gen_random_degree2
from spanembed.pattern import (
    InsufficientIndependentSet,
    PartitionInfeasible,
    PatternPartition,
    ceil_eps_n,
    check_partition,
    deficient_vertices,
    greedy_3independent,
    is_maximal,
    maximalize,
    partition_pattern,
    square,
)


def edge_set(g):
    return {tuple(e) for e in g.edges().tolist()}


def oracle_partition_problems(h, pp, eps):
    """Every partition invariant, checked literally with BFS distances."""
    n = h.n
    k = ceil_eps_n(eps, n)
    adj = adjacency_sets(n, edge_set(h))
    cls = pp.classes.tolist()
    W = {i: [v for v in range(n) if cls[v] == i] for i in range(7)}
    out = []
    if not all(0 <= c <= 6 for c in cls):
        out.append("labels")
    if len(W[6]) != 2 * k or any(len(adj[w]) != 2 for w in W[6]):
        out.append("W6 size/degree")
    if pairs_within(adj, W[6], 3):
        out.append("W6 not 3-independent")
    n_w6 = set().union(*(adj[w] for w in W[6])) if W[6] else set()
    if n_w6 != set(W[0]) or len(W[0]) != 4 * k:
        out.append("W0")
    for i in range(1, 6):
        if pairs_within(adj, W[i], 2):
            out.append(f"W{i} not 2-independent")
        if len(W[i]) < 2 * k:
            out.append(f"|W{i}| small")
    if sum(len(W[i]) for i in range(7)) != n or len(W[0]) != 2 * len(W[6]):
        out.append("size identity")
    for w, a, b in pp.w6_pairs:
        if {a, b} != adj[w]:
            out.append(f"pair of {w}")
    return out


@st.composite
def degree2_graphs(draw, max_n=14):
    n = draw(st.integers(0, max_n))
    return gen_random_degree2(n, draw(st.integers(0, 2**32)))


# ---- maximalize ----


def test_maximalize_path_becomes_triangle():
    h = maximalize(gen_degree2(Degree2Spec(paths=(3,))))
    assert edge_set(h) == {(0, 1), (1, 2), (0, 2)}


def test_maximalize_two_edges_become_4cycle():
    h = maximalize(Graph.from_edges(4, [(0, 1), (2, 3)]))
    assert edge_set(h) == {(0, 1), (2, 3), (0, 2), (1, 3)}
    assert addable_pairs(4, edge_set(h)) == []


def test_maximalize_cycle_unchanged():
    c = gen_degree2(Degree2Spec(cycles=(9,)))
    assert maximalize(c) == c


def test_maximalize_rejects_degree3():
    with pytest.raises(ValueError):
        maximalize(Graph.from_edges(4, [(0, 1), (0, 2), (0, 3)]))


@settings(max_examples=300)
@given(degree2_graphs())
def test_maximalize_properties(h):
    m = maximalize(h)
    assert m.max_degree() <= 2
    assert edge_set(h) <= edge_set(m)
    assert addable_pairs(m.n, edge_set(m)) == []
    assert is_maximal(m)
    assert len(deficient_vertices(m)) <= 2


def test_maximalize_large_random():
    for s in range(30):
        m = maximalize(gen_random_degree2(400, s))
        assert is_maximal(m) and m.max_degree() <= 2
        assert len(deficient_vertices(m)) <= 2


# ---- square ----


def test_square_examples():
    assert edge_set(square(gen_degree2(Degree2Spec(paths=(3,))))) == {(0, 1), (1, 2), (0, 2)}
    assert square(gen_degree2(Degree2Spec(cycles=(5,)))) == complete_graph(5)
    assert square(empty_graph(4)) == empty_graph(4)


def test_square_matches_bfs_oracle():
    for s in range(500):
        h = gen_random_degree2(s % 30, s)
        sq = square(h)
        assert edge_set(sq) == square_edges(h.n, edge_set(h))
        assert sq.max_degree() <= 4


# ---- greedy 3-independent set ----


def test_greedy_3independent_examples():
    assert greedy_3independent(gen_degree2(Degree2Spec(cycles=(8,))), 2) == [0, 4]
    assert greedy_3independent(complete_graph(3), 1) == [0]
    with pytest.raises(InsufficientIndependentSet):
        greedy_3independent(gen_degree2(Degree2Spec(paths=(2,))), 1)


def test_greedy_3independent_c8_is_only_valid_scan_result():
    h = gen_degree2(Degree2Spec(cycles=(8,)))
    adj = adjacency_sets(8, edge_set(h))
    far = [(u, v) for u, v in itertools.combinations(range(8), 2) if bfs_distances(adj, u).get(v, 99) > 3]
    assert far == [(0, 4), (1, 5), (2, 6), (3, 7)]
    assert tuple(greedy_3independent(h, 2)) == far[0]


@settings(max_examples=200)
@given(st.integers(7, 60), st.integers(0, 2**32))
def test_greedy_3independent_is_3independent(n, seed):
    h = maximalize(gen_random_degree2(n, seed))
    target = max(1, n // 14)
    picks = greedy_3independent(h, target)
    adj = adjacency_sets(n, edge_set(h))
    assert len(picks) == target
    assert all(len(adj[v]) == 2 for v in picks)
    assert not pairs_within(adj, picks, 3)


# ---- partition ----


def test_partition_long_cycle():
    h = gen_degree2(Degree2Spec(cycles=(5000,)))
    pp = partition_pattern(h, 0.001)
    sizes = pp.class_sizes
    assert sizes[6] == 10 and sizes[0] == 20
    assert all(sizes[i] >= 10 for i in range(1, 6))
    assert oracle_partition_problems(h, pp, 0.001) == []


def test_partition_triangle_plus_cycle():
    h = gen_degree2(Degree2Spec(cycles=(3, 4997)))
    pp = partition_pattern(h, 0.001)
    assert oracle_partition_problems(h, pp, 0.001) == []


def test_partition_too_small():
    with pytest.raises(PartitionInfeasible):
        partition_pattern(gen_degree2(Degree2Spec(cycles=(10,))), 0.001)


def test_partition_uses_ceiling():
    # 2*eps*n = 2.2, so |W6| = 2*ceil(1.1) = 4
    h = maximalize(gen_random_degree2(550, 3))
    pp = partition_pattern(h, 0.002)
    assert pp.class_sizes[6] == 4 and pp.class_sizes[0] == 8


@pytest.mark.parametrize("seed", range(40))
def test_partition_random_patterns(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(500, 1500))
    h = maximalize(gen_random_degree2(n, seed))
    pp = partition_pattern(h, 0.02)
    assert oracle_partition_problems(h, pp, 0.02) == []
    assert check_partition(h, pp, 0.02) == []


def test_partition_deterministic():
    h = maximalize(gen_random_degree2(800, 11))
    assert partition_pattern(h, 0.02) == partition_pattern(h, 0.02)


def test_partition_text_round_trip():
    h = maximalize(gen_random_degree2(600, 4))
    pp = partition_pattern(h, 0.02)
    text = pp.to_text()
    assert PatternPartition.from_text(text) == pp
    assert text.splitlines()[0] == f"0 {pp.classes[0]}"


def test_check_partition_catches_tampering():
    h = maximalize(gen_random_degree2(700, 8))
    pp = partition_pattern(h, 0.02)
    bad = pp.classes.copy()
    w1 = pp.members(1)
    # move a W1 vertex's neighbour into W1 so two W1 vertices are adjacent
    nb = int(h.neighbors(int(w1[0]))[0])
    bad[nb] = 1
    problems = check_partition(h, PatternPartition(bad, pp.w6_pairs), 0.02)
    assert problems
    assert oracle_partition_problems(h, PatternPartition(bad, pp.w6_pairs), 0.02)
