import numpy as np
import pytest

from spanembed.embedder import (
    M_DEFICIENT,
    MATCHING_DEFICIENT,
    PARTITION_INFEASIBLE,
    PartialEmbedding,
    StageError,
    build_Bi,
    build_Bi_direct,
    embed,
    embed_W0,
    extend,
    hall_diagnostic,
    verify_embedding,
)
from spanembed.goodness import GoodnessParams, SitePartition, find_matching_M, partition_sites
from spanembed.graph import (
    Degree2Spec,
    Graph,
    complete_graph,
    derive_seed,
    empty_graph,
    gen_degree2,
    gen_gnp,
    gen_random_degree2,
    pad,
)
from spanembed.matching import BipartiteInstance, DeficiencyWitness, Matching, saturating_or_witness
from spanembed.pattern import PatternPartition, maximalize, partition_pattern

PARAMS = GoodnessParams(eps=0.02)


def staged(g, h, seed=0, params=PARAMS):
    """The pipeline up to stage 0, done by hand."""
    hm = maximalize(pad(h, g.n))
    pp = partition_pattern(hm, params.eps)
    sp = find_matching_M(g, partition_sites(g.n, params, derive_seed(seed, "embed")), size=len(pp.w6_pairs))
    return hm, pp, sp, embed_W0(sp, pp)


# ---- stage 0 ----


def test_embed_W0_orientation():
    pp = PatternPartition(np.array([6, 0, 0, 1]), ((0, 2, 1),))
    sp = SitePartition(np.array([0, 0, 1, 2])).with_matching([(1, 0)])
    f = embed_W0(sp, pp)
    assert f.mapping.tolist() == [-1, 0, 1, -1]
    assert f.stage == 0 and f.image == {0, 1}


def test_embed_W0_empty():
    pp = PatternPartition(np.array([1, 2]), ())
    sp = SitePartition(np.array([0, 0])).with_matching([])
    f = embed_W0(sp, pp)
    assert f.stage == 0 and not f.image and f.domain.size == 0


def test_embed_W0_size_mismatch():
    pp = PatternPartition(np.array([6, 0, 0]), ((0, 1, 2),))
    with pytest.raises(StageError):
        embed_W0(SitePartition(np.zeros(3, dtype=np.int64)).with_matching([]), pp)


def test_embed_W0_cycle_500():
    g = gen_gnp(500, 0.5, 1)
    h = gen_degree2(Degree2Spec(cycles=(500,)))
    hm, pp, sp, f = staged(g, h)
    assert len(pp.w6_pairs) == 20 and len(sp.matching) == 20
    for (_, a, b), (x, y) in zip(pp.w6_pairs, sp.matching):
        assert {int(f.mapping[a]), int(f.mapping[b])} == {x, y}
    assert f.edges_preserved(g, hm)


# ---- B_i ----


def test_build_Bi_full_rows_and_pair_rows():
    n = 200
    g = gen_gnp(n, 0.5, 3)
    hm, pp, sp, f = staged(g, gen_random_degree2(n, 3))
    b = build_Bi(g, hm, pp, sp, f, 1)
    A = g.dense()
    for u, w in enumerate(b.left_labels):
        placed = [int(f.mapping[x]) for x in hm.neighbors(w).tolist() if f.mapping[x] >= 0]
        row = [b.right_labels[v] for v in b.row(u)]
        if not placed:
            assert len(row) == b.right_size
        else:
            expect = [v for v in b.right_labels if all(A[y, v] for y in placed)]
            assert row == expect


def _labels(n, w1, w0):
    classes = np.full(n, 2)
    classes[w0] = 0
    classes[w1] = 1
    return PatternPartition(classes, ())


def test_build_Bi_pair_rule_n30():
    g = gen_gnp(30, 0.6, 0)
    hm = gen_degree2(Degree2Spec(cycles=(30,)))
    sp = SitePartition(np.array([0] * 24 + [1, 2, 3, 4, 5, 6]))
    # vertex 1 sits between the placed vertices 0 and 2, so L = {10, 11}
    f = PartialEmbedding(np.array([10, -1, 11] + [-1] * 27), 0, frozenset({10, 11}))
    b = build_Bi(g, hm, _labels(30, [1], [0, 2]), sp, f, 1)
    common = [v for v in b.right_labels if g.has_edge(10, v) and g.has_edge(11, v)]
    assert b.left_labels == (1,)
    assert [b.right_labels[v] for v in b.row(0)] == common
    # vertex 2 has neighbours 1 and 3, neither placed, so its row is full
    f = PartialEmbedding(np.array([10, -1, -1, -1, 11] + [-1] * 25), 0, frozenset({10, 11}))
    b = build_Bi(g, hm, _labels(30, [2], [0, 4]), sp, f, 1)
    assert b.row(0).size == b.right_size


def test_build_Bi_stage_checks():
    g = complete_graph(100)
    hm, pp, sp, f = staged(g, gen_random_degree2(100, 1))
    with pytest.raises(StageError):
        build_Bi(g, hm, pp, sp, f, 2)
    with pytest.raises(StageError):
        build_Bi(g, hm, pp, sp, f, 7)


def test_stage_sizes_and_identity():
    n = 300
    g = gen_gnp(n, 0.9, 4)
    h = gen_random_degree2(n, 4)
    hm, pp, sp, f = staged(g, h)
    k = int(sp.sizes[1])
    W = pp.class_sizes
    V = sp.sizes
    for i in range(1, 7):
        b = build_Bi(g, hm, pp, sp, f, i)
        assert b.right_size - b.left_size == W[i + 1 :].sum() - V[i + 1 :].sum()
        if i == 6:
            assert b.right_size == 2 * k
        f = extend(f, b, _saturate(b))
        assert f.edges_preserved(g, hm)


def _saturate(b):
    r = saturating_or_witness(b)
    assert isinstance(r, Matching)
    return r


def test_build_Bi_matches_direct_construction():
    for seed in range(10):
        n = 250
        g = gen_gnp(n, 0.6, seed)
        hm, pp, sp, f = staged(g, gen_random_degree2(n, seed), seed)
        for i in range(1, 7):
            b = build_Bi(g, hm, pp, sp, f, i)
            got = {(b.left_labels[u], b.right_labels[v]) for u, v in b.edge_set()}
            assert got == build_Bi_direct(g, hm, pp, sp, f, i)
            r = hall_diagnostic(b)
            if r is not None:
                break
            f = extend(f, b, _saturate(b))


# ---- extend ----


def test_extend_empty_stage():
    f = PartialEmbedding(np.array([5, -1]), 2, frozenset({5}))
    b = BipartiteInstance.from_adjacency([], 1, right_labels=(7,))
    g = extend(f, b, Matching(()))
    assert g.stage == 3 and g.mapping.tolist() == [5, -1]


def test_extend_singleton():
    f = PartialEmbedding(np.array([5, -1]), 0, frozenset({5}))
    b = BipartiteInstance.from_adjacency([[0]], 1, left_labels=(1,), right_labels=(7,))
    g = extend(f, b, Matching(((0, 0),)))
    assert g.mapping.tolist() == [5, 7] and g.image == {5, 7} and g.stage == 1


def test_extend_rejects_non_saturating():
    f = PartialEmbedding.empty(2, 0)
    b = BipartiteInstance.from_adjacency([[0], [0]], 1)
    with pytest.raises(StageError):
        extend(f, b, Matching(((0, 0),)))


# ---- verify ----


def test_verify_examples():
    g = gen_gnp(20, 0.5, 0)
    assert verify_embedding(g, empty_graph(20), np.random.default_rng(0).permutation(20))
    h = Graph.from_edges(20, g.edges()[:10])
    assert verify_embedding(g, h, np.arange(20))
    assert not verify_embedding(g, h, np.zeros(20, dtype=int))
    assert not verify_embedding(g, h, np.arange(19))


def test_verify_detects_swapped_pair():
    n = 200
    g = gen_gnp(n, 0.9, 2)
    h = gen_random_degree2(n, 2)
    out = embed(g, h, PARAMS, 0)
    assert out.success
    f = out.mapping.copy()
    a, b = h.edges()[0]
    # swap a's image with that of some vertex whose image is not adjacent to f[b]
    bad = next(x for x in range(n) if x != a and not g.has_edge(int(f[x]), int(f[b])) and f[x] != f[b])
    f[a], f[bad] = f[bad], f[a]
    res = verify_embedding(g, h, f)
    assert not res.ok and "maps to non-edge" in res.violation


# ---- full pipeline ----


@pytest.mark.parametrize("n", [100, 200])
def test_complete_host_always_succeeds(n):
    for seed in range(10):
        h = gen_random_degree2(n, seed)
        out = embed(complete_graph(n), h, PARAMS, seed)
        assert out.success, out.detail
        assert verify_embedding(complete_graph(n), h, out.mapping)


def test_empty_host_fails_at_M():
    out = embed(empty_graph(200), gen_degree2(Degree2Spec(cycles=(200,))), PARAMS, 0)
    assert not out.success and out.stage == 0 and out.reason == M_DEFICIENT
    assert out.to_text() == "FAILURE stage=0 reason=M-deficient witness_size=\n"


def test_partition_infeasible_reported():
    out = embed(complete_graph(100), gen_random_degree2(100, 0), GoodnessParams(eps=0.001), 0)
    assert not out.success and out.reason == PARTITION_INFEASIBLE and out.stage == 0


def test_short_pattern_is_padded():
    g = complete_graph(120)
    h = gen_degree2(Degree2Spec(paths=(5,), cycles=(7,)))
    out = embed(g, h, PARAMS, 1)
    assert out.success and out.mapping.size == 120
    assert verify_embedding(g, pad(h, 120), out.mapping)


def test_rejects_bad_patterns():
    with pytest.raises(ValueError):
        embed(complete_graph(10), Graph.from_edges(4, [(0, 1), (0, 2), (0, 3)]), PARAMS, 0)
    with pytest.raises(ValueError):
        embed(complete_graph(10), empty_graph(11), PARAMS, 0)


def test_random_hosts_successes_verify_and_failures_replay():
    n = 300
    seen = {"ok": 0, "fail": 0}
    for seed in range(30):
        g = gen_gnp(n, 0.55, seed)
        h = gen_random_degree2(n, seed + 1000)
        stages = {}
        out = embed(g, h, PARAMS, seed, on_stage=lambda i, b, f: stages.__setitem__(i, b))
        if out.success:
            seen["ok"] += 1
            assert verify_embedding(g, h, out.mapping)
            assert out.to_text().startswith("SUCCESS\n")
        else:
            seen["fail"] += 1
            assert out.reason == MATCHING_DEFICIENT
            assert isinstance(out.witness, DeficiencyWitness)
            assert out.witness.holds_for(stages[out.stage])
            assert out.to_text() == f"FAILURE stage={out.stage} reason={MATCHING_DEFICIENT} witness_size={out.witness.size}\n"
    assert seen["ok"] + seen["fail"] == 30


def test_partial_edge_preservation_every_stage():
    n = 300
    g = gen_gnp(n, 0.8, 9)
    h = gen_random_degree2(n, 9)
    hm = maximalize(pad(h, n))
    checked = []

    def hook(i, b, f):
        assert f.stage == i - 1
        assert f.edges_preserved(g, hm)
        assert len(f.image) == f.domain.size
        checked.append(i)

    embed(g, h, PARAMS, 2, on_stage=hook)
    assert checked == list(range(1, 7)[: len(checked)]) and checked


def test_embed_is_deterministic():
    g = gen_gnp(200, 0.7, 5)
    h = gen_random_degree2(200, 5)
    a, b = embed(g, h, PARAMS, 3), embed(g, h, PARAMS, 3)
    assert a.to_text() == b.to_text()
