"""Staged embedding of a max-degree-2 pattern as a spanning subgraph of a host.

Stage 0 sends each neighbour pair of a ``W6`` vertex onto one edge of the
matching ``M``. Stage ``i = 1..6`` then places ``W_i`` through a matching
that saturates ``W_i`` in the auxiliary bipartite graph ``B_i``: ``w`` may go
to a free vertex ``v`` of ``V_0..V_i`` when ``v`` is adjacent to the images
of all of ``w``'s already placed neighbours. Any step that cannot be carried
out becomes a structured :class:`EmbedOutcome` failure instead of an
exception, with a Hall witness when a stage matching is deficient.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .goodness import (
    GoodnessParams,
    MatchingDeficient,
    SitePartition,
    SizeInfeasible,
    build_cone_bipartite,
    find_matching_M,
    partition_sites,
)
from .graph import Graph, derive_seed, pad
from .matching import BipartiteInstance, DeficiencyWitness, Matching, saturating_or_witness
from .pattern import PartitionInfeasible, PatternPartition, maximalize, partition_pattern

MATCHING_DEFICIENT = "matching-deficient"
PARTITION_INFEASIBLE = "partition-infeasible"
M_DEFICIENT = "M-deficient"


class StageError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class PartialEmbedding:
    mapping: np.ndarray  # pattern vertex -> host vertex, -1 where undefined
    stage: int
    image: frozenset[int]

    @classmethod
    def empty(cls, n_pattern: int, stage: int = -1) -> "PartialEmbedding":
        return cls(np.full(n_pattern, -1, dtype=np.int64), stage, frozenset())

    @property
    def domain(self) -> np.ndarray:
        return np.flatnonzero(self.mapping >= 0)

    def edges_preserved(self, g: Graph, h: Graph) -> bool:
        """Every pattern edge with both ends placed lands on a host edge."""
        f = self.mapping
        e = h.edges()
        e = e[(f[e[:, 0]] >= 0) & (f[e[:, 1]] >= 0)]
        return all(g.has_edge(int(f[a]), int(f[b])) for a, b in e)


@dataclass
class EmbedOutcome:
    success: bool
    mapping: np.ndarray | None = None
    stage: int | None = None
    reason: str | None = None
    witness: DeficiencyWitness | None = None
    detail: str = ""
    pattern_partition: PatternPartition | None = None
    site_partition: SitePartition | None = None

    @property
    def witness_size(self) -> int | None:
        if self.witness is not None:
            return self.witness.size
        return None

    def to_text(self) -> str:
        if self.success:
            lines = ["SUCCESS"] + [f"{w} {v}" for w, v in enumerate(self.mapping.tolist())]
            return "\n".join(lines) + "\n"
        k = "" if self.witness_size is None else self.witness_size
        return f"FAILURE stage={self.stage} reason={self.reason} witness_size={k}\n"


def embed_W0(sp: SitePartition, pp: PatternPartition) -> PartialEmbedding:
    """Map the ``j``-th W6 neighbour pair ``(a, b)`` onto the ``j``-th edge ``(x, y)`` of ``M``.

    Orientation is smaller to smaller: ``a -> x``, ``b -> y``.
    """
    M = sp.matching or ()
    if len(M) != len(pp.w6_pairs):
        raise StageError(f"|M| = {len(M)} but |W6| = {len(pp.w6_pairs)}")
    f = np.full(pp.n, -1, dtype=np.int64)
    for (_, a, b), (x, y) in zip(pp.w6_pairs, M):
        a, b = min(a, b), max(a, b)
        f[a], f[b] = min(x, y), max(x, y)
    return PartialEmbedding(f, 0, frozenset(f[f >= 0].tolist()))


def _free_sites(sp: SitePartition, f: PartialEmbedding, i: int) -> np.ndarray:
    """``V_i*``: vertices of ``V_0..V_i`` not yet used by ``f``."""
    ok = sp.labels <= i
    used = np.fromiter(f.image, dtype=np.int64, count=len(f.image))
    ok[used] = False
    return np.flatnonzero(ok)


def placed_neighbor_images(h: Graph, pp: PatternPartition, f: PartialEmbedding, w: int) -> tuple[int, ...]:
    """``L_i(w)``: images of the neighbours of ``w`` that are already placed."""
    return tuple(sorted(int(f.mapping[x]) for x in h.neighbors(w).tolist() if f.mapping[x] >= 0))


def build_Bi(g: Graph, h: Graph, pp: PatternPartition, sp: SitePartition, f: PartialEmbedding, i: int) -> BipartiteInstance:
    """Stage-``i`` bipartite graph between ``W_i`` and ``V_i*``.

    Left labels are the pattern vertices of ``W_i``; right labels the host
    vertices of ``V_i*`` in ascending order.
    """
    if not 1 <= i <= 6:
        raise StageError(f"stage must be in 1..6, got {i}")
    if f.stage != i - 1:
        raise StageError(f"partial embedding is at stage {f.stage}, expected {i - 1}")
    Wi = pp.members(i)
    S = [placed_neighbor_images(h, pp, f, int(w)) for w in Wi]
    b = build_cone_bipartite(g, S, _free_sites(sp, f, i))
    return BipartiteInstance(
        b.left_size, b.right_size, b.indptr, b.indices,
        left_labels=tuple(Wi.tolist()), right_labels=b.right_labels,
    )


def build_Bi_direct(g: Graph, h: Graph, pp: PatternPartition, sp: SitePartition, f: PartialEmbedding, i: int) -> set[tuple[int, int]]:
    """Edge set ``{(w, v)}`` of ``B_i`` straight from its definition, via a dense adjacency matrix."""
    A = g.dense()
    sites = _free_sites(sp, f, i)
    edges = set()
    for w in pp.members(i).tolist():
        placed = [int(f.mapping[x]) for x in h.neighbors(w).tolist() if pp.classes[x] < i]
        ok = np.ones(sites.size, dtype=bool)
        for y in placed:
            ok &= A[y, sites]
        edges.update((w, int(v)) for v in sites[ok])
    return edges


def extend(f: PartialEmbedding, b: BipartiteInstance, m: Matching) -> PartialEmbedding:
    """Place every left vertex of ``b`` on its matched right vertex."""
    if len(m) != b.left_size or len({u for u, _ in m.pairs}) != b.left_size:
        raise StageError(f"matching covers {len(m)} of {b.left_size} left vertices")
    g = f.mapping.copy()
    new = []
    for u, v in m.pairs:
        w, x = b.left_labels[u], b.right_labels[v]
        if x in f.image:
            raise StageError(f"host vertex {x} is already used")
        g[w] = x
        new.append(x)
    return PartialEmbedding(g, f.stage + 1, f.image | frozenset(new))


def hall_diagnostic(b: BipartiteInstance) -> DeficiencyWitness | None:
    """``None`` when Hall's condition holds for the left side, else a violator."""
    r = saturating_or_witness(b)
    return r if isinstance(r, DeficiencyWitness) else None


@dataclass(frozen=True)
class VerifyResult:
    ok: bool
    violation: str = ""

    def __bool__(self) -> bool:
        return self.ok


def verify_embedding(g: Graph, h: Graph, f) -> VerifyResult:
    """Check that ``f`` is a bijection ``V(h) -> V(g)`` sending edges to edges."""
    f = np.asarray(f, dtype=np.int64)
    if f.shape != (h.n,):
        return VerifyResult(False, f"map has {f.size} entries for {h.n} pattern vertices")
    if h.n != g.n:
        return VerifyResult(False, f"pattern has {h.n} vertices, host {g.n}")
    if f.size and (f.min() < 0 or f.max() >= g.n):
        return VerifyResult(False, "map leaves the host vertex range")
    if np.unique(f).size != f.size:
        vals, counts = np.unique(f, return_counts=True)
        x = int(vals[counts > 1][0])
        return VerifyResult(False, f"host vertex {x} is hit twice")
    for a, b in h.edges().tolist():
        if not g.has_edge(int(f[a]), int(f[b])):
            return VerifyResult(False, f"edge {a}-{b} maps to non-edge {f[a]}-{f[b]}")
    return VerifyResult(True)


StageHook = Callable[[int, BipartiteInstance, PartialEmbedding], None]


def embed(
    g: Graph,
    h: Graph,
    params: GoodnessParams,
    seed: int,
    on_stage: StageHook | None = None,
) -> EmbedOutcome:
    """Embed ``h`` into ``g`` as a spanning subgraph.

    ``on_stage(i, B_i, f_{i-1})`` is called with every stage bipartite graph
    before it is matched.
    """
    if h.max_degree() > 2:
        raise ValueError("pattern must have maximum degree <= 2")
    if h.n > g.n:
        raise ValueError(f"pattern has {h.n} vertices, host only {g.n}")
    original = pad(h, g.n)
    hm = maximalize(original)
    try:
        pp = partition_pattern(hm, params.eps)
    except PartitionInfeasible as exc:
        return EmbedOutcome(False, stage=0, reason=PARTITION_INFEASIBLE, detail=str(exc))
    try:
        sp = partition_sites(g.n, params, derive_seed(seed, "embed"))
    except SizeInfeasible as exc:
        return EmbedOutcome(False, stage=0, reason=PARTITION_INFEASIBLE, detail=str(exc), pattern_partition=pp)
    try:
        sp = find_matching_M(g, sp, size=len(pp.w6_pairs))
    except MatchingDeficient as exc:
        return EmbedOutcome(False, stage=0, reason=M_DEFICIENT, detail=str(exc), pattern_partition=pp, site_partition=sp)

    f = embed_W0(sp, pp)
    for i in range(1, 7):
        b = build_Bi(g, hm, pp, sp, f, i)
        if on_stage is not None:
            on_stage(i, b, f)
        r = saturating_or_witness(b)
        if isinstance(r, DeficiencyWitness):
            return EmbedOutcome(
                False, stage=i, reason=MATCHING_DEFICIENT, witness=r,
                detail=f"{r.size} vertices of W{i} see only {len(r.neighborhood)} free sites",
                pattern_partition=pp, site_partition=sp,
            )
        f = extend(f, b, r)

    check = verify_embedding(g, original, f.mapping)
    if not check:
        raise AssertionError(f"internal error: completed embedding fails verification: {check.violation}")
    return EmbedOutcome(True, mapping=f.mapping, stage=6, pattern_partition=pp, site_partition=sp)
