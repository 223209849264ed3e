"""Maximum bipartite matching and Hall-deficiency witnesses."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels


@dataclass(frozen=True, eq=False)
class BipartiteInstance:
    """Bipartite graph with left vertices ``0..left_size-1`` and right ``0..right_size-1``.

    ``indptr``/``indices`` hold the sorted, duplicate-free right neighbours of
    each left vertex. The label arrays map the two sides back to whatever
    they stand for (pattern vertices, k-sets, host vertices).
    """

    left_size: int
    right_size: int
    indptr: np.ndarray
    indices: np.ndarray
    left_labels: Sequence = field(default=None)
    right_labels: Sequence = field(default=None)

    def __post_init__(self):
        indptr = np.asarray(self.indptr, dtype=np.int64)
        indices = np.asarray(self.indices, dtype=np.int64)
        if indptr.shape != (self.left_size + 1,) or indptr[0] != 0 or indptr[-1] != indices.size:
            raise ValueError("indptr does not match left_size / indices")
        if indices.size and (indices.min() < 0 or indices.max() >= self.right_size):
            raise ValueError("right index out of range")
        if indices.size > 1:
            within_row = np.ones(indices.size - 1, dtype=bool)
            starts = indptr[1:-1]
            within_row[starts[(starts > 0) & (starts < indices.size)] - 1] = False
            bad = np.flatnonzero(within_row & (np.diff(indices) <= 0))
            if bad.size:
                u = int(np.searchsorted(indptr, bad[0], side="right") - 1)
                raise ValueError(f"adjacency of left vertex {u} is not strictly ascending")
        object.__setattr__(self, "indptr", indptr)
        object.__setattr__(self, "indices", indices)
        if self.left_labels is None:
            object.__setattr__(self, "left_labels", tuple(range(self.left_size)))
        if self.right_labels is None:
            object.__setattr__(self, "right_labels", tuple(range(self.right_size)))

    @classmethod
    def from_adjacency(cls, adj: Sequence[Sequence[int]], right_size: int, **labels) -> "BipartiteInstance":
        rows = [sorted(set(int(x) for x in row)) for row in adj]
        indptr = np.zeros(len(rows) + 1, dtype=np.int64)
        np.cumsum([len(r) for r in rows], out=indptr[1:])
        indices = np.array([x for r in rows for x in r], dtype=np.int64)
        return cls(len(rows), right_size, indptr, indices, **labels)

    def row(self, u: int) -> np.ndarray:
        return self.indices[self.indptr[u] : self.indptr[u + 1]]

    @property
    def adj(self) -> list[list[int]]:
        return [self.row(u).tolist() for u in range(self.left_size)]

    def edge_set(self) -> set[tuple[int, int]]:
        return {(u, int(v)) for u in range(self.left_size) for v in self.row(u)}

    def neighborhood(self, left_subset) -> set[int]:
        out: set[int] = set()
        for u in left_subset:
            out.update(self.row(u).tolist())
        return out

    def has_edge(self, u: int, v: int) -> bool:
        row = self.row(u)
        i = np.searchsorted(row, v)
        return bool(i < row.size and row[i] == v)


@dataclass(frozen=True)
class Matching:
    pairs: tuple[tuple[int, int], ...]

    def __len__(self) -> int:
        return len(self.pairs)

    def as_dict(self) -> dict[int, int]:
        return dict(self.pairs)


@dataclass(frozen=True)
class DeficiencyWitness:
    """Left subset whose neighbourhood is strictly smaller than itself."""

    left_subset: frozenset[int]
    neighborhood: frozenset[int]

    @property
    def size(self) -> int:
        return len(self.left_subset)

    @property
    def deficiency(self) -> int:
        return len(self.left_subset) - len(self.neighborhood)

    def holds_for(self, b: BipartiteInstance) -> bool:
        """Recompute N(U) from scratch and confirm |N(U)| < |U|."""
        nbhd = b.neighborhood(self.left_subset)
        return nbhd == set(self.neighborhood) and len(nbhd) < len(self.left_subset)


def _run(b: BipartiteInstance):
    return kernels.hopcroft_karp(b.left_size, b.right_size, b.indptr, b.indices)


def max_matching(b: BipartiteInstance) -> Matching:
    """Maximum-cardinality matching by Hopcroft–Karp.

    Scans follow ascending left index and sorted adjacency, so the result is
    a deterministic function of the instance.
    """
    match_l, _ = _run(b)
    left = np.flatnonzero(match_l >= 0)
    return Matching(tuple(zip(left.tolist(), match_l[left].tolist())))


def is_valid_matching(b: BipartiteInstance, m: Matching) -> bool:
    lefts = [u for u, _ in m.pairs]
    rights = [v for _, v in m.pairs]
    return (
        len(set(lefts)) == len(lefts)
        and len(set(rights)) == len(rights)
        and all(0 <= u < b.left_size and b.has_edge(u, v) for u, v in m.pairs)
    )


def saturating_or_witness(b: BipartiteInstance) -> Matching | DeficiencyWitness:
    """A matching covering every left vertex, or a Hall violator.

    The witness is the set of left vertices reachable from unmatched left
    vertices by alternating paths of a maximum matching (König). Its
    neighbourhood is exactly the reachable right vertices, all matched back
    into the set, so ``|N(U)| = |U| - #unmatched``.
    """
    match_l, match_r = _run(b)
    if np.all(match_l >= 0):
        return Matching(tuple((u, int(v)) for u, v in enumerate(match_l.tolist())))
    seen_l, seen_r = kernels.alternating_reach(b.left_size, b.right_size, b.indptr, b.indices, match_l, match_r)
    witness = DeficiencyWitness(
        frozenset(np.flatnonzero(seen_l).tolist()),
        frozenset(np.flatnonzero(seen_r).tolist()),
    )
    if not witness.holds_for(b):
        raise AssertionError("internal error: Hall witness failed recomputation")
    return witness
