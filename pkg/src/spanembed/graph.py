"""Undirected simple graphs, generators and the edge-list text format.

Randomness: every generator draws from numpy's PCG64 bit generator seeded
through ``numpy.random.SeedSequence(seed)``. PCG64 and SeedSequence are
specified bit-for-bit by numpy and give the same stream on every platform.
Independent streams for sub-components come from :func:`derive_seed`.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import kernels

# Uniforms drawn per chunk in gen_gnp; chunking does not change the stream.
_GNP_CHUNK = 1 << 22


def derive_seed(seed: int, *labels) -> int:
    """Child seed for ``(seed, *labels)``: first 8 bytes of BLAKE2b over the repr."""
    digest = hashlib.blake2b(repr((int(seed),) + tuple(labels)).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


class Graph:
    """Immutable undirected simple graph on vertices ``0..n-1``.

    Stored as CSR arrays: the neighbours of ``v`` are
    ``indices[indptr[v]:indptr[v + 1]]``, strictly ascending.
    """

    __slots__ = ("n", "indptr", "indices")

    def __init__(self, n: int, indptr: np.ndarray, indices: np.ndarray):
        indptr = np.array(indptr, dtype=np.int64)
        indices = np.array(indices, dtype=np.int64)
        indptr.flags.writeable = False
        indices.flags.writeable = False
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "indptr", indptr)
        object.__setattr__(self, "indices", indices)

    def __setattr__(self, name, value):
        raise AttributeError("Graph is immutable")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]] | np.ndarray) -> "Graph":
        """Build from an edge collection; duplicates (in either orientation) collapse."""
        arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
        arr = arr.reshape(-1, 2)
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise ValueError(f"edge endpoint out of range for n={n}")
        if np.any(arr[:, 0] == arr[:, 1]):
            bad = arr[arr[:, 0] == arr[:, 1]][0]
            raise ValueError(f"self-loop at vertex {bad[0]}")
        lo = np.minimum(arr[:, 0], arr[:, 1])
        hi = np.maximum(arr[:, 0], arr[:, 1])
        return cls._from_canonical(n, lo, hi)

    @classmethod
    def _from_canonical(cls, n: int, lo: np.ndarray, hi: np.ndarray) -> "Graph":
        if lo.size:
            key = np.unique(lo * max(n, 1) + hi)
            lo, hi = key // max(n, 1), key % max(n, 1)
        src = np.concatenate([lo, hi])
        dst = np.concatenate([hi, lo])
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        return cls(n, indptr, dst)

    @property
    def m(self) -> int:
        return int(self.indices.size // 2)

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v] : self.indptr[v + 1]]

    def degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def max_degree(self) -> int:
        return int(self.degrees().max()) if self.n else 0

    def has_edge(self, u: int, v: int) -> bool:
        row = self.neighbors(u)
        i = np.searchsorted(row, v)
        return bool(i < row.size and row[i] == v)

    @property
    def adjacency(self) -> list[list[int]]:
        return [self.neighbors(v).tolist() for v in range(self.n)]

    def edges(self) -> np.ndarray:
        """(m, 2) array of edges ``u < v`` in lexicographic order."""
        src = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees())
        keep = src < self.indices
        return np.stack([src[keep], self.indices[keep]], axis=1)

    def dense(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=bool)
        e = self.edges()
        a[e[:, 0], e[:, 1]] = True
        a[e[:, 1], e[:, 0]] = True
        return a

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


def empty_graph(n: int) -> Graph:
    return Graph(n, np.zeros(n + 1, dtype=np.int64), np.empty(0, dtype=np.int64))


def complete_graph(n: int) -> Graph:
    lo, hi = np.triu_indices(n, k=1)
    return Graph._from_canonical(n, lo.astype(np.int64), hi.astype(np.int64))


def pad(g: Graph, n: int) -> Graph:
    """Add isolated vertices so that ``g`` has exactly ``n`` vertices."""
    if n < g.n:
        raise ValueError(f"cannot pad a graph on {g.n} vertices down to {n}")
    if n == g.n:
        return g
    indptr = np.concatenate([g.indptr, np.full(n - g.n, g.indptr[-1], dtype=np.int64)])
    return Graph(n, indptr, g.indices)


# --------------------------------------------------------------------------
# generators
# --------------------------------------------------------------------------


def gen_gnp(n: int, p: float, seed: int) -> Graph:
    """Erdős–Rényi G(n, p).

    Pairs ``(i, j)``, ``i < j``, are visited in lexicographic order and each
    consumes one double from the PCG64 stream; the pair is an edge iff the
    double is ``< p``. With ``p = 1`` every pair is kept, with ``p = 0`` none.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if n < 0:
        raise ValueError("n must be non-negative")
    rng = make_rng(seed)
    srcs, dsts = [], []
    row = 0
    while row < n - 1:
        stop = row
        count = 0
        while stop < n - 1 and (count == 0 or count + (n - 1 - stop) <= _GNP_CHUNK):
            count += n - 1 - stop
            stop += 1
        u = rng.random(count)
        s, d = kernels.gnp_rows(row, stop, n, u, float(p))
        srcs.append(s)
        dsts.append(d)
        row = stop
    if not srcs:
        return empty_graph(n)
    return Graph._from_canonical(n, np.concatenate(srcs), np.concatenate(dsts))


@dataclass(frozen=True)
class Degree2Spec:
    """Disjoint union of paths and cycles, given by their vertex counts."""

    paths: tuple[int, ...] = ()
    cycles: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "paths", tuple(int(x) for x in self.paths))
        object.__setattr__(self, "cycles", tuple(int(x) for x in self.cycles))
        if any(x < 1 for x in self.paths):
            raise ValueError("path lengths must be >= 1")
        if any(x < 3 for x in self.cycles):
            raise ValueError("cycle lengths must be >= 3")

    @property
    def n(self) -> int:
        return sum(self.paths) + sum(self.cycles)


def gen_degree2(spec: Degree2Spec) -> Graph:
    """Paths first, then cycles, numbered consecutively component by component."""
    edges = []
    base = 0
    for length in spec.paths:
        edges.extend((base + i, base + i + 1) for i in range(length - 1))
        base += length
    for length in spec.cycles:
        edges.extend((base + i, base + i + 1) for i in range(length - 1))
        edges.append((base, base + length - 1))
        base += length
    return Graph.from_edges(base, edges)


def gen_random_degree2(n: int, seed: int) -> Graph:
    """Random graph with maximum degree 2 on exactly ``n`` vertices.

    Sampling: while ``r > 0`` vertices remain, draw a component size ``s``
    uniformly from ``1..r``; if ``s >= 3`` it becomes a cycle with probability
    1/2, otherwise a path. The resulting disjoint union is relabelled by a
    uniform random permutation. Not uniform over all such graphs.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    rng = make_rng(seed)
    paths, cycles = [], []
    r = n
    while r > 0:
        s = int(rng.integers(1, r + 1))
        if s >= 3 and rng.random() < 0.5:
            cycles.append(s)
        else:
            paths.append(s)
        r -= s
    g = gen_degree2(Degree2Spec(tuple(paths), tuple(cycles)))
    perm = rng.permutation(n)
    return Graph.from_edges(n, perm[g.edges()])


def graph_union(g1: Graph, g2: Graph, injection: Sequence[int] | None = None) -> Graph:
    """Edge union on ``g1``'s vertex set; ``g2``'s vertex ``i`` becomes ``injection[i]``."""
    if injection is None:
        if g2.n > g1.n:
            raise ValueError(f"g2 has {g2.n} vertices but g1 only {g1.n}; supply an injection")
        inj = np.arange(g2.n, dtype=np.int64)
    else:
        inj = np.asarray(injection, dtype=np.int64)
        if inj.shape != (g2.n,):
            raise ValueError("injection must give one target per vertex of g2")
        if inj.size and (inj.min() < 0 or inj.max() >= g1.n):
            raise ValueError(f"injection maps outside 0..{g1.n - 1}")
        if np.unique(inj).size != inj.size:
            raise ValueError("injection is not injective")
    e2 = inj[g2.edges()]
    return Graph.from_edges(g1.n, np.concatenate([g1.edges(), e2]))


# --------------------------------------------------------------------------
# edge-list text format
# --------------------------------------------------------------------------


class EdgeListError(ValueError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


def write_edge_list(g: Graph) -> str:
    lines = [f"{g.n} {g.m}"]
    lines.extend(f"{u} {v}" for u, v in g.edges().tolist())
    return "\n".join(lines) + "\n"


def read_edge_list(text: str) -> Graph:
    """Parse ``"n m"`` then exactly ``m`` lines ``"u v"`` with ``0 <= u < v < n``.

    Lines starting with ``#`` are skipped anywhere in the file.
    """
    header = None
    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    n = m = 0
    last = 1
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r")
        if line == "" or line.startswith("#"):
            continue
        last = lineno
        parts = line.split(" ")
        try:
            a, b = (int(x) for x in parts)
        except ValueError:
            what = "header" if header is None else "edge line"
            raise EdgeListError(lineno, f"malformed {what} {line!r}") from None
        if header is None:
            n, m = a, b
            if n < 0 or m < 0:
                raise EdgeListError(lineno, "negative n or m in header")
            header = lineno
            continue
        if a == b:
            raise EdgeListError(lineno, f"self-loop at {a}")
        if not (0 <= a < b):
            raise EdgeListError(lineno, f"edge {a} {b} must satisfy 0 <= u < v")
        if b >= n:
            raise EdgeListError(lineno, f"vertex {b} out of range for n={n}")
        if (a, b) in seen:
            raise EdgeListError(lineno, f"duplicate edge {a} {b}")
        seen.add((a, b))
        edges.append((a, b))
        if len(edges) > m:
            raise EdgeListError(lineno, f"more than the declared {m} edges")
    if header is None:
        raise EdgeListError(1, "missing header")
    if len(edges) != m:
        raise EdgeListError(last, f"expected {m} edges, found {len(edges)}")
    return Graph.from_edges(n, edges)
