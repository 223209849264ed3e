"""Pattern-side preparation: maximalization and the seven-class partition.

A pattern is a graph of maximum degree 2. Its vertices are split into classes
``W0..W6``:

* ``W6``: ``2 * ceil(eps * n)`` degree-2 vertices, pairwise at distance > 3;
* ``W0``: the neighbours of ``W6`` (pairwise disjoint pairs);
* ``W1..W5``: the colour classes of a distance-2 colouring with ``W0`` and
  ``W6`` removed, so each is 2-independent.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .graph import Graph

N_CLASSES = 7


class PartitionInfeasible(ValueError):
    """Raised when the pattern is too small for the requested ``eps``."""


class InsufficientIndependentSet(PartitionInfeasible):
    pass


def ceil_eps_n(eps: float, n: int) -> int:
    # rounding first keeps 0.02 * 300 from ceiling to 7
    return math.ceil(round(eps * n, 9))


def deficient_vertices(h: Graph) -> list[int]:
    """Vertices of degree below 2."""
    return np.flatnonzero(h.degrees() < 2).tolist()


def _check_degree2(h: Graph) -> None:
    if h.max_degree() > 2:
        v = int(np.argmax(h.degrees()))
        raise ValueError(f"pattern has maximum degree {h.max_degree()} (vertex {v}); expected <= 2")


def maximalize(h: Graph) -> Graph:
    """Add edges until no pair can be joined without exceeding degree 2.

    While some addable pair joins two different components, the
    lexicographically smallest such pair is added; afterwards the smallest
    addable pair inside a component (closing a path into a cycle).
    """
    _check_degree2(h)
    n = h.n
    deg = h.degrees().astype(np.int64).tolist()
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in h.edges().tolist():
        parent[find(u)] = find(v)
    adj = {v: set(h.neighbors(v).tolist()) for v in range(n) if deg[v] < 2}
    open_ = [v for v in range(n) if deg[v] < 2]  # sorted
    added = []

    def add(u: int, v: int) -> None:
        added.append((u, v))
        for x, y in ((u, v), (v, u)):
            deg[x] += 1
            adj[x].add(y)
            if deg[x] == 2:
                open_.pop(bisect.bisect_left(open_, x))
        parent[find(u)] = find(v)

    while len(open_) >= 2:
        u = open_[0]
        ru = find(u)
        # a component holds at most two open vertices, so this scan is short
        v = next((w for w in open_[1:] if find(w) != ru), None)
        if v is not None:
            add(u, v)
            continue
        # every open vertex lies in u's component
        pair = next(
            ((a, b) for i, a in enumerate(open_) for b in open_[i + 1 :] if b not in adj[a]),
            None,
        )
        if pair is None:
            break
        add(*pair)
    if not added:
        return h
    return Graph.from_edges(n, np.concatenate([h.edges(), np.array(added, dtype=np.int64).reshape(-1, 2)]))


def is_maximal(h: Graph) -> bool:
    open_ = deficient_vertices(h)
    return h.max_degree() <= 2 and not any(
        not h.has_edge(a, b) for i, a in enumerate(open_) for b in open_[i + 1 :]
    )


def square(h: Graph) -> Graph:
    """Graph joining every pair at distance 1 or 2 in ``h``."""
    edges = []
    for v in range(h.n):
        near = set(h.neighbors(v).tolist())
        for w in h.neighbors(v).tolist():
            near.update(h.neighbors(w).tolist())
        near.discard(v)
        edges.extend((v, w) for w in near if w > v)
    return Graph.from_edges(h.n, edges)


def _ball(h: Graph, v: int, radius: int) -> set[int]:
    seen = {v}
    frontier = [v]
    for _ in range(radius):
        frontier = [w for x in frontier for w in h.neighbors(x).tolist() if w not in seen]
        seen.update(frontier)
    return seen


def greedy_3independent(h: Graph, target: int) -> list[int]:
    """Ascending scan for ``target`` degree-2 vertices pairwise more than 3 apart."""
    _check_degree2(h)
    picked: list[int] = []
    blocked = np.zeros(h.n, dtype=bool)
    if target <= 0:
        return picked
    for v in np.flatnonzero(h.degrees() == 2).tolist():
        if blocked[v]:
            continue
        picked.append(v)
        if len(picked) == target:
            return picked
        blocked[list(_ball(h, v, 3))] = True
    raise InsufficientIndependentSet(
        f"found only {len(picked)} of {target} required 3-independent degree-2 vertices"
    )


@dataclass(frozen=True, eq=False)
class PatternPartition:
    classes: np.ndarray  # vertex -> label 0..6
    w6_pairs: tuple[tuple[int, int, int], ...]  # (w, a, b), a < b, N(w) = {a, b}

    @property
    def n(self) -> int:
        return int(self.classes.size)

    @property
    def class_sizes(self) -> np.ndarray:
        return np.bincount(self.classes, minlength=N_CLASSES)

    def members(self, label: int) -> np.ndarray:
        return np.flatnonzero(self.classes == label)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PatternPartition):
            return NotImplemented
        return np.array_equal(self.classes, other.classes) and self.w6_pairs == other.w6_pairs

    def to_text(self) -> str:
        lines = [f"{v} {c}" for v, c in enumerate(self.classes.tolist())]
        lines.append("# w6_pairs: w a b")
        lines.extend(f"{w} {a} {b}" for w, a, b in self.w6_pairs)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "PatternPartition":
        labels: dict[int, int] = {}
        pairs = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line or line.startswith("#"):
                continue
            parts = [int(x) for x in line.split()]
            if len(parts) == 2:
                labels[parts[0]] = parts[1]
            elif len(parts) == 3:
                pairs.append(tuple(parts))
            else:
                raise ValueError(f"line {lineno}: expected 2 or 3 integers")
        n = len(labels)
        if sorted(labels) != list(range(n)):
            raise ValueError("vertex labels must cover 0..n-1 exactly once")
        classes = np.array([labels[v] for v in range(n)], dtype=np.int64)
        return cls(classes, tuple(pairs))


def check_partition(h: Graph, pp: PatternPartition, eps: float) -> list[str]:
    """All violated partition invariants, as messages (empty when valid)."""
    problems = []
    n = h.n
    k = ceil_eps_n(eps, n)
    if pp.n != n:
        return [f"partition covers {pp.n} vertices, pattern has {n}"]
    if pp.classes.min(initial=0) < 0 or pp.classes.max(initial=0) >= N_CLASSES:
        return ["labels outside 0..6"]
    sizes = pp.class_sizes
    w6 = pp.members(6)
    if sizes[6] != 2 * k:
        problems.append(f"|W6| = {sizes[6]}, expected {2 * k}")
    if sorted(w for w, _, _ in pp.w6_pairs) != w6.tolist():
        problems.append("w6_pairs do not list W6 exactly")
    nbrs = set()
    for w, a, b in pp.w6_pairs:
        if h.neighbors(w).tolist() != [a, b]:
            problems.append(f"N({w}) is {h.neighbors(w).tolist()}, pair says ({a}, {b})")
        nbrs.update((a, b))
    if sorted(nbrs) != pp.members(0).tolist():
        problems.append("W0 differs from N(W6)")
    if sizes[0] != 4 * k:
        problems.append(f"|W0| = {sizes[0]}, expected {4 * k}")
    for label, radius in [(6, 3)] + [(i, 2) for i in range(1, 6)]:
        u, v = kernels.close_pair(h.indptr, h.indices, pp.classes == label, radius)
        if u != -1:
            problems.append(f"W{label} has {u} and {v} within distance {radius}")
    for i in range(1, 6):
        if sizes[i] < 2 * k:
            problems.append(f"|W{i}| = {sizes[i]} < {2 * k}")
    return problems


def partition_pattern(h: Graph, eps: float) -> PatternPartition:
    """Split a maximal max-degree-2 pattern into ``W0..W6``.

    Raises :class:`PartitionInfeasible` naming the violated constraint when
    the pattern is too small for ``eps``.
    """
    _check_degree2(h)
    n = h.n
    if 2 * eps * n < 1:
        raise PartitionInfeasible(f"2*eps*n = {2 * eps * n:g} < 1; n={n} is too small for eps={eps:g}")
    k = ceil_eps_n(eps, n)
    w6 = greedy_3independent(h, 2 * k)
    classes = np.full(n, -1, dtype=np.int64)
    pairs = []
    for w in w6:
        a, b = h.neighbors(w).tolist()
        pairs.append((w, a, b))
        classes[w] = 6
        classes[a] = 0
        classes[b] = 0

    order = kernels.walk_order(n, h.indptr, h.indices)
    colors = kernels.distance2_coloring(order, h.indptr, h.indices, 5)
    rest = classes == -1
    classes[rest] = colors[rest] + 1
    pp = PatternPartition(classes, tuple(pairs))
    problems = check_partition(h, pp, eps)
    if problems:
        raise PartitionInfeasible("; ".join(problems))
    return pp

