"""Host-side structures and checkers for (n, C)-goodness.

A host on ``n`` vertices is split into ``V0..V6`` with ``|Vi| = ceil(eps n)``
for ``i >= 1``; ``V0`` carries a matching ``M`` of ``2 ceil(eps n)`` edges.
Goodness quantifies over all vertex subsets, so it cannot be certified at
any useful size. The checkers here enumerate every subset for ``n <= 16``
and otherwise sample, comparing violation counts with Chernoff predictions.

All logarithms are natural.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import networkx as nx
import numpy as np

from . import kernels
from .graph import Graph, derive_seed, make_rng
from .matching import BipartiteInstance
from .pattern import ceil_eps_n

EXHAUSTIVE_MAX_N = 16
_ENUMERATION_LIMIT = 2_000_000


class SizeInfeasible(ValueError):
    pass


class MatchingDeficient(ValueError):
    def __init__(self, achieved: int, required: int):
        super().__init__(f"G[V0] has a matching of only {achieved} edges; {required} required")
        self.achieved = achieved
        self.required = required


class ConeOverlapError(ValueError):
    pass


@dataclass(frozen=True)
class GoodnessParams:
    """Threshold constant ``C`` and the fractions ``eps``, ``delta``.

    ``C`` may be left as ``None`` when only the embedding is run; the
    goodness checkers need it.
    """

    C: float | None = None
    eps: float = 0.001
    delta: float = 0.01

    def __post_init__(self):
        if self.C is not None and not self.C > 0:
            raise ValueError(f"C must be positive, got {self.C}")
        if not 0 < self.eps:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if self.eps > 1 / 24:
            raise SizeInfeasible(f"eps = {self.eps} > 1/24 leaves |V0| below 3n/4")
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")

    @staticmethod
    def implied_C(n: int, p: float) -> float:
        return p / math.sqrt(math.log(n) / n)

    @classmethod
    def from_p(cls, n: int, p: float, eps: float = 0.001, delta: float = 0.01) -> "GoodnessParams":
        C = cls.implied_C(n, p)
        return cls(C if C > 0 else None, eps, delta)

    def p(self, n: int) -> float:
        return self._C() * math.sqrt(math.log(n) / n)

    def _C(self) -> float:
        if self.C is None:
            raise ValueError("this check needs the constant C")
        return self.C


@dataclass(frozen=True, eq=False)
class SitePartition:
    """Labels ``V0..V6`` of the host vertices, optionally with the matching ``M``."""

    labels: np.ndarray
    matching: tuple[tuple[int, int], ...] | None = None

    @property
    def n(self) -> int:
        return int(self.labels.size)

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=7)

    def members(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.labels == i)

    @property
    def vm(self) -> np.ndarray:
        if self.matching is None:
            return np.empty(0, dtype=np.int64)
        return np.array(sorted(x for e in self.matching for x in e), dtype=np.int64)

    def with_matching(self, matching: Sequence[tuple[int, int]]) -> "SitePartition":
        pairs = tuple((min(a, b), max(a, b)) for a, b in matching)
        used = [x for e in pairs for x in e]
        if len(set(used)) != len(used):
            raise ValueError("matching edges are not disjoint")
        if any(self.labels[x] != 0 for x in used):
            raise ValueError("matching leaves V0")
        return replace(self, matching=pairs)


def partition_sites(n: int, params: GoodnessParams, seed: int) -> SitePartition:
    """Seeded uniformly random split with ``|Vi| = ceil(eps n)``, ``i = 1..6``."""
    k = ceil_eps_n(params.eps, n)
    if 6 * k > n / 4:
        raise SizeInfeasible(f"6*ceil(eps*n) = {6 * k} > n/4 = {n / 4:g}; |V0| would drop below 3n/4")
    labels = np.repeat(np.arange(7, dtype=np.int64), [n - 6 * k] + [k] * 6)
    rng = make_rng(derive_seed(seed, "sites"))
    return SitePartition(labels[rng.permutation(n)])


def find_matching_M(g: Graph, sp: SitePartition, size: int | None = None) -> SitePartition:
    """Store a matching of ``2 ceil(eps n)`` edges of ``G[V0]`` in the partition.

    Greedy first: each ``V0`` vertex in ascending order takes its smallest
    free ``V0`` neighbour. Only if that falls short is a maximum matching of
    ``G[V0]`` computed (blossom algorithm) and truncated.
    """
    if size is None:
        size = 2 * int(sp.sizes[1])
    in_v0 = sp.labels == 0
    used = np.zeros(g.n, dtype=bool)
    pairs: list[tuple[int, int]] = []
    for u in np.flatnonzero(in_v0).tolist():
        if len(pairs) == size:
            break
        if used[u]:
            continue
        row = g.neighbors(u)
        free = row[in_v0[row] & ~used[row]]
        if free.size:
            v = int(free[0])
            used[u] = used[v] = True
            pairs.append((min(u, v), max(u, v)))
    if len(pairs) < size:
        sub = nx.Graph()
        sub.add_nodes_from(np.flatnonzero(in_v0).tolist())
        e = g.edges()
        e = e[in_v0[e[:, 0]] & in_v0[e[:, 1]]]
        sub.add_edges_from(e.tolist())
        best = sorted((min(a, b), max(a, b)) for a, b in nx.max_weight_matching(sub, maxcardinality=True))
        if len(best) < size:
            raise MatchingDeficient(len(best), size)
        pairs = best[:size]
    return sp.with_matching(pairs)


def build_cone_bipartite(g: Graph, S: Sequence[Sequence[int]], U: Iterable[int]) -> BipartiteInstance:
    """``B(S, U)``: ``L`` in ``S`` is joined to ``u`` in ``U`` iff ``L`` lies in ``N(u)``.

    Sets may have 0, 1 or 2 elements; the empty set is joined to all of ``U``.
    The right side is ``U`` sorted ascending.
    """
    U = sorted(int(u) for u in U)
    if len(set(U)) != len(U):
        raise ConeOverlapError("U has repeated vertices")
    owner: dict[int, int] = {}
    sets = np.full((len(S), 2), -1, dtype=np.int64)
    for i, L in enumerate(S):
        L = sorted(int(x) for x in L)
        if len(L) > 2:
            raise ValueError(f"set {i} has {len(L)} elements; at most 2 supported")
        if len(set(L)) != len(L):
            raise ConeOverlapError(f"set {i} repeats a vertex")
        for x in L:
            if not 0 <= x < g.n:
                raise ValueError(f"vertex {x} out of range")
            if x in owner:
                raise ConeOverlapError(f"sets {owner[x]} and {i} share vertex {x}")
            owner[x] = i
        sets[i, : len(L)] = L
    clash = next((u for u in U if u in owner), None)
    if clash is not None:
        raise ConeOverlapError(f"set {owner[clash]} meets U at vertex {clash}")
    right_pos = np.full(g.n, -1, dtype=np.int64)
    right_pos[U] = np.arange(len(U), dtype=np.int64)
    indptr, indices = kernels.cone_rows(g.indptr, g.indices, sets, right_pos, len(U))
    return BipartiteInstance(
        len(S), len(U), indptr, indices,
        left_labels=tuple(tuple(sorted(L)) for L in S),
        right_labels=tuple(U),
    )


def p1_statistic(g: Graph, M: Sequence[tuple[int, int]], U: Iterable[int]) -> int:
    """Number of matching edges ``{a, b}`` with a common neighbour in ``U``."""
    edge_of = np.full(g.n, -1, dtype=np.int64)
    for i, (a, b) in enumerate(M):
        edge_of[a] = edge_of[b] = i
    covered = np.zeros(len(M), dtype=bool)
    for u in U:
        if edge_of[u] >= 0:
            raise ValueError(f"U meets V(M) at vertex {u}")
        hit = edge_of[g.neighbors(u)]
        hit = hit[hit >= 0]
        if hit.size:
            covered |= np.bincount(hit, minlength=len(M)) == 2
    return int(covered.sum())


def chernoff_bound(mean: float, lam: float) -> float:
    """``2 exp(-lam^2 mean / 3)``, bound on P(|X - EX| >= lam EX) for a sum of Bernoullis."""
    if mean < 0:
        raise ValueError("mean must be non-negative")
    if not 0 < lam < 1:
        raise ValueError("lambda must lie in (0, 1)")
    return 2.0 * math.exp(-lam * lam * mean / 3.0)


# --------------------------------------------------------------------------
# thresholds
# --------------------------------------------------------------------------


def p1_size_limit(n: int, params: GoodnessParams) -> float:
    return params.delta * n / (params._C() ** 2 * math.log(n))


def p1_required(n: int, params: GoodnessParams, m_size: int, u_size: int) -> float:
    return params._C() ** 2 * math.log(n) / (16 * n) * m_size * u_size


def p2_small_limit(n: int, params: GoodnessParams, k: int) -> float:
    return params.delta / params._C() ** k * (n / math.log(n)) ** (k / 2)


def p2_small_required(n: int, params: GoodnessParams, k: int, s_size: int, vi_size: int) -> float:
    return (1 - params.delta) * params._C() ** k * (math.log(n) / n) ** (k / 2) * s_size * vi_size


def p2_large_threshold(n: int, params: GoodnessParams, k: int) -> float:
    return math.log(n) / params._C() ** (k - 1) * (n / math.log(n)) ** (k / 2)


# --------------------------------------------------------------------------
# reports
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    """One failing instance. ``sets`` is ``U`` (P1) or ``S`` (P2); ``target`` is
    the class index ``i`` (P2a) or the vertex set ``U`` (P2b)."""

    sets: tuple
    target: object
    value: float
    required: float


@dataclass
class ClauseReport:
    clause: str
    samples: int = 0
    violations: list[Violation] = field(default_factory=list)
    raw_limit: float = float("nan")
    size_limit: int = 0
    clamped: bool = False
    in_hypothesis: int = 0
    predicted: float = 0.0
    chernoff: float = 0.0
    exhaustive: bool = False
    note: str = ""

    @property
    def violation_rate(self) -> float:
        return len(self.violations) / self.samples if self.samples else 0.0

    def summary(self) -> str:
        mode = "exhaustive" if self.exhaustive else "sampled"
        lines = [
            f"{self.clause}: {self.samples} {mode} cases, {len(self.violations)} violations "
            f"(rate {self.violation_rate:.4g})",
            f"  size limit {self.raw_limit:.4g} -> {self.size_limit}" + (" (clamped)" if self.clamped else ""),
            f"  cases inside the unclamped hypothesis: {self.in_hypothesis}",
            f"  predicted failures: paper bound {self.predicted:.4g}, Chernoff {self.chernoff:.4g}",
        ]
        if self.note:
            lines.append(f"  note: {self.note}")
        return "\n".join(lines)


P1Report = ClauseReport


@dataclass
class P2Report:
    k: int
    small: ClauseReport
    large: ClauseReport

    @property
    def violations(self) -> list[Violation]:
        return self.small.violations + self.large.violations

    def summary(self) -> str:
        return f"P2 k={self.k}\n{self.small.summary()}\n{self.large.summary()}"


def _clamp(raw: float, hi: int) -> tuple[int, bool]:
    lim = math.floor(raw) if math.isfinite(raw) else hi
    val = min(max(lim, 1), hi)
    return val, val != lim


def _auto_exhaustive(n: int, exhaustive: bool | None) -> bool:
    return n <= EXHAUSTIVE_MAX_N if exhaustive is None else exhaustive


def _guard(count: int) -> None:
    if count > _ENUMERATION_LIMIT:
        raise ValueError(f"exhaustive enumeration of {count} cases refused; use sampling")


def check_p1(
    g: Graph,
    sp: SitePartition,
    params: GoodnessParams,
    budget: int,
    seed: int,
    exhaustive: bool | None = None,
) -> ClauseReport:
    if sp.matching is None:
        raise ValueError("site partition carries no matching M")
    n = g.n
    M = sp.matching
    in_vm = np.zeros(n, dtype=bool)
    in_vm[sp.vm] = True
    pool = np.flatnonzero(~in_vm)
    raw = p1_size_limit(n, params)
    cap, clamped = _clamp(raw, pool.size)
    rep = ClauseReport("P1", raw_limit=raw, size_limit=cap, clamped=clamped,
                       exhaustive=_auto_exhaustive(n, exhaustive))
    if budget <= 0 or pool.size == 0:
        return rep
    if rep.exhaustive:
        _guard(sum(math.comb(pool.size, r) for r in range(1, cap + 1)))
        cases: Iterable = (c for r in range(1, cap + 1) for c in itertools.combinations(pool.tolist(), r))
    else:
        cases = (_sample_subset(pool, cap, derive_seed(seed, "p1", i)) for i in range(budget))
    p_sq = params._C() ** 2 * math.log(n) / n
    for U in cases:
        stat = p1_statistic(g, M, U)
        need = p1_required(n, params, len(M), len(U))
        rep.samples += 1
        rep.in_hypothesis += len(U) <= raw
        rep.predicted += min(1.0, 2.0 / n ** (3 * len(U)))
        rep.chernoff += min(1.0, chernoff_bound(p_sq / 8 * len(M) * len(U), 0.5))
        if stat < need:
            rep.violations.append(Violation(tuple(U), None, stat, need))
    return rep


def _sample_subset(pool: np.ndarray, cap: int, seed: int) -> tuple[int, ...]:
    rng = make_rng(seed)
    size = int(rng.integers(1, cap + 1))
    return tuple(sorted(rng.choice(pool, size=size, replace=False).tolist()))


def _group(flat: Sequence[int], k: int) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(sorted(flat[j * k : (j + 1) * k])) for j in range(len(flat) // k))


def _disjoint_collections(pool: Sequence[int], k: int, size: int):
    """All collections of ``size`` pairwise disjoint ``k``-subsets of ``pool``."""
    if k == 1:
        yield from (tuple((x,) for x in c) for c in itertools.combinations(pool, size))
        return
    pairs = list(itertools.combinations(pool, 2))

    def extend(start: int, chosen: list, used: set):
        if len(chosen) == size:
            yield tuple(chosen)
            return
        for j in range(start, len(pairs)):
            a, b = pairs[j]
            if a in used or b in used:
                continue
            chosen.append(pairs[j])
            used.update(pairs[j])
            yield from extend(j + 1, chosen, used)
            chosen.pop()
            used.difference_update(pairs[j])

    yield from extend(0, [], set())


def _cover_count(g: Graph, S, target: np.ndarray) -> int:
    b = build_cone_bipartite(g, S, target)
    return int(np.unique(b.indices).size)


def check_p2(
    g: Graph,
    sp: SitePartition,
    params: GoodnessParams,
    k: int,
    budget: int,
    seed: int,
    exhaustive: bool | None = None,
) -> P2Report:
    """Evaluate both clauses of (P2) for ``k``-sets.

    Clause (a): small collections ``S`` avoiding ``V_i`` must cover at least
    ``(1 - delta) C^k (log n / n)^{k/2} |S| |V_i|`` vertices of ``V_i``.
    Clause (b): large ``S`` and ``U`` must span at least one edge of
    ``B(S, U)``. The band between the two size limits is not checked.
    """
    if k not in (1, 2):
        raise ValueError("k must be 1 or 2")
    n = g.n
    ex = _auto_exhaustive(n, exhaustive)
    p = params.p(n)
    classes = {i: sp.members(i) for i in range(1, 7)}
    everyone = np.arange(n, dtype=np.int64)

    raw_a = p2_small_limit(n, params, k)
    max_s = min((n - classes[i].size) // k for i in range(1, 7))
    cap_a, clamped_a = _clamp(raw_a, max_s)
    small = ClauseReport("P2a", raw_limit=raw_a, size_limit=cap_a, clamped=clamped_a, exhaustive=ex)

    def eval_small(S, i):
        Vi = classes[i]
        got = _cover_count(g, S, Vi)
        need = p2_small_required(n, params, k, len(S), Vi.size)
        small.samples += 1
        small.in_hypothesis += len(S) <= raw_a
        small.predicted += min(1.0, 2.0 / n ** (3 * len(S)))
        mean = Vi.size * (1 - (1 - p**k) ** len(S))
        small.chernoff += min(1.0, chernoff_bound(mean, params.delta / 2))
        if got < need:
            small.violations.append(Violation(S, i, got, need))

    raw_b = p2_large_threshold(n, params, k)
    t = max(1, math.ceil(raw_b - 1e-9))
    large = ClauseReport("P2b", raw_limit=raw_b, size_limit=t, clamped=raw_b < 1, exhaustive=ex)
    feasible_b = k * t + t <= n
    if not feasible_b:
        large.note = f"no S, U with |S|, |U| >= {t} fit in {n} vertices; clause vacuous"

    def eval_large(S, U):
        y = build_cone_bipartite(g, S, U).indices.size
        large.samples += 1
        large.in_hypothesis += 1
        large.predicted += min(1.0, 2.0 * math.exp(-math.sqrt(n)))
        large.chernoff += min(1.0, chernoff_bound(p**k * len(S) * len(U), 0.5))
        if y == 0:
            large.violations.append(Violation(S, tuple(U), 0, 1))

    if budget <= 0:
        return P2Report(k, small, large)

    if ex:
        _guard(6 * sum(math.comb(n, r * k) for r in range(1, cap_a + 1)))
        for i in range(1, 7):
            pool = np.setdiff1d(everyone, classes[i]).tolist()
            for size in range(1, cap_a + 1):
                for S in _disjoint_collections(pool, k, size):
                    eval_small(S, i)
        if feasible_b:
            # B(S, U) only gains edges as S or U grow, so minimum sizes suffice
            large.note = f"enumerated |S| = |U| = {t} (edge existence is monotone)"
            pairings = math.prod(range(2 * t - 1, 0, -2)) if k == 2 else 1
            _guard(math.comb(n, k * t) * pairings * math.comb(n - k * t, t))
            for S in _disjoint_collections(list(range(n)), k, t):
                used = {x for L in S for x in L}
                rest = [v for v in range(n) if v not in used]
                for U in itertools.combinations(rest, t):
                    eval_large(S, U)
        return P2Report(k, small, large)

    for j in range(budget):
        rng = make_rng(derive_seed(seed, "p2a", k, j))
        i = int(rng.integers(1, 7))
        pool = np.setdiff1d(everyone, classes[i])
        size = int(rng.integers(1, cap_a + 1))
        S = _group(rng.permutation(pool)[: k * size].tolist(), k)
        eval_small(S, i)
        if feasible_b:
            rng = make_rng(derive_seed(seed, "p2b", k, j))
            s_size = int(rng.integers(t, (n - t) // k + 1))
            u_size = int(rng.integers(t, n - k * s_size + 1))
            perm = rng.permutation(n).tolist()
            S = _group(perm[: k * s_size], k)
            U = tuple(sorted(perm[k * s_size : k * s_size + u_size]))
            eval_large(S, U)
    return P2Report(k, small, large)


def replay_violation(g: Graph, sp: SitePartition, params: GoodnessParams, clause: str, v: Violation) -> bool:
    """Re-evaluate a reported violation from scratch; True if it still fails."""
    n = g.n
    if clause == "P1":
        return p1_statistic(g, sp.matching, v.sets) < p1_required(n, params, len(sp.matching), len(v.sets))
    if clause == "P2a":
        Vi = sp.members(v.target)
        k = len(v.sets[0])
        return _cover_count(g, v.sets, Vi) < p2_small_required(n, params, k, len(v.sets), Vi.size)
    if clause == "P2b":
        return build_cone_bipartite(g, v.sets, v.target).indices.size == 0
    raise ValueError(f"unknown clause {clause!r}")
