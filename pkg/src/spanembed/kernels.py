"""Numeric inner loops.

Every kernel exists in two forms: a loop form decorated with ``njit`` (compiled
by numba unless ``SPANEMBED_DISABLE_JIT`` is set) and, where the operation
vectorizes, a numpy form. The public names at the bottom of this module pick
the compiled loop when the JIT is on and the numpy form otherwise. Both forms
return identical arrays; ``tests/test_kernels.py`` holds them to that.

All graphs reach this module as CSR pairs ``(indptr, indices)`` of int64 with
each row sorted ascending.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from ._accel import JIT_ENABLED, njit


# --------------------------------------------------------------------------
# G(n, p) pair thresholding
# --------------------------------------------------------------------------


@njit(cache=True)
def gnp_rows_loop(row_start, row_stop, n, u, p):
    count = 0
    for k in range(u.shape[0]):
        if u[k] < p:
            count += 1
    src = np.empty(count, dtype=np.int64)
    dst = np.empty(count, dtype=np.int64)
    k = 0
    e = 0
    for i in range(row_start, row_stop):
        for j in range(i + 1, n):
            if u[k] < p:
                src[e] = i
                dst[e] = j
                e += 1
            k += 1
    return src, dst


def gnp_rows_numpy(row_start, row_stop, n, u, p):
    hits = np.flatnonzero(u < p).astype(np.int64)
    rows = np.arange(row_start, row_stop, dtype=np.int64)
    offsets = np.zeros(rows.size + 1, dtype=np.int64)
    np.cumsum(n - 1 - rows, out=offsets[1:])
    r = np.searchsorted(offsets, hits, side="right") - 1
    src = rows[r]
    dst = src + 1 + (hits - offsets[r])
    return src, dst


# --------------------------------------------------------------------------
# Hopcroft-Karp
# --------------------------------------------------------------------------


@njit(cache=True)
def hopcroft_karp_loop(n_left, n_right, indptr, indices):
    match_l = np.full(n_left, -1, dtype=np.int64)
    match_r = np.full(n_right, -1, dtype=np.int64)
    inf = np.iinfo(np.int64).max
    dist = np.empty(n_left, dtype=np.int64)
    queue = np.empty(n_left, dtype=np.int64)
    stack = np.empty(n_left + 1, dtype=np.int64)
    via = np.empty(n_left + 1, dtype=np.int64)
    it = np.empty(n_left, dtype=np.int64)
    while True:
        head = 0
        tail = 0
        for u in range(n_left):
            if match_l[u] == -1:
                dist[u] = 0
                queue[tail] = u
                tail += 1
            else:
                dist[u] = inf
        found = inf
        while head < tail:
            u = queue[head]
            head += 1
            if dist[u] >= found:
                continue
            for k in range(indptr[u], indptr[u + 1]):
                w = match_r[indices[k]]
                if w == -1:
                    if found == inf:
                        found = dist[u] + 1
                elif dist[w] == inf:
                    dist[w] = dist[u] + 1
                    queue[tail] = w
                    tail += 1
        if found == inf:
            break
        for u in range(n_left):
            it[u] = indptr[u]
        for s in range(n_left):
            if match_l[s] != -1:
                continue
            stack[0] = s
            depth = 1
            while depth > 0:
                u = stack[depth - 1]
                pushed = False
                while it[u] < indptr[u + 1]:
                    v = indices[it[u]]
                    it[u] += 1
                    w = match_r[v]
                    if w == -1:
                        if dist[u] + 1 == found:
                            via[depth - 1] = v
                            for lvl in range(depth):
                                a = stack[lvl]
                                b = via[lvl]
                                match_l[a] = b
                                match_r[b] = a
                            depth = 0
                            pushed = True
                            break
                    elif dist[w] == dist[u] + 1 and dist[w] < found:
                        via[depth - 1] = v
                        stack[depth] = w
                        depth += 1
                        pushed = True
                        break
                if not pushed:
                    dist[u] = inf
                    depth -= 1
    return match_l, match_r


@njit(cache=True)
def alternating_reach_loop(n_left, n_right, indptr, indices, match_l, match_r):
    """Left/right vertices reachable from unmatched left vertices by
    alternating paths (non-matching edge left->right, matching edge back)."""
    seen_l = np.zeros(n_left, dtype=np.bool_)
    seen_r = np.zeros(n_right, dtype=np.bool_)
    queue = np.empty(n_left, dtype=np.int64)
    tail = 0
    for u in range(n_left):
        if match_l[u] == -1:
            seen_l[u] = True
            queue[tail] = u
            tail += 1
    head = 0
    while head < tail:
        u = queue[head]
        head += 1
        for k in range(indptr[u], indptr[u + 1]):
            v = indices[k]
            if seen_r[v]:
                continue
            seen_r[v] = True
            w = match_r[v]
            if w != -1 and not seen_l[w]:
                seen_l[w] = True
                queue[tail] = w
                tail += 1
    return seen_l, seen_r


# --------------------------------------------------------------------------
# Cone bipartite rows: L ~ u iff L is contained in N(u)
# --------------------------------------------------------------------------


@njit(cache=True)
def _cone_row(indptr, indices, a, b, right_pos, n_right, out, pos, write):
    if a == -1:
        for r in range(n_right):
            if write:
                out[pos] = r
            pos += 1
        return pos
    if b == -1:
        for k in range(indptr[a], indptr[a + 1]):
            r = right_pos[indices[k]]
            if r >= 0:
                if write:
                    out[pos] = r
                pos += 1
        return pos
    i = indptr[a]
    j = indptr[b]
    ie = indptr[a + 1]
    je = indptr[b + 1]
    while i < ie and j < je:
        x = indices[i]
        y = indices[j]
        if x < y:
            i += 1
        elif y < x:
            j += 1
        else:
            r = right_pos[x]
            if r >= 0:
                if write:
                    out[pos] = r
                pos += 1
            i += 1
            j += 1
    return pos


@njit(cache=True)
def cone_rows_loop(indptr, indices, sets, right_pos, n_right):
    m = sets.shape[0]
    out_ptr = np.zeros(m + 1, dtype=np.int64)
    dummy = np.empty(0, dtype=np.int64)
    for s in range(m):
        out_ptr[s + 1] = _cone_row(indptr, indices, sets[s, 0], sets[s, 1], right_pos, n_right, dummy, out_ptr[s], False)
    out = np.empty(out_ptr[m], dtype=np.int64)
    for s in range(m):
        _cone_row(indptr, indices, sets[s, 0], sets[s, 1], right_pos, n_right, out, out_ptr[s], True)
    return out_ptr, out


def cone_rows_numpy(indptr, indices, sets, right_pos, n_right):
    rows = []
    everything = np.arange(n_right, dtype=np.int64)
    for a, b in sets:
        if a == -1:
            rows.append(everything)
            continue
        common = indices[indptr[a] : indptr[a + 1]]
        if b != -1:
            common = np.intersect1d(common, indices[indptr[b] : indptr[b + 1]], assume_unique=True)
        r = right_pos[common]
        rows.append(r[r >= 0])
    out_ptr = np.zeros(len(rows) + 1, dtype=np.int64)
    np.cumsum([r.size for r in rows], out=out_ptr[1:])
    out = np.concatenate(rows).astype(np.int64) if rows else np.empty(0, dtype=np.int64)
    return out_ptr, out


# --------------------------------------------------------------------------
# Degree <= 2 pattern helpers
# --------------------------------------------------------------------------


@njit(cache=True)
def walk_order_loop(n, indptr, indices):
    """Vertex order that walks each component of a max-degree-2 graph.

    Components come in order of their smallest vertex. A path is walked from
    its smaller endpoint, a cycle from its smallest vertex towards that
    vertex's smaller neighbour.
    """
    order = np.empty(n, dtype=np.int64)
    seen = np.zeros(n, dtype=np.bool_)
    pos = 0
    for v in range(n):
        if seen[v]:
            continue
        deg = indptr[v + 1] - indptr[v]
        start = v
        if deg > 0:
            # look for an endpoint along each direction from v
            best = -1
            for d in range(deg):
                prev = v
                cur = indices[indptr[v] + d]
                while cur != v:
                    cdeg = indptr[cur + 1] - indptr[cur]
                    if cdeg < 2:
                        if best == -1 or cur < best:
                            best = cur
                        break
                    nxt = indices[indptr[cur]]
                    if nxt == prev:
                        nxt = indices[indptr[cur] + 1]
                    prev = cur
                    cur = nxt
            if deg < 2:
                if best == -1 or v < best:
                    best = v
            if best != -1:
                start = best
        prev = -1
        cur = start
        while cur != -1 and not seen[cur]:
            seen[cur] = True
            order[pos] = cur
            pos += 1
            nxt = -1
            for k in range(indptr[cur], indptr[cur + 1]):
                w = indices[k]
                if w != prev and not seen[w]:
                    nxt = w
                    break
            prev = cur
            cur = nxt
    return order


@njit(cache=True)
def distance2_coloring_loop(order, indptr, indices, n_colors):
    """Greedy least-loaded colouring of the square of a max-degree-2 graph.

    Each vertex, taken in ``order``, gets the least-loaded colour (lowest
    index on ties) not already used within distance 2.
    """
    n = order.shape[0]
    color = np.full(n, -1, dtype=np.int64)
    load = np.zeros(n_colors, dtype=np.int64)
    banned = np.zeros(n_colors, dtype=np.bool_)
    for t in range(n):
        v = order[t]
        for c in range(n_colors):
            banned[c] = False
        for k in range(indptr[v], indptr[v + 1]):
            w = indices[k]
            if color[w] >= 0:
                banned[color[w]] = True
            for k2 in range(indptr[w], indptr[w + 1]):
                x = indices[k2]
                if x != v and color[x] >= 0:
                    banned[color[x]] = True
        best = -1
        for c in range(n_colors):
            if not banned[c] and (best == -1 or load[c] < load[best]):
                best = c
        color[v] = best
        load[best] += 1
    return color


@njit(cache=True)
def close_pair_loop(indptr, indices, members, radius):
    """First pair (u, v), u < v, of members at distance <= radius; (-1, -1) if none."""
    n = members.shape[0]
    stamp = np.full(n, -1, dtype=np.int64)
    frontier = np.empty(n, dtype=np.int64)
    nxt = np.empty(n, dtype=np.int64)
    best_u = -1
    best_v = -1
    for u in range(n):
        if not members[u]:
            continue
        stamp[u] = u
        frontier[0] = u
        fsize = 1
        for _ in range(radius):
            nsize = 0
            for f in range(fsize):
                x = frontier[f]
                for k in range(indptr[x], indptr[x + 1]):
                    y = indices[k]
                    if stamp[y] != u:
                        stamp[y] = u
                        nxt[nsize] = y
                        nsize += 1
                        if members[y] and y > u:
                            if best_u == -1 or y < best_v:
                                best_u = u
                                best_v = y
            for f in range(nsize):
                frontier[f] = nxt[f]
            fsize = nsize
        if best_u != -1:
            return best_u, best_v
    return best_u, best_v


def close_pair_numpy(indptr, indices, members, radius):
    n = members.shape[0]
    if n == 0:
        return -1, -1
    adj = sp.csr_matrix((np.ones(indices.size, dtype=np.int64), indices, indptr), shape=(n, n))
    reach = adj.copy()
    power = adj
    for _ in range(radius - 1):
        power = power @ adj
        reach = reach + power
    idx = np.flatnonzero(members)
    sub = reach[idx][:, idx].tocoo()
    mask = sub.row < sub.col
    if not mask.any():
        return -1, -1
    rows = idx[sub.row[mask]]
    cols = idx[sub.col[mask]]
    first = np.lexsort((cols, rows))[0]
    return int(rows[first]), int(cols[first])


# --------------------------------------------------------------------------
# dispatch
# --------------------------------------------------------------------------

if JIT_ENABLED:
    gnp_rows = gnp_rows_loop
    cone_rows = cone_rows_loop
    close_pair = close_pair_loop
else:
    gnp_rows = gnp_rows_numpy
    cone_rows = cone_rows_numpy
    close_pair = close_pair_numpy

# no vectorized formulation; interpreted loop when the JIT is off
hopcroft_karp = hopcroft_karp_loop
alternating_reach = alternating_reach_loop
walk_order = walk_order_loop
distance2_coloring = distance2_coloring_loop
