"""Time the numba kernels against their numpy / interpreted counterparts.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Kernels with a vectorized form are compared against it. The rest
(Hopcroft-Karp, the walk order, the distance-2 colouring) have no numpy
form, so the interpreted ``py_func`` is what the fallback path runs.
Finally a whole ``scan`` is timed in a subprocess under each setting of
``SPANEMBED_DISABLE_JIT``.
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from spanembed import kernels
from spanembed.graph import gen_gnp, gen_random_degree2, make_rng


def best_of(fn, repeat):
    fn()  # warm-up, includes compilation
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    n = 2000
    u = make_rng(0).random(n * (n - 1) // 2)
    yield "gnp_rows n=2000", (lambda: kernels.gnp_rows_loop(0, n - 1, n, u, 0.3)), (
        lambda: kernels.gnp_rows_numpy(0, n - 1, n, u, 0.3)
    )

    g = gen_gnp(1000, 0.3, 1)
    indptr, indices = np.asarray(g.indptr), np.asarray(g.indices)
    rng = np.random.default_rng(2)
    perm = rng.permutation(1000)
    sets = perm[:400].reshape(200, 2).copy()
    sets.sort(axis=1)
    right = np.sort(perm[400:])
    right_pos = np.full(1000, -1, dtype=np.int64)
    right_pos[right] = np.arange(right.size)
    yield "cone_rows 200x600", (lambda: kernels.cone_rows_loop(indptr, indices, sets, right_pos, right.size)), (
        lambda: kernels.cone_rows_numpy(indptr, indices, sets, right_pos, right.size)
    )

    h = gen_random_degree2(3000, 3)
    hp, hi = np.asarray(h.indptr), np.asarray(h.indices)
    members = np.random.default_rng(3).random(3000) < 0.01
    yield "close_pair n=3000 r=3", (lambda: kernels.close_pair_loop(hp, hi, members, 3)), (
        lambda: kernels.close_pair_numpy(hp, hi, members, 3)
    )

    nl = nr = 1500
    rows = [np.flatnonzero(rng.random(nr) < 0.01) for _ in range(nl)]
    bp = np.zeros(nl + 1, dtype=np.int64)
    np.cumsum([r.size for r in rows], out=bp[1:])
    bi = np.concatenate(rows).astype(np.int64)
    hk = kernels.hopcroft_karp_loop
    yield "hopcroft_karp 1500x1500", (lambda: hk(nl, nr, bp, bi)), (
        lambda: getattr(hk, "py_func", hk)(nl, nr, bp, bi)
    )

    walk = kernels.walk_order_loop
    yield "walk_order n=3000", (lambda: walk(3000, hp, hi)), (lambda: getattr(walk, "py_func", walk)(3000, hp, hi))

    order = walk(3000, hp, hi)
    col = kernels.distance2_coloring_loop
    yield "distance2_coloring n=3000", (lambda: col(order, hp, hi, 5)), (
        lambda: getattr(col, "py_func", col)(order, hp, hi, 5)
    )


SCAN = (
    "import time\n"
    "from spanembed.harness import ExperimentConfig, scan\n"
    "grid = [ExperimentConfig(n=500, p=p, trials=5, seed=0) for p in (0.5, 0.8)]\n"
    "scan(grid[:1])\n"
    "t0 = time.perf_counter(); scan(grid); print(time.perf_counter() - t0)\n"
)


def scan_seconds(flag):
    env = dict(os.environ, SPANEMBED_DISABLE_JIT=flag)
    res = subprocess.run([sys.executable, "-c", SCAN], env=env, capture_output=True, text=True, check=True)
    return float(res.stdout.strip())


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    print(f"{'kernel':28} {'numba ms':>10} {'fallback ms':>12} {'speedup':>8}")
    for name, fast, slow in cases():
        a, b = best_of(fast, args.repeat), best_of(slow, max(1, args.repeat // 2))
        print(f"{name:28} {a * 1e3:10.2f} {b * 1e3:12.2f} {b / a:8.1f}")
    a, b = scan_seconds("0"), scan_seconds("1")
    print(f"{'scan n=500, 10 trials':28} {a * 1e3:10.1f} {b * 1e3:12.1f} {b / a:8.1f}")


if __name__ == "__main__":
    main()
