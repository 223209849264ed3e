"""Command-line front end.

Exit codes: 0 success, 1 embedding or check failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import itertools
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._accel import backend
from .embedder import embed, verify_embedding
from .goodness import (
    GoodnessParams,
    MatchingDeficient,
    SizeInfeasible,
    check_p1,
    check_p2,
    find_matching_M,
    partition_sites,
)
from .graph import Degree2Spec, derive_seed, gen_degree2, gen_gnp, gen_random_degree2, read_edge_list, write_edge_list
from .harness import (
    CSV_FIELDS,
    ExperimentConfig,
    NotBracketed,
    TrialResult,
    emit_plot_script,
    format_thresholds,
    read_scan_csv,
    scan,
    threshold_estimate,
)

PRESETS = {"desk": 0.02, "paper": 0.001}


class UsageError(Exception):
    pass


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _resolve_p(args, n: int) -> tuple[float, float]:
    try:
        cfg = ExperimentConfig(n=n, p=args.p, C=args.C)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    p, C, warning = cfg.resolve()
    if warning:
        print(f"warning: {warning}", file=sys.stderr)
    return p, C


def _eps(args) -> float:
    return args.eps if args.eps is not None else PRESETS[args.preset]


def _host(args):
    """Host from ``--host`` or generated from ``--n`` and ``--p``/``--C``."""
    if args.host:
        g = read_edge_list(Path(args.host).read_text())
        C = None
        if args.p is not None or args.C is not None:
            _, C = _resolve_p(args, g.n)
        return g, C
    if args.n is None:
        raise UsageError("give --host or --n with --p/--C")
    p, C = _resolve_p(args, args.n)
    return gen_gnp(args.n, p, derive_seed(args.seed, "host")), C


def _add_common(ap: argparse.ArgumentParser, *, host: bool = False, p_required: bool = False) -> None:
    if host:
        ap.add_argument("--host", help="host graph edge-list file")
    ap.add_argument("--n", type=int)
    grp = ap.add_mutually_exclusive_group(required=p_required)
    grp.add_argument("--p", type=float)
    grp.add_argument("--C", type=float)
    ap.add_argument("--eps", type=float, help="overrides the preset's eps")
    ap.add_argument("--delta", type=float, default=0.01)
    ap.add_argument("--preset", choices=sorted(PRESETS), default="desk")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out")
    ap.add_argument("--format", choices=("csv", "text"), default="text")


def cmd_gen_gnp(args) -> int:
    if args.n is None:
        raise UsageError("--n is required")
    p, _ = _resolve_p(args, args.n)
    _emit(write_edge_list(gen_gnp(args.n, p, args.seed)), args.out)
    return 0


def cmd_gen_pattern(args) -> int:
    if args.paths or args.cycles:
        h = gen_degree2(Degree2Spec(tuple(args.paths or ()), tuple(args.cycles or ())))
    elif args.n is not None:
        h = gen_random_degree2(args.n, args.seed)
    else:
        raise UsageError("give --n or --paths/--cycles")
    _emit(write_edge_list(h), args.out)
    return 0


def cmd_embed(args) -> int:
    g, C = _host(args)
    if args.pattern:
        h = read_edge_list(Path(args.pattern).read_text())
    else:
        h = gen_random_degree2(g.n, derive_seed(args.seed, "pattern"))
    params = GoodnessParams(C if C else None, _eps(args), args.delta)
    out = embed(g, h, params, args.seed)
    if args.dump_partition and out.pattern_partition is not None:
        Path(args.dump_partition).write_text(out.pattern_partition.to_text())
    if args.format == "csv":
        p = 2 * g.m / (g.n * (g.n - 1)) if args.p is None and args.C is None else _resolve_p(args, g.n)[0]
        row = TrialResult(g.n, C, p, params.eps, args.seed, 0, out.success,
                          None if out.success else out.stage, out.witness_size, 0.0)
        _emit(",".join(CSV_FIELDS) + "\n" + ",".join(row.row()) + "\n", args.out)
    else:
        _emit(out.to_text(), args.out)
        if not out.success and out.detail:
            print(out.detail, file=sys.stderr)
    return 0 if out.success else 1


def cmd_check_goodness(args) -> int:
    g, C = _host(args)
    if C is None:
        raise UsageError("checking goodness needs --C or --p")
    params = GoodnessParams(C, _eps(args), args.delta)
    try:
        sp = find_matching_M(g, partition_sites(g.n, params, args.seed))
    except (SizeInfeasible, MatchingDeficient) as exc:
        print(f"FAILURE {exc}")
        return 1
    reports = [check_p1(g, sp, params, args.budget, args.seed)]
    for k in args.k:
        r = check_p2(g, sp, params, k, args.budget, args.seed)
        reports += [r.small, r.large]
    if args.format == "csv":
        lines = ["clause,samples,violations,rate,size_limit,clamped,predicted,chernoff"]
        lines += [
            f"{r.clause},{r.samples},{len(r.violations)},{r.violation_rate:.6g},{r.size_limit},"
            f"{int(r.clamped)},{r.predicted:.6g},{r.chernoff:.6g}"
            for r in reports
        ]
        _emit("\n".join(lines) + "\n", args.out)
    else:
        _emit("\n".join(r.summary() for r in reports) + "\n", args.out)
    return 1 if any(r.violations for r in reports) else 0


def cmd_scan(args) -> int:
    if bool(args.p) == bool(args.C):
        raise UsageError("give exactly one of --p and --C")
    values = args.p or args.C
    key = "p" if args.p else "C"
    try:
        grid = [
            ExperimentConfig(n=n, eps=_eps(args), delta=args.delta, seed=args.seed, trials=args.trials,
                             pattern=args.pattern, **{key: v})
            for n, v in itertools.product(args.n, values)
        ]
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    for cfg in grid:
        if 2 * cfg.eps * cfg.n < 1:
            raise UsageError(f"PartitionInfeasible: 2*eps*n = {2 * cfg.eps * cfg.n:g} < 1 at n={cfg.n}, eps={cfg.eps:g}")
        warning = cfg.resolve()[2]
        if warning:
            print(f"warning: {warning}", file=sys.stderr)
    text = scan(grid, workers=args.workers, timing=args.timing)
    if args.format == "text":
        lines = [f"n={r['n']} p={r['p']} success={r['success']}" for r in read_scan_csv(text) if r["kind"] == "agg"]
        _emit("\n".join(lines) + "\n", args.out)
    else:
        _emit(text, args.out)
    if args.threshold:
        try:
            sys.stderr.write(format_thresholds(threshold_estimate(text)))
        except NotBracketed as exc:
            print(f"threshold: {exc}", file=sys.stderr)
    if args.plot_script:
        Path(args.plot_script).write_text(emit_plot_script(text, args.out or "scan.csv"))
    return 0


def cmd_verify(args) -> int:
    g = read_edge_list(Path(args.host).read_text())
    h = read_edge_list(Path(args.pattern).read_text())
    pairs = {}
    for line in Path(args.mapping).read_text().splitlines():
        if not line or line.startswith("#") or line.startswith("SUCCESS"):
            continue
        w, v = (int(x) for x in line.split())
        pairs[w] = v
    if sorted(pairs) != list(range(h.n)):
        print(f"FAIL mapping does not cover pattern vertices 0..{h.n - 1}")
        return 1
    res = verify_embedding(g, h, np.array([pairs[w] for w in range(h.n)]))
    print("PASS" if res.ok else f"FAIL {res.violation}")
    return 0 if res.ok else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spanembed", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({backend()} kernels)")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gen-gnp", help="write a G(n, p) host as an edge list")
    _add_common(s, p_required=True)
    s.set_defaults(func=cmd_gen_gnp)

    s = sub.add_parser("gen-pattern", help="write a max-degree-2 pattern")
    _add_common(s)
    s.add_argument("--paths", type=int, nargs="*")
    s.add_argument("--cycles", type=int, nargs="*")
    s.set_defaults(func=cmd_gen_pattern)

    s = sub.add_parser("embed", help="embed a pattern into a host")
    _add_common(s, host=True)
    s.add_argument("--pattern", help="pattern edge-list file (default: random)")
    s.add_argument("--dump-partition", metavar="PATH")
    s.set_defaults(func=cmd_embed)

    s = sub.add_parser("check-goodness", help="sample or enumerate the goodness properties")
    _add_common(s, host=True)
    s.add_argument("--budget", type=int, default=200)
    s.add_argument("--k", type=int, nargs="+", choices=(1, 2), default=[1, 2])
    s.set_defaults(func=cmd_check_goodness)

    s = sub.add_parser("scan", help="success-rate grid over n and p (or C)")
    s.add_argument("--n", type=int, nargs="+", required=True)
    s.add_argument("--p", type=float, nargs="+")
    s.add_argument("--C", type=float, nargs="+")
    s.add_argument("--eps", type=float)
    s.add_argument("--delta", type=float, default=0.01)
    s.add_argument("--preset", choices=sorted(PRESETS), default="desk")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--trials", type=int, default=10)
    s.add_argument("--pattern", default="random", help="random | file:PATH | spec:paths=..;cycles=..")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--timing", action="store_true", help="fill the ms column (output no longer reproducible)")
    s.add_argument("--threshold", action="store_true", help="print p50 estimates to stderr")
    s.add_argument("--plot-script", metavar="PATH")
    s.add_argument("--out")
    s.add_argument("--format", choices=("csv", "text"), default="csv")
    s.set_defaults(func=cmd_scan)

    s = sub.add_parser("verify", help="check a mapping file against host and pattern")
    s.add_argument("--host", required=True)
    s.add_argument("--pattern", required=True)
    s.add_argument("--mapping", required=True)
    s.set_defaults(func=cmd_verify)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
