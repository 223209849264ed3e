"""Monte-Carlo experiments: single trials, (n, p) grid scans, threshold estimates."""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .embedder import embed
from .goodness import GoodnessParams
from .graph import Degree2Spec, Graph, derive_seed, gen_degree2, gen_gnp, gen_random_degree2, make_rng, read_edge_list

CSV_VERSION_LINE = "# spanembed scan v1"
CSV_FIELDS = ("kind", "n", "C", "p", "eps", "seed", "trial", "success", "stage", "witness", "ms")


class NotBracketed(ValueError):
    pass


def parse_pattern_spec(text: str) -> Degree2Spec:
    """``"paths=3,4;cycles=5"`` -> ``Degree2Spec((3, 4), (5,))``."""
    parts = {"paths": (), "cycles": ()}
    for chunk in filter(None, (c.strip() for c in text.split(";"))):
        key, _, vals = chunk.partition("=")
        if key.strip() not in parts:
            raise ValueError(f"unknown pattern spec key {key!r}")
        parts[key.strip()] = tuple(int(v) for v in vals.split(",") if v.strip())
    return Degree2Spec(parts["paths"], parts["cycles"])


@dataclass(frozen=True)
class ExperimentConfig:
    """One grid point.

    ``pattern`` is ``"random"``, ``"file:<path>"`` or ``"spec:paths=..;cycles=.."``.
    Exactly one of ``p`` and ``C`` is set; ``C`` stands for
    ``p = C (log n / n)^(1/2)``.
    """

    n: int
    p: float | None = None
    C: float | None = None
    eps: float = 0.02
    delta: float = 0.01
    seed: int = 0
    trials: int = 1
    pattern: str = "random"

    def __post_init__(self):
        if (self.p is None) == (self.C is None):
            raise ValueError("give exactly one of p and C")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if self.p is not None and not 0 <= self.p <= 1:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        if self.C is not None and self.C <= 0:
            raise ValueError("C must be positive")
        if not (self.pattern == "random" or self.pattern.startswith(("file:", "spec:"))):
            raise ValueError(f"unknown pattern source {self.pattern!r}")

    def resolve(self) -> tuple[float, float, str | None]:
        """``(p, C, warning)``, with ``p`` clamped to 1 when ``C`` asks for more."""
        scale = math.sqrt(math.log(self.n) / self.n)
        if self.p is not None:
            return self.p, self.p / scale, None
        p = self.C * scale
        if p > 1:
            return 1.0, self.C, f"C={self.C:g} gives p={p:.4g} > 1 at n={self.n}; clamped to 1"
        return p, self.C, None

    def params(self) -> GoodnessParams:
        _, C, _ = self.resolve()
        return GoodnessParams(C if C > 0 else None, self.eps, self.delta)

    def make_pattern(self, trial: int, config_index: int = 0) -> Graph:
        if self.pattern == "random":
            return gen_random_degree2(self.n, derive_seed(self.seed, config_index, trial, "pattern"))
        if self.pattern.startswith("file:"):
            return read_edge_list(Path(self.pattern[5:]).read_text())
        return gen_degree2(parse_pattern_spec(self.pattern[5:]))


@dataclass(frozen=True)
class TrialResult:
    n: int
    C: float
    p: float
    eps: float
    seed: int
    trial: int
    success: bool
    stage: int | None
    witness: int | None
    ms: float
    reason: str | None = None

    def row(self, timing: bool = False) -> list[str]:
        return [
            "trial", str(self.n), _fmt(self.C), _fmt(self.p), _fmt(self.eps), str(self.seed), str(self.trial),
            "1" if self.success else "0",
            "" if self.stage is None else str(self.stage),
            "" if self.witness is None else str(self.witness),
            f"{self.ms:.3f}" if timing else "",
        ]


def _fmt(x: float | None) -> str:
    return "" if x is None else f"{x:.6g}"


def run_trial(cfg: ExperimentConfig, trial_index: int, config_index: int = 0) -> TrialResult:
    """One embedding attempt on a fresh host and pattern.

    Seeds derive from ``(cfg.seed, config_index, trial_index)`` only. Errors
    raised while generating or embedding are recorded, not propagated.
    """
    p, C, _ = cfg.resolve()
    start = time.perf_counter()
    try:
        h = cfg.make_pattern(trial_index, config_index)
        g = gen_gnp(cfg.n, p, derive_seed(cfg.seed, config_index, trial_index, "host"))
        out = embed(g, h, cfg.params(), derive_seed(cfg.seed, config_index, trial_index, "embed"))
        success, stage, witness, reason = out.success, None if out.success else out.stage, out.witness_size, out.reason
    except Exception as exc:  # noqa: BLE001 - a trial must never abort a scan
        success, stage, witness, reason = False, 0, None, f"error: {exc}"
    ms = (time.perf_counter() - start) * 1000.0
    return TrialResult(cfg.n, C, p, cfg.eps, cfg.seed, trial_index, success, stage, witness, ms, reason)


def _task(args):
    cfg, ci, ti = args
    return ci, ti, run_trial(cfg, ti, ci)


def scan(grid: list[ExperimentConfig], workers: int = 1, timing: bool = False, schedule_seed: int | None = None) -> str:
    """CSV text: every trial row, then one ``agg`` row per configuration.

    Row order is (config index, trial index) however trials were scheduled.
    ``schedule_seed`` shuffles execution order, which must not change output.
    """
    if not grid:
        raise ValueError("empty grid")
    tasks = [(cfg, ci, ti) for ci, cfg in enumerate(grid) for ti in range(cfg.trials)]
    if schedule_seed is not None:
        tasks = [tasks[j] for j in make_rng(schedule_seed).permutation(len(tasks))]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            done = list(pool.map(_task, tasks, chunksize=4))
    else:
        done = [_task(t) for t in tasks]
    results = {(ci, ti): r for ci, ti, r in done}

    buf = io.StringIO()
    buf.write(CSV_VERSION_LINE + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for ci, cfg in enumerate(grid):
        rows = [results[(ci, ti)] for ti in range(cfg.trials)]
        for r in rows:
            w.writerow(r.row(timing))
        first = rows[0]
        rate = sum(r.success for r in rows) / len(rows)
        mean_ms = f"{sum(r.ms for r in rows) / len(rows):.3f}" if timing else ""
        w.writerow(["agg", str(cfg.n), _fmt(first.C), _fmt(first.p), _fmt(cfg.eps), str(cfg.seed), "",
                    f"{rate:.6f}", "", "", mean_ms])
    return buf.getvalue()


def read_scan_csv(text: str) -> list[dict[str, str]]:
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    if not lines:
        raise ValueError("CSV has no header")
    reader = csv.DictReader(lines)
    if tuple(reader.fieldnames or ()) != CSV_FIELDS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    rows = list(reader)
    for i, r in enumerate(rows, start=1):
        if r["kind"] not in ("trial", "agg") or None in r.values():
            raise ValueError(f"malformed CSV row {i}")
        try:
            int(r["n"]), float(r["p"]), float(r["success"])
        except ValueError:
            raise ValueError(f"malformed CSV row {i}") from None
    return rows


@dataclass(frozen=True)
class ThresholdRow:
    n: int
    p50: float
    reference: float  # (log n / n)^(1/2)

    @property
    def ratio(self) -> float:
        return self.p50 / self.reference


def threshold_estimate(csv_text: str) -> list[ThresholdRow]:
    """Per ``n``, the ``p`` where the success rate crosses 1/2.

    Linear interpolation between the last aggregate below 1/2 and the first
    at or above it (points ordered by ``p``; repeated ``p`` values are
    averaged).
    """
    by_n: dict[int, dict[float, list[float]]] = {}
    for r in read_scan_csv(csv_text):
        if r["kind"] == "agg":
            by_n.setdefault(int(r["n"]), {}).setdefault(float(r["p"]), []).append(float(r["success"]))
    out = []
    for n in sorted(by_n):
        pts = sorted((p, sum(v) / len(v)) for p, v in by_n[n].items())
        j = next((j for j, (_, rate) in enumerate(pts) if rate >= 0.5), None)
        if j is None or j == 0:
            raise NotBracketed(f"n={n}: success rates do not straddle 0.5")
        (p0, r0), (p1, r1) = pts[j - 1], pts[j]
        p50 = p0 + (0.5 - r0) * (p1 - p0) / (r1 - r0)
        out.append(ThresholdRow(n, p50, math.sqrt(math.log(n) / n)))
    return out


def format_thresholds(rows: list[ThresholdRow]) -> str:
    lines = ["n,p50,reference,ratio"]
    lines += [f"{r.n},{r.p50:.6g},{r.reference:.6g},{r.ratio:.6g}" for r in rows]
    return "\n".join(lines) + "\n"


_PLOT_TEMPLATE = '''#!/usr/bin/env python3
"""Embedding success rate against p, one curve per n.

Generated from {csv_path}; the CSV is the source of truth.
"""
import csv
import math

import matplotlib.pyplot as plt

CSV_PATH = {csv_path!r}
SERIES = {series!r}

with open(CSV_PATH) as fh:
    rows = [r for r in csv.DictReader(ln for ln in fh if not ln.startswith("#")) if r["kind"] == "agg"]

fig, ax = plt.subplots(figsize=(6, 4))
for n in SERIES:
    pts = sorted((float(r["p"]), float(r["success"])) for r in rows if int(r["n"]) == n)
    ax.plot([p for p, _ in pts], [s for _, s in pts], marker="o", label=f"n={{n}}")
    ax.axvline(math.sqrt(math.log(n) / n), linestyle=":", linewidth=0.8)
ax.set_xlabel("p")
ax.set_ylabel("success rate")
ax.set_ylim(-0.02, 1.02)
ax.legend()
fig.tight_layout()
fig.savefig(CSV_PATH.rsplit(".", 1)[0] + ".png", dpi=150)
'''


def emit_plot_script(csv_text: str, csv_path: str) -> str:
    rows = read_scan_csv(csv_text)
    series = sorted({int(r["n"]) for r in rows if r["kind"] == "agg"})
    return _PLOT_TEMPLATE.format(csv_path=str(csv_path), series=series)
