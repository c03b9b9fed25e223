"""Reproducible experiment runs over AOB suites.

Layout of an output directory::

    runs/<problem>/<algo>/run<k>.json      one record per run
    traces/<problem>/<algo>/run<k>.csv     best-so-far curve (+ _phases.csv)
    curves/<problem>_<algo>_median.csv     pointwise median curve
    summary.csv, summary.txt

Run seeds are ``SeedSequence([seed0, crc32(problem), crc32(algo), run])``
reduced to 63 bits.  Instances use ``seed0`` directly, so every problem of
a suite shares its permutation, shift and weights.
"""
from __future__ import annotations

import csv
import json
import logging
import os
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import aob
from .decomposition import accuracy, random_decomposition, rddsm
from .hcc import HccConfig, RunTrace, run_cc, run_hcc, run_nda
from .stats import wilcoxon_rank_sum

log = logging.getLogger(__name__)

ALGORITHMS = ("hcc", "cc_rddsm", "cc_random", "nda_sep")
REFERENCE = "hcc"
MINI_TFES = 100_000
MINI_RUNS = 5
RANDOM_GROUPS = 20


@dataclass
class ExperimentConfig:
    suite: list
    algorithms: list = field(default_factory=lambda: list(ALGORITHMS))
    runs: int = 25
    tfes: int = 3_000_000
    scale: str = "full"
    seed0: int = 0
    output: str = "results"
    workers: int = 1

    def __post_init__(self):
        self.suite = [(aob._base_key(b), int(lvl)) for b, lvl in self.suite]
        for _, lvl in self.suite:
            aob.gamma_preset(lvl)
        unknown = set(self.algorithms) - set(ALGORITHMS)
        if unknown:
            raise ValueError(f"unknown algorithms {sorted(unknown)}")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.scale not in ("full", "mini"):
            raise ValueError(f"unknown scale {self.scale!r}")
        if self.scale == "mini":
            self.tfes = min(self.tfes, MINI_TFES)

    @classmethod
    def from_json(cls, path):
        doc = json.loads(Path(path).read_text())
        if doc.get("scale") == "mini":
            doc.setdefault("runs", MINI_RUNS)
            doc.setdefault("tfes", MINI_TFES)
        return cls(**doc)


@dataclass
class ResultRow:
    problem: str
    algorithm: str
    n: int
    mean: float
    std: float
    time: float
    acc: float | None
    values: list
    fes_max: int = 0
    verdict: str = "NA"
    failures: int = 0


def run_seed(seed0, problem, algo, run):
    ss = np.random.SeedSequence([seed0, zlib.crc32(problem.encode()), zlib.crc32(algo.encode()), run])
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


def _decomposition(algo, instance, seed):
    if algo in ("hcc", "cc_rddsm"):
        return rddsm(aob.ground_truth_theta(instance))
    if algo == "cc_random":
        return random_decomposition(instance.dim, RANDOM_GROUPS, seed=seed)
    return None


def _execute(task):
    """Run one (problem, algorithm, run) cell and write its records."""
    out, base, level, scale, seed0, algo, k, tfes = task
    pid = aob.problem_id(base, level)
    seed = run_seed(seed0, pid, algo, k)
    rec = {"problem": pid, "algorithm": algo, "run": k, "seed": seed, "status": "ok"}
    run_file = Path(out) / "runs" / pid / algo / f"run{k}.json"
    trace_file = Path(out) / "traces" / pid / algo / f"run{k}.csv"
    try:
        instance = aob.generate_instance(aob.ProblemSpec.preset(base, level, seed=seed0, scale=scale))
        decomp = _decomposition(algo, instance, seed)
        cfg = HccConfig(tfes=tfes, seed=seed)
        t0 = time.perf_counter()
        if algo == "hcc":
            res = run_hcc(instance, decomp, cfg)
        elif algo == "nda_sep":
            res = run_nda(instance, cfg)
        else:
            res = run_cc(instance, decomp, cfg)
        rec["time"] = time.perf_counter() - t0
        rec["value"] = res.value
        rec["fes"] = res.sum_fes
        rec["acc"] = accuracy(decomp, aob.true_subspaces(instance), instance.dim) if decomp else None
        res.trace.write_csv(trace_file)
        rec["trace"] = str(trace_file.relative_to(out))
    except Exception as exc:  # recorded, never dropped
        log.exception("run %s/%s/%d failed", pid, algo, k)
        rec["status"] = f"error: {type(exc).__name__}: {exc}"
    run_file.parent.mkdir(parents=True, exist_ok=True)
    run_file.write_text(json.dumps(rec, indent=1))
    return rec


def _workers(config):
    env = os.environ.get("HCC_BENCH_WORKERS")
    return max(1, int(env)) if env else max(1, config.workers)


def run_experiment(config: ExperimentConfig):
    """Execute every (problem, algorithm, run) cell, then write the report."""
    out = Path(config.output)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(json.dumps(asdict(config), indent=1))
    tasks = [
        (str(out), base, level, config.scale, config.seed0, algo, k, config.tfes)
        for base, level in config.suite
        for algo in config.algorithms
        for k in range(config.runs)
    ]
    seeds = {run_seed(config.seed0, aob.problem_id(b, lv), a, k) for _, b, lv, _, _, a, k, _ in tasks}
    if len(seeds) != len(tasks):
        raise RuntimeError("run seed collision")
    workers = _workers(config)
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            list(pool.map(_execute, tasks))
    else:
        for t in tasks:
            _execute(t)
    return report(out)


def load_runs(out):
    return [json.loads(p.read_text()) for p in sorted(Path(out).glob("runs/*/*/run*.json"))]


def summarize(records):
    cells = {}
    for r in records:
        cells.setdefault((r["problem"], r["algorithm"]), []).append(r)
    rows = []
    for (pid, algo), recs in sorted(cells.items(), key=lambda kv: (kv[0][0], ALGORITHMS.index(kv[0][1]))):
        recs.sort(key=lambda r: r["run"])
        ok = [r for r in recs if r["status"] == "ok"]
        vals = [r["value"] for r in ok]
        accs = [r["acc"] for r in ok if r.get("acc") is not None]
        rows.append(ResultRow(
            problem=pid,
            algorithm=algo,
            n=len(vals),
            mean=float(np.mean(vals)) if vals else float("nan"),
            std=float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0,
            time=float(np.mean([r["time"] for r in ok])) if ok else float("nan"),
            acc=float(np.mean(accs)) if accs else None,
            values=vals,
            fes_max=max((r["fes"] for r in ok), default=0),
            failures=len(recs) - len(ok),
        ))
    by_problem = {}
    for row in rows:
        by_problem.setdefault(row.problem, {})[row.algorithm] = row
    for algos in by_problem.values():
        ref = algos.get(REFERENCE)
        for algo, row in algos.items():
            if algo == REFERENCE or ref is None or min(len(ref.values), len(row.values)) < 3:
                continue
            row.verdict = wilcoxon_rank_sum(ref.values, row.values).verdict
    return rows


def _fmt(v):
    return f"{v:.2e}"


CSV_FIELDS = ["problem", "algorithm", "n", "mean", "std", "time", "acc", "fes_max", "verdict", "failures", "values"]


def emit_report(rows, out, formats=("csv", "txt")):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if "csv" in formats:
        path = out / "summary.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_FIELDS)
            for r in rows:
                w.writerow([r.problem, r.algorithm, r.n, repr(r.mean), repr(r.std), repr(r.time),
                            "" if r.acc is None else repr(r.acc), r.fes_max, r.verdict, r.failures,
                            ";".join(repr(v) for v in r.values)])
        written.append(path)
    if "txt" in formats:
        header = ["Problem", "Algorithm", "Perf (mean±std)", "Time (s)", "Acc", "Test"]
        body = [
            [r.problem, r.algorithm, f"{_fmt(r.mean)}±{_fmt(r.std)}", f"{r.time:.2f}",
             "-" if r.acc is None else f"{100 * r.acc:.2f}%", r.verdict]
            for r in rows
        ]
        widths = [max(len(str(c)) for c in col) for col in zip(header, *body)]
        lines = ["  ".join(str(c).ljust(wd) for c, wd in zip(line, widths)).rstrip() for line in [header] + body]
        path = out / "summary.txt"
        path.write_text("\n".join(lines) + "\n")
        written.append(path)
    return written


def median_curve(traces):
    """Pointwise median of best-so-far step functions on the union of their FE grids."""
    grid = sorted({fes for t in traces for fes, _ in t.samples})
    if not grid:
        return []
    cols = []
    for t in traces:
        fes = np.array([s[0] for s in t.samples])
        best = np.array([s[1] for s in t.samples])
        pos = np.searchsorted(fes, grid, side="right") - 1
        cols.append(np.where(pos >= 0, best[np.maximum(pos, 0)], np.inf))
    med = np.median(np.vstack(cols), axis=0)
    return [(f, float(v)) for f, v in zip(grid, med) if np.isfinite(v)]


def report(out):
    """Rebuild summary tables and median curves from the run records in ``out``."""
    out = Path(out)
    records = load_runs(out)
    rows = summarize(records)
    emit_report(rows, out)
    curves = out / "curves"
    curves.mkdir(exist_ok=True)
    groups = {}
    for r in records:
        if r["status"] == "ok":
            groups.setdefault((r["problem"], r["algorithm"]), []).append(RunTrace.read_csv(out / r["trace"]))
    for (pid, algo), traces in groups.items():
        with (curves / f"{pid}_{algo}_median.csv").open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["fes", "best_so_far"])
            for f, v in median_curve(traces):
                w.writerow([f, repr(v)])
    return rows
