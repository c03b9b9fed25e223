"""Hybrid cooperative co-evolution (HCC) and its CC / whole-space baselines.

A run first spends a share of the budget that grows with the degree of
overlap on a whole-space optimizer, then cycles through the subspaces with
warm-started subspace optimizers.  After each subspace round the variables
it shares with the previously optimized subspace are set to a mix of both
results, weighted by how much each subspace improved the context vector.
"""
from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .decomposition import Decomposition, degree_of_overlap
from .optimizers import (
    OptimizerConfig,
    cmaes_optimize,
    evaluate_batch,
    make_subspace_objective,
    sep_cmaes_optimize,
)

DEFAULT_TFES = 3_000_000


def glo_fes(do_value, tfes):
    """Budget of the whole-space phase: 0 without overlap, else (0.2 + 0.8 DO) * tfes."""
    if not 0 <= do_value <= 1:
        raise ValueError(f"degree of overlap must lie in [0, 1], got {do_value}")
    if do_value == 0:
        return 0
    # exact rational arithmetic so e.g. DO = 0.057 does not floor one short
    do = Fraction(do_value).limit_denominator(10**9)
    return math.floor((Fraction(1, 5) + Fraction(4, 5) * do) * int(tfes))


def blend_overlap(prev_slice, cur_slice, delta_prev, delta_cur):
    """Improvement-weighted mix of two value sets for shared variables.

    Falls back to the plain mean when neither side improved.
    """
    if delta_prev < 0 or delta_cur < 0:
        raise ValueError("improvements must be non-negative")
    prev_slice = np.asarray(prev_slice, dtype=np.float64)
    cur_slice = np.asarray(cur_slice, dtype=np.float64)
    if prev_slice.shape != cur_slice.shape:
        raise ValueError("slices must have equal length")
    total = delta_prev + delta_cur
    if total == 0:
        return 0.5 * (prev_slice + cur_slice)
    # normalize first: tiny deltas would underflow in delta * x
    return (delta_prev / total) * prev_slice + (delta_cur / total) * cur_slice


def apply_blend(vector, positions, prev_slice, delta_prev, delta_cur):
    """Copy of ``vector`` with ``vector[positions]`` blended against ``prev_slice``."""
    out = np.array(vector, dtype=np.float64)
    out[positions] = blend_overlap(prev_slice, out[positions], delta_prev, delta_cur)
    return out


@dataclass
class HccConfig:
    tfes: int = DEFAULT_TFES
    target: float | None = None
    seed: int | None = None
    sigma0: float = 0.5
    global_sigma0: float = 0.5
    global_lam: int | None = None
    stagnation_window: int = 100
    global_optimizer: object = sep_cmaes_optimize
    subspace_optimizer: object = cmaes_optimize
    trace_stride: int = 5000
    record_means: bool = False

    def __post_init__(self):
        if self.tfes <= 0:
            raise ValueError("tfes must be positive")
        if self.trace_stride < 1:
            raise ValueError("trace_stride must be positive")


@dataclass
class RunTrace:
    samples: list = field(default_factory=list)
    phase_marks: list = field(default_factory=list)
    wall_time: float = 0.0

    def write_csv(self, path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["fes", "best_so_far"])
            for fes, best in self.samples:
                w.writerow([fes, repr(float(best))])
        with path.with_name(path.stem + "_phases.csv").open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["phase", "fes"])
            w.writerows(self.phase_marks)

    @classmethod
    def read_csv(cls, path):
        path = Path(path)
        with path.open(newline="") as fh:
            rows = list(csv.DictReader(fh))
        samples = [(int(r["fes"]), float(r["best_so_far"])) for r in rows]
        marks = []
        side = path.with_name(path.stem + "_phases.csv")
        if side.exists():
            with side.open(newline="") as fh:
                marks = [(r["phase"], int(r["fes"])) for r in csv.DictReader(fh)]
        return cls(samples, marks)


@dataclass
class SubspaceRecord:
    round: int
    index: int
    fes_start: int
    fes_used: int
    delta: float
    blended: bool
    mean0: np.ndarray | None = None


@dataclass
class HccResult:
    x: np.ndarray
    value: float
    trace: RunTrace
    sum_fes: int
    glo_fes: int
    degree_of_overlap: float
    blend_evaluations: int
    records: list = field(default_factory=list)
    final_gbest: np.ndarray | None = None
    final_gbest_value: float = math.nan
    global_run: object = None


class _Tracker:
    """Counts every evaluation and keeps the best-so-far curve."""

    vectorized = True

    def __init__(self, problem, stride, callback=None):
        self.problem = problem
        self.fes = 0
        self.best = math.inf
        self.best_x = None
        self.samples = []
        self.stride = stride
        self.next_mark = stride
        self.callback = callback

    def __call__(self, X):
        X = np.asarray(X, dtype=np.float64)
        single = X.ndim == 1
        X2 = np.atleast_2d(X)
        v = evaluate_batch(self.problem, X2)
        for j, val in enumerate(v):
            self.fes += 1
            if val < self.best:
                self.best = float(val)
                self.best_x = X2[j].copy()
                self._sample()
            elif self.fes >= self.next_mark:
                self._sample()
            while self.next_mark <= self.fes:
                self.next_mark += self.stride
        return float(v[0]) if single else v

    def _sample(self):
        if self.samples and self.samples[-1][0] == self.fes:
            self.samples[-1] = (self.fes, self.best)
        else:
            self.samples.append((self.fes, self.best))
        if self.callback is not None:
            self.callback(self.fes, self.best)

    def close(self):
        if self.fes and (not self.samples or self.samples[-1][0] != self.fes):
            self._sample()


def _bounds(problem):
    return getattr(problem, "lower", -np.inf), getattr(problem, "upper", np.inf)


def _child_seed(rng):
    return int(rng.integers(2**63))


def _run_hybrid(problem, decomp: Decomposition, config: HccConfig, use_global: bool, callback=None):
    D = problem.dim
    if decomp.n != D:
        raise ValueError(f"decomposition covers {decomp.n} variables, problem has {D}")
    t0 = time.perf_counter()
    rng = np.random.default_rng(config.seed)
    lower, upper = _bounds(problem)
    tfes = int(config.tfes)
    tracker = _Tracker(problem, config.trace_stride, callback)
    groups = [np.asarray(g, dtype=np.int64) for g in decomp.groups]
    m = len(groups)
    do = degree_of_overlap(decomp, D)
    gfes = glo_fes(do, tfes) if use_global else 0
    global_run = None

    def reached():
        return config.target is not None and tracker.best <= config.target

    marks = [("init", 0)]
    omega = np.zeros(D)
    gbest = omega.copy()
    gval = tracker(gbest)

    if gfes > 0 and not reached():
        marks.append(("global", tracker.fes))
        budget = min(gfes, tfes - tracker.fes)
        run = config.global_optimizer(
            tracker,
            OptimizerConfig(dim=D, mean0=omega, sigma0=config.global_sigma0, lam=config.global_lam,
                            budget=budget, stagnation_window=None, lower=lower, upper=upper,
                            target=config.target),
            seed=_child_seed(rng),
        )
        if run.best_value < gval:
            gbest, gval = run.best_point.copy(), run.best_value
        omega = run.final_mean.copy()
        global_run = run

    # each subspace keeps its own optimizer mean, warm-started from omega
    means = [omega[g].copy() for g in groups]
    # shared variables with the previous subspace in the list order, plus
    # their positions inside both groups (groups are sorted)
    overlaps = [np.empty(0, dtype=np.int64)]
    for i in range(1, m):
        overlaps.append(np.intersect1d(groups[i - 1], groups[i]))
    pos_prev = [None] + [np.searchsorted(groups[i - 1], overlaps[i]) for i in range(1, m)]
    pos_cur = [None] + [np.searchsorted(groups[i], overlaps[i]) for i in range(1, m)]
    deltas = np.zeros(m)
    records = []
    n_blend = 0
    rnd = 0
    while not reached():
        sub_fes = (tfes - tracker.fes) // m
        if sub_fes < 1:
            break
        marks.append((f"cc_round_{rnd}", tracker.fes))
        for i, g in enumerate(groups):
            remaining = tfes - tracker.fes
            gamma = overlaps[i]
            reserve = 1 if gamma.size else 0
            budget = min(sub_fes, remaining - reserve)
            if budget < 1 or reached():
                break
            prev_g = gbest[gamma].copy()
            mean0 = means[i].copy()
            fes_start = tracker.fes
            run = config.subspace_optimizer(
                make_subspace_objective(tracker, gbest, g),
                OptimizerConfig(dim=len(g), mean0=mean0, sigma0=config.sigma0, budget=budget,
                                stagnation_window=config.stagnation_window, lower=lower, upper=upper,
                                target=config.target),
                seed=_child_seed(rng),
            )
            delta = 0.0
            if run.best_value < gval:
                delta = gval - run.best_value
                gbest[g] = run.best_point
                gval = run.best_value
            means[i] = run.final_mean.copy()
            deltas[i] = delta
            blended = False
            if gamma.size:
                means[i] = apply_blend(means[i], pos_cur[i], means[i - 1][pos_prev[i]], deltas[i - 1], delta)
                new = apply_blend(gbest, gamma, prev_g, deltas[i - 1], delta)
                # re-evaluate only if the context actually moved
                if not np.array_equal(new, gbest) and tracker.fes < tfes:
                    gbest = new
                    gval = tracker(gbest)
                    n_blend += 1
                    blended = True
            records.append(SubspaceRecord(rnd, i, fes_start, run.fes_used, delta, blended,
                                          mean0 if config.record_means else None))
        rnd += 1

    tracker.close()
    trace = RunTrace(list(tracker.samples), marks, time.perf_counter() - t0)
    return HccResult(
        x=tracker.best_x,
        value=tracker.best,
        trace=trace,
        sum_fes=tracker.fes,
        glo_fes=gfes,
        degree_of_overlap=do,
        blend_evaluations=n_blend,
        records=records,
        final_gbest=gbest,
        final_gbest_value=gval,
        global_run=global_run,
    )


def run_hcc(problem, decomp: Decomposition, config: HccConfig, callback=None) -> HccResult:
    """Two-phase hybrid run; ``callback(fes, best)`` sees every trace sample."""
    return _run_hybrid(problem, decomp, config, use_global=True, callback=callback)


def run_cc(problem, decomp: Decomposition, config: HccConfig, callback=None) -> HccResult:
    """Cooperative co-evolution alone: the hybrid loop without the whole-space phase."""
    return _run_hybrid(problem, decomp, config, use_global=False, callback=callback)


def run_nda(problem, config: HccConfig, callback=None) -> HccResult:
    """Single whole-space optimizer run with the full budget."""
    t0 = time.perf_counter()
    lower, upper = _bounds(problem)
    tracker = _Tracker(problem, config.trace_stride, callback)
    rng = np.random.default_rng(config.seed)
    run = config.global_optimizer(
        tracker,
        OptimizerConfig(dim=problem.dim, mean0=np.zeros(problem.dim), sigma0=config.global_sigma0,
                        lam=config.global_lam, budget=int(config.tfes), stagnation_window=None,
                        lower=lower, upper=upper, target=config.target),
        seed=_child_seed(rng),
    )
    tracker.close()
    trace = RunTrace(list(tracker.samples), [("nda", 0)], time.perf_counter() - t0)
    return HccResult(
        x=tracker.best_x,
        value=tracker.best,
        trace=trace,
        sum_fes=tracker.fes,
        glo_fes=run.fes_used,
        degree_of_overlap=math.nan,
        blend_evaluations=0,
        final_gbest=run.best_point,
        final_gbest_value=run.best_value,
    )
