"""Budgeted covariance matrix adaptation evolution strategies.

Two variants share one driver: a full-covariance CMA-ES for subspaces and a
separable (diagonal) variant whose per-sample cost is linear in the
dimension, used for whole-space optimization.

Objectives are plain callables on 1-D vectors.  A callable with a truthy
``vectorized`` attribute is instead handed a 2-D array of candidates and
must return one value per row.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class ObjectiveError(ValueError):
    """The objective returned a non-finite value."""


def default_popsize(dim):
    return 4 + 3 * math.ceil(math.log(dim)) if dim > 1 else 4


def evaluate_batch(objective, X):
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if getattr(objective, "vectorized", False):
        return np.asarray(objective(X), dtype=np.float64).reshape(X.shape[0])
    return np.array([float(objective(x)) for x in X])


class Problem:
    """A black-box objective together with its dimension and box bounds."""

    def __init__(self, objective, dim, lower=-np.inf, upper=np.inf, vectorized=None):
        self.objective = objective
        self.dim = int(dim)
        self.lower = lower
        self.upper = upper
        self.vectorized = getattr(objective, "vectorized", False) if vectorized is None else vectorized

    def __call__(self, x):
        return self.objective(x)


@dataclass
class OptimizerConfig:
    dim: int
    mean0: np.ndarray | None = None
    sigma0: float = 0.5
    lam: int | None = None
    budget: int = 10_000
    stagnation_window: int | None = 100
    lower: float | np.ndarray = -np.inf
    upper: float | np.ndarray = np.inf
    target: float | None = None

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be positive")
        self.mean0 = np.zeros(self.dim) if self.mean0 is None else np.array(self.mean0, dtype=np.float64)
        if self.mean0.shape != (self.dim,):
            raise ValueError(f"mean0 must have length {self.dim}")
        if self.lam is None:
            self.lam = default_popsize(self.dim)
        if not self.sigma0 > 0:
            raise ValueError("sigma0 must be positive")
        if self.lam < 2:
            raise ValueError("population size must be at least 2")
        if self.budget < 1:
            raise ValueError("budget must be at least one evaluation")
        if self.stagnation_window is not None and self.stagnation_window < 1:
            raise ValueError("stagnation_window must be positive or None")


@dataclass
class OptimizerRun:
    best_point: np.ndarray
    best_value: float
    final_mean: np.ndarray
    fes_used: int
    stopped_by: str
    generations: int = 0
    final_sigma: float = field(default=float("nan"))


class _Strategy:
    """Standard (mu/mu_w, lambda) weights and step-size control parameters."""

    def __init__(self, mean, sigma, lam):
        n = mean.shape[0]
        self.n = n
        self.mean = mean.astype(np.float64).copy()
        self.sigma = float(sigma)
        self.lam = lam
        self.mu = lam // 2
        w = math.log((lam + 1) / 2) - np.log(np.arange(1, self.mu + 1))
        self.weights = w / w.sum()
        self.mueff = 1.0 / np.sum(self.weights**2)
        mueff = self.mueff
        self.cc = (4 + mueff / n) / (n + 4 + 2 * mueff / n)
        self.cs = (mueff + 2) / (n + mueff + 5)
        self.c1 = 2 / ((n + 1.3) ** 2 + mueff)
        self.cmu = min(1 - self.c1, 2 * (mueff - 2 + 1 / mueff) / ((n + 2) ** 2 + mueff))
        self.damps = 1 + 2 * max(0.0, math.sqrt((mueff - 1) / (n + 1)) - 1) + self.cs
        self.chi_n = math.sqrt(n) * (1 - 1 / (4 * n) + 1 / (21 * n**2))
        self.pc = np.zeros(n)
        self.ps = np.zeros(n)
        self.gen = 0

    def _hsig(self):
        norm = np.linalg.norm(self.ps) / math.sqrt(1 - (1 - self.cs) ** (2 * (self.gen + 1)))
        return norm / self.chi_n < 1.4 + 2 / (self.n + 1)

    def _update_sigma(self):
        self.sigma *= math.exp(min(1.0, (self.cs / self.damps) * (np.linalg.norm(self.ps) / self.chi_n - 1)))


class FullCMA(_Strategy):
    def __init__(self, mean, sigma, lam):
        super().__init__(mean, sigma, lam)
        self.C = np.eye(self.n)
        self.B = np.eye(self.n)
        self.D = np.ones(self.n)
        self.invsqrtC = np.eye(self.n)
        self._evals_since_eigen = 0

    def ask(self, k, rng):
        Z = rng.standard_normal((k, self.n))
        return self.mean + self.sigma * (Z * self.D) @ self.B.T

    def tell(self, X, f):
        order = np.argsort(f, kind="stable")[: self.mu]
        old = self.mean
        artmp = (X[order] - old) / self.sigma
        self.mean = old + self.sigma * (self.weights @ artmp)
        y_w = self.weights @ artmp
        self.ps = (1 - self.cs) * self.ps + math.sqrt(self.cs * (2 - self.cs) * self.mueff) * (self.invsqrtC @ y_w)
        hsig = self._hsig()
        self.pc = (1 - self.cc) * self.pc + hsig * math.sqrt(self.cc * (2 - self.cc) * self.mueff) * y_w
        rank_one = np.outer(self.pc, self.pc) + (1 - hsig) * self.cc * (2 - self.cc) * self.C
        rank_mu = (artmp.T * self.weights) @ artmp
        self.C = (1 - self.c1 - self.cmu) * self.C + self.c1 * rank_one + self.cmu * rank_mu
        self._update_sigma()
        self.gen += 1
        # eigendecomposition is refreshed lazily, O(n^2) amortised per sample
        self._evals_since_eigen += self.lam
        if self._evals_since_eigen > self.lam / (self.c1 + self.cmu) / self.n / 10:
            self._evals_since_eigen = 0
            self.C = np.triu(self.C) + np.triu(self.C, 1).T
            d2, self.B = np.linalg.eigh(self.C)
            floor = max(d2.max(), 1e-300) * 1e-14
            if d2.min() < floor:
                d2 = np.maximum(d2, floor)
                self.C = (self.B * d2) @ self.B.T
            self.D = np.sqrt(d2)
            self.invsqrtC = (self.B / self.D) @ self.B.T

    def eigenvalues(self):
        return np.linalg.eigvalsh(self.C)


class SepCMA(_Strategy):
    """Diagonal covariance; learning rates scaled by (n + 2) / 3."""

    def __init__(self, mean, sigma, lam):
        super().__init__(mean, sigma, lam)
        scale = (self.n + 2) / 3
        self.c1 = min(1.0, self.c1 * scale)
        self.cmu = min(1 - self.c1, self.cmu * scale)
        self.diag = np.ones(self.n)

    def ask(self, k, rng):
        Z = rng.standard_normal((k, self.n))
        return self.mean + self.sigma * Z * np.sqrt(self.diag)

    def tell(self, X, f):
        order = np.argsort(f, kind="stable")[: self.mu]
        old = self.mean
        artmp = (X[order] - old) / self.sigma
        y_w = self.weights @ artmp
        self.mean = old + self.sigma * y_w
        self.ps = (1 - self.cs) * self.ps + math.sqrt(self.cs * (2 - self.cs) * self.mueff) * y_w / np.sqrt(self.diag)
        hsig = self._hsig()
        self.pc = (1 - self.cc) * self.pc + hsig * math.sqrt(self.cc * (2 - self.cc) * self.mueff) * y_w
        self.diag = (
            (1 - self.c1 - self.cmu) * self.diag
            + self.c1 * (self.pc**2 + (1 - hsig) * self.cc * (2 - self.cc) * self.diag)
            + self.cmu * (self.weights @ artmp**2)
        )
        np.maximum(self.diag, 1e-300, out=self.diag)
        self._update_sigma()
        self.gen += 1

    def eigenvalues(self):
        return self.diag.copy()


def _drive(strategy, objective, config, rng, on_generation=None):
    lower, upper = config.lower, config.upper
    window = config.stagnation_window
    fes = 0
    best_value = math.inf
    best_point = strategy.mean.copy()
    since = 0
    stopped = "budget"
    while fes < config.budget:
        n_gen = min(strategy.lam, config.budget - fes)
        X = np.clip(strategy.ask(n_gen, rng), lower, upper)
        vals = np.empty(n_gen)
        pos = 0
        stop = None
        # evaluate in chunks so a stagnation stop lands on the exact individual
        while pos < n_gen:
            chunk = n_gen - pos if window is None else min(n_gen - pos, window - since)
            v = evaluate_batch(objective, X[pos:pos + chunk])
            if not np.all(np.isfinite(v)):
                bad = int(np.flatnonzero(~np.isfinite(v))[0])
                raise ObjectiveError(
                    f"objective returned {v[bad]!r} at evaluation {fes + bad + 1} (generation {strategy.gen})"
                )
            vals[pos:pos + chunk] = v
            for j in range(chunk):
                if v[j] < best_value:
                    best_value = float(v[j])
                    best_point = X[pos + j].copy()
                    since = 0
                else:
                    since += 1
            fes += chunk
            pos += chunk
            if config.target is not None and best_value <= config.target:
                stop = "target"
                break
            if window is not None and since >= window:
                stop = "stagnation"
                break
        if stop:
            stopped = stop
            break
        if n_gen == strategy.lam:
            strategy.tell(X, vals)
            if on_generation is not None:
                on_generation(strategy, fes, best_value)
    return OptimizerRun(
        best_point=best_point,
        best_value=best_value,
        final_mean=strategy.mean.copy(),
        fes_used=fes,
        stopped_by=stopped,
        generations=strategy.gen,
        final_sigma=strategy.sigma,
    )


def cmaes_optimize(objective, config: OptimizerConfig, seed=None, on_generation=None) -> OptimizerRun:
    """Minimize with full-covariance CMA-ES.

    Stops when the budget is spent, after ``stagnation_window`` consecutive
    evaluations that do not improve the best value, or once ``target`` is
    reached.  Candidates are clipped to the box before evaluation.
    ``on_generation(strategy, fes, best)`` is called after every update.
    """
    rng = np.random.default_rng(seed)
    strategy = FullCMA(config.mean0, config.sigma0, config.lam)
    return _drive(strategy, objective, config, rng, on_generation)


def sep_cmaes_optimize(objective, config: OptimizerConfig, seed=None, on_generation=None) -> OptimizerRun:
    """Same contract as :func:`cmaes_optimize` with a diagonal covariance."""
    rng = np.random.default_rng(seed)
    strategy = SepCMA(config.mean0, config.sigma0, config.lam)
    return _drive(strategy, objective, config, rng, on_generation)


def make_subspace_objective(objective, context, indices):
    """Objective over ``indices`` with every other coordinate held at ``context``.

    The returned callable is vectorized and costs one full evaluation per
    candidate.  ``context`` is copied, so later changes to the caller's
    array do not leak in.
    """
    context = np.array(context, dtype=np.float64)
    indices = np.asarray(indices, dtype=np.int64)
    if indices.size and (indices.min() < 0 or indices.max() >= context.shape[0]):
        raise IndexError(f"subspace indices out of range for dimension {context.shape[0]}")

    def sub_objective(Z):
        Z = np.asarray(Z, dtype=np.float64)
        single = Z.ndim == 1
        Z = np.atleast_2d(Z)
        full = np.repeat(context[None, :], Z.shape[0], axis=0)
        full[:, indices] = Z
        v = evaluate_batch(objective, full)
        return float(v[0]) if single else v

    sub_objective.vectorized = True
    return sub_objective
