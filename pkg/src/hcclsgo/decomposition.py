"""Design structure matrices, recursive DSM decomposition, and decomposition metrics."""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np


@dataclass(frozen=True, eq=False)
class DesignStructureMatrix:
    """Symmetric boolean interaction matrix with an all-True diagonal."""

    bits: np.ndarray

    def __post_init__(self):
        bits = np.array(self.bits, dtype=bool)
        if bits.ndim != 2 or bits.shape[0] != bits.shape[1]:
            raise ValueError(f"DSM must be square, got shape {bits.shape}")
        if not np.array_equal(bits, bits.T):
            raise ValueError("DSM must be symmetric")
        if not bits.diagonal().all():
            raise ValueError("DSM diagonal must be all ones")
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)

    @property
    def n(self):
        return self.bits.shape[0]

    def __eq__(self, other):
        if not isinstance(other, DesignStructureMatrix):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)

    __hash__ = None

    @classmethod
    def from_groups(cls, groups, n):
        """Every pair inside a common group interacts."""
        bits = np.eye(n, dtype=bool)
        for g in groups:
            g = np.asarray(g, dtype=np.int64)
            bits[np.ix_(g, g)] = True
        return cls(bits)

    @classmethod
    def from_edges(cls, edges, n):
        bits = np.eye(n, dtype=bool)
        for p, q in edges:
            bits[p, q] = bits[q, p] = True
        return cls(bits)


class Decomposition:
    """Ordered list of variable groups covering ``0..n-1``; groups may overlap."""

    def __init__(self, groups, n):
        canon = []
        for g in groups:
            t = tuple(sorted(int(v) for v in g))
            if not t:
                raise ValueError("empty group")
            if len(set(t)) != len(t):
                raise ValueError(f"group {t} repeats an index")
            if t[0] < 0 or t[-1] >= n:
                raise ValueError(f"group {t} has indices outside 0..{n - 1}")
            canon.append(t)
        if len(set(canon)) != len(canon):
            raise ValueError("decomposition contains duplicate groups")
        covered = np.zeros(n, dtype=bool)
        for t in canon:
            covered[list(t)] = True
        if not covered.all():
            missing = np.flatnonzero(~covered)[:10].tolist()
            raise ValueError(f"decomposition does not cover variables {missing}")
        self.groups = tuple(canon)
        self.n = int(n)

    def __len__(self):
        return len(self.groups)

    def __iter__(self):
        return iter(self.groups)

    def __eq__(self, other):
        if not isinstance(other, Decomposition):
            return NotImplemented
        return self.n == other.n and self.groups == other.groups

    def __repr__(self):
        return f"Decomposition(n={self.n}, groups={len(self.groups)})"

    def membership(self):
        """Boolean (groups x n) incidence matrix."""
        M = np.zeros((len(self.groups), self.n), dtype=bool)
        for i, g in enumerate(self.groups):
            M[i, list(g)] = True
        return M


def _check_dsm(theta):
    if not isinstance(theta, DesignStructureMatrix):
        theta = DesignStructureMatrix(np.asarray(theta))
    return theta


def rddsm(theta, prune_subsets=True) -> Decomposition:
    """Recursively split the DSM into groups whose principal submatrix is all ones.

    For each row of the current matrix the neighbourhood submatrix is taken.
    A fully interacting neighbourhood is emitted as a group; otherwise the
    decomposition recurses into it.  A row whose neighbourhood is the whole
    current matrix (and that matrix is not all ones) is skipped, which keeps
    the recursion finite; the edges of that row are still reached through
    the other rows.  Identical submatrices are expanded once.

    With ``prune_subsets`` groups strictly contained in another group are
    dropped after deduplication.
    """
    theta = _check_dsm(theta)
    bits = theta.bits
    emitted = set()
    expanded = set()

    def ddsm(idx):
        key = idx.tobytes()
        if key in expanded:
            return
        expanded.add(key)
        sub = bits[np.ix_(idx, idx)]
        whole = sub.all()
        for r in range(len(idx)):
            row = sub[r]
            members = idx[row]
            if len(members) == len(idx):
                if whole:
                    emitted.add(tuple(members.tolist()))
                continue
            if sub[np.ix_(row, row)].all():
                emitted.add(tuple(members.tolist()))
            else:
                ddsm(members)

    ddsm(np.arange(theta.n, dtype=np.int64))

    groups = sorted(emitted)
    if prune_subsets:
        sets = [frozenset(g) for g in groups]
        groups = [g for g, s in zip(groups, sets) if not any(s < t for t in sets)]
    return Decomposition(groups, theta.n)


def accuracy(found: Decomposition, truth: Decomposition, D: int) -> float:
    """Best-match variable recovery of the true groups.

    Each true group is matched to the found group sharing most variables.
    The matched counts are divided by the total size of the true groups,
    which is ``D`` for a disjoint truth and keeps a perfect match at 1.0
    when true groups overlap.
    """
    if found.n != D or truth.n != D:
        raise ValueError(f"dimension mismatch: found n={found.n}, truth n={truth.n}, D={D}")
    M = found.membership().astype(np.int64)
    total = 0
    for g in truth.groups:
        total += int(M[:, list(g)].sum(axis=1).max())
    return total / sum(len(g) for g in truth.groups)


def degree_of_overlap(decomp: Decomposition, D: int | None = None) -> float:
    """Fraction of variables that belong to two or more groups."""
    D = decomp.n if D is None else D
    counts = decomp.membership().sum(axis=0)
    return int(np.count_nonzero(counts >= 2)) / D


def random_decomposition(D: int, k: int, seed=None) -> Decomposition:
    """Random permutation of ``0..D-1`` cut into ``k`` contiguous chunks.

    When ``k`` does not divide ``D`` the last chunk absorbs the remainder.
    """
    if k < 1 or k > D:
        raise ValueError(f"need 1 <= k <= D, got k={k}, D={D}")
    perm = np.random.default_rng(seed).permutation(D)
    size = D // k
    groups = [perm[i * size:(i + 1) * size] for i in range(k - 1)]
    groups.append(perm[(k - 1) * size:])
    return Decomposition(groups, D)


class IdealityReport(NamedTuple):
    groups_fully_interacting: bool
    interactions_covered: bool


def is_ideal_decomposition(decomp: Decomposition, theta) -> IdealityReport:
    """Check (a) every group is all-ones in ``theta`` and (b) every interaction lies inside a group."""
    theta = _check_dsm(theta)
    bits = theta.bits
    if decomp.n != theta.n:
        raise ValueError("decomposition and DSM sizes differ")
    cliques = all(bits[np.ix_(g, g)].all() for g in map(list, decomp.groups))
    together = np.zeros_like(bits)
    for g in map(list, decomp.groups):
        together[np.ix_(g, g)] = True
    covered = not np.any(bits & ~together)
    return IdealityReport(bool(cliques), bool(covered))


def detect_interaction(f, p, q, x0, delta=1.0, tol=None, f0=None) -> bool:
    """Finite-difference witness that ``x_p`` and ``x_q`` interact at ``x0``.

    Uses four evaluations (three if ``f0 = f(x0)`` is supplied).  The default
    threshold is ``1e-10 * max(1, |f(x0)|)``.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if p == q:
        raise ValueError("p and q must differ")
    x0 = np.asarray(x0, dtype=np.float64)
    xp = x0.copy()
    xp[p] += delta
    xq = x0.copy()
    xq[q] += delta
    xpq = xp.copy()
    xpq[q] += delta
    vals = [f0 if f0 is not None else f(x0), f(xp), f(xq), f(xpq)]
    vals = [float(v) for v in vals]
    if not all(math.isfinite(v) for v in vals):
        raise ValueError(f"non-finite objective value while probing ({p}, {q}): {vals}")
    base, fp, fq, fpq = vals
    if tol is None:
        tol = 1e-10 * max(1.0, abs(base))
    return abs((fpq - fq) - (fp - base)) > tol


# -- text formats ---------------------------------------------------------

def write_dsm(theta: DesignStructureMatrix, path):
    rows = ["".join("1" if b else "0" for b in row) for row in theta.bits]
    Path(path).write_text(f"{theta.n}\n" + "\n".join(rows) + "\n")


def read_dsm(path) -> DesignStructureMatrix:
    lines = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty DSM file")
    n = int(lines[0])
    rows = lines[1:]
    if len(rows) != n or any(len(r) != n or set(r) - {"0", "1"} for r in rows):
        raise ValueError(f"{path}: expected {n} rows of {n} characters from {{0,1}}")
    bits = np.array([[c == "1" for c in r] for r in rows], dtype=bool)
    return DesignStructureMatrix(bits)


def write_groups(decomp: Decomposition, path):
    Path(path).write_text("".join(" ".join(map(str, g)) + "\n" for g in decomp.groups))


def read_groups(path, n=None) -> Decomposition:
    groups = [[int(t) for t in ln.split()] for ln in Path(path).read_text().splitlines() if ln.strip()]
    if n is None:
        n = max(max(g) for g in groups) + 1
    return Decomposition(groups, n)
