"""Auto Overlapping Benchmark (AOB) problem generation and evaluation.

A problem is a weighted sum of one base function applied to rotated,
oscillated and asymmetrised slices of ``x - x_opt``.  Consecutive slices
share a configurable number of variables, so the interaction structure
ranges from fully separable blocks to a chain of overlapping blocks while
the dimension stays fixed.

Random components are drawn from independent streams derived from the
instance seed (``SeedSequence([seed, k])`` with ``k`` = 0 permutation,
1 shift, 2 weights, 3 rotations).  The permutation, shift and weights
depend only on ``D`` and the number of blocks, so instances that differ
only in their overlap list share them.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .decomposition import Decomposition, DesignStructureMatrix

FORMAT_VERSION = 1

BASE_FUNCTIONS = {
    "schwefel": kernels.SCHWEFEL,
    "elliptic": kernels.ELLIPTIC,
    "rastrigin": kernels.RASTRIGIN,
    "ackley": kernels.ACKLEY,
}

DEFAULT_S_SIZE = (50, 50, 25, 25, 100, 100, 25, 25, 50, 25,
                  100, 25, 100, 50, 25, 25, 25, 100, 50, 25)

_GAMMA_LEVELS = (0, 1, 3, 5, 7, 10)

SHIFT_RANGE = 80.0


class InstanceFormatError(ValueError):
    """Raised when an instance file cannot be parsed or validated."""

    def __init__(self, message, section=None):
        super().__init__(message)
        self.section = section


def t_osz(v):
    """Oscillation transform applied elementwise."""
    return kernels.t_osz(np.asarray(v, dtype=np.float64))


def t_asy(v, beta):
    """Asymmetry transform; positions are taken within ``v`` itself."""
    if beta < 0:
        raise ValueError("beta must be non-negative")
    return kernels.t_asy(np.asarray(v, dtype=np.float64), float(beta))


def base_function(name, z):
    return kernels.base_eval(np.asarray(z, dtype=np.float64), BASE_FUNCTIONS[_base_key(name)])


def _base_key(name):
    key = str(name).lower()
    if key not in BASE_FUNCTIONS:
        raise ValueError(f"unknown base function {name!r}; expected one of {sorted(BASE_FUNCTIONS)}")
    return key


def gamma_preset(level, n_blocks=len(DEFAULT_S_SIZE)):
    """Overlap list for the preset levels 1..6 (0, 1, 3, 5, 7, 10 shared variables)."""
    if level not in range(1, 7):
        raise ValueError(f"gamma level must be in 1..6, got {level}")
    return [_GAMMA_LEVELS[level - 1]] * (n_blocks - 1)


def mini_s_size():
    """Block sizes divided by ten, D = 100.

    The 25-blocks become alternately 2 and 3 so the total stays 100.
    """
    sizes = []
    odd = False
    for s in DEFAULT_S_SIZE:
        if s % 10:
            sizes.append(s // 10 + (1 if odd else 0))
            odd = not odd
        else:
            sizes.append(s // 10)
    return sizes


def cap_gamma(gamma, s_size):
    """Clamp each overlap to one less than its smaller adjacent block."""
    return [min(g, min(s_size[i], s_size[i + 1]) - 1) for i, g in enumerate(gamma)]


@dataclass(frozen=True)
class ProblemSpec:
    base: str
    s_size: tuple = DEFAULT_S_SIZE
    gamma: tuple = (0,) * (len(DEFAULT_S_SIZE) - 1)
    lower: float = -100.0
    upper: float = 100.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "base", _base_key(self.base))
        object.__setattr__(self, "s_size", tuple(int(s) for s in self.s_size))
        object.__setattr__(self, "gamma", tuple(int(g) for g in self.gamma))
        self.validate()

    @property
    def dim(self):
        return sum(self.s_size)

    def validate(self):
        s, g = self.s_size, self.gamma
        if not s or any(v <= 0 for v in s):
            raise ValueError("subspace sizes must be positive")
        if len(g) != len(s) - 1:
            raise ValueError(f"expected {len(s) - 1} overlap entries, got {len(g)}")
        for i, gi in enumerate(g):
            if gi < 0:
                raise ValueError(f"overlap {i} is negative")
            if gi >= min(s[i], s[i + 1]):
                raise ValueError(
                    f"overlap {i} = {gi} must be smaller than both adjacent blocks ({s[i]}, {s[i + 1]})"
                )
        if self.base == "elliptic" and min(s) < 2:
            raise ValueError("elliptic needs every subspace of size >= 2")
        if not self.lower < self.upper:
            raise ValueError("lower bound must be below upper bound")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    @classmethod
    def preset(cls, base, level, seed=0, scale="full"):
        if scale == "full":
            s_size = DEFAULT_S_SIZE
            gamma = gamma_preset(level)
        elif scale == "mini":
            s_size = mini_s_size()
            gamma = cap_gamma(gamma_preset(level), s_size)
        else:
            raise ValueError(f"unknown scale {scale!r}")
        return cls(base=base, s_size=tuple(s_size), gamma=tuple(gamma), seed=seed)


def subspace_windows(s_size, gamma):
    """Half-open position windows into the permutation, one per subspace.

    Subspace ``i > 0`` starts ``gamma[i-1]`` positions before its own block,
    so it shares exactly that many variables with subspace ``i-1``.
    """
    ends = np.cumsum(s_size)
    starts = ends - np.asarray(s_size)
    return [(int(starts[i] - (gamma[i - 1] if i else 0)), int(ends[i])) for i in range(len(s_size))]


def haar_rotation(rng, k):
    A = rng.standard_normal((k, k))
    Q, R = np.linalg.qr(A)
    return Q * np.sign(np.diag(R))


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    spec: ProblemSpec
    permutation: np.ndarray
    subspaces: tuple
    shift: np.ndarray
    weights: np.ndarray
    rotations: tuple
    _packed: tuple = field(default=None, repr=False)

    vectorized = True

    def __post_init__(self):
        idx = [np.asarray(s, dtype=np.int64) for s in self.subspaces]
        rots = [np.ascontiguousarray(r, dtype=np.float64) for r in self.rotations]
        object.__setattr__(self, "subspaces", tuple(idx))
        object.__setattr__(self, "rotations", tuple(rots))
        idx_off = np.zeros(len(idx) + 1, dtype=np.int64)
        idx_off[1:] = np.cumsum([len(s) for s in idx])
        rot_off = np.zeros(len(rots) + 1, dtype=np.int64)
        rot_off[1:] = np.cumsum([r.size for r in rots])
        packed = (
            np.ascontiguousarray(np.concatenate(idx)),
            idx_off,
            np.ascontiguousarray(np.concatenate([r.ravel() for r in rots])),
            rot_off,
            np.ascontiguousarray(self.weights, dtype=np.float64),
            BASE_FUNCTIONS[self.spec.base],
        )
        object.__setattr__(self, "_packed", packed)

    @property
    def dim(self):
        return self.spec.dim

    @property
    def lower(self):
        return self.spec.lower

    @property
    def upper(self):
        return self.spec.upper

    @property
    def problem_id(self):
        return problem_id(self.spec.base, _gamma_level(self.spec.gamma))

    def __call__(self, x):
        return evaluate(self, x)

    def __eq__(self, other):
        if not isinstance(other, ProblemInstance):
            return NotImplemented
        return (
            self.spec == other.spec
            and np.array_equal(self.permutation, other.permutation)
            and np.array_equal(self.shift, other.shift)
            and np.array_equal(self.weights, other.weights)
            and len(self.subspaces) == len(other.subspaces)
            and all(np.array_equal(a, b) for a, b in zip(self.subspaces, other.subspaces))
            and all(np.array_equal(a, b) for a, b in zip(self.rotations, other.rotations))
        )

    __hash__ = None


def _gamma_level(gamma):
    vals = set(gamma)
    if len(vals) <= 1:
        g = vals.pop() if vals else 0
        if g in _GAMMA_LEVELS:
            return _GAMMA_LEVELS.index(g) + 1
    return None


def problem_id(base, level):
    """``S3`` style identifier: first letter of the base function and the overlap level."""
    letter = _base_key(base)[0].upper()
    return f"{letter}{level}" if level is not None else f"{letter}?"


def generate_instance(spec: ProblemSpec) -> ProblemInstance:
    spec.validate()
    D = spec.dim
    streams = [np.random.default_rng(np.random.SeedSequence([spec.seed, k])) for k in range(4)]
    permutation = streams[0].permutation(D).astype(np.int64)
    shift = streams[1].uniform(-SHIFT_RANGE, SHIFT_RANGE, size=D)
    weights = 10.0 ** (3.0 * streams[2].standard_normal(len(spec.s_size)))
    subspaces = tuple(permutation[a:b].copy() for a, b in subspace_windows(spec.s_size, spec.gamma))
    rotations = tuple(haar_rotation(streams[3], len(s)) for s in subspaces)
    return ProblemInstance(spec, permutation, subspaces, shift, weights, rotations)


class FECounter:
    """Mutable evaluation counter a caller may pass to :func:`evaluate`."""

    def __init__(self):
        self.count = 0

    def add(self, n=1):
        self.count += n


def evaluate(instance: ProblemInstance, x, counter: FECounter | None = None):
    """Objective value of one point (1-D ``x``) or of each row of a 2-D ``x``."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    X = np.atleast_2d(x)
    if X.ndim != 2 or X.shape[1] != instance.dim:
        raise ValueError(f"expected points of length {instance.dim}, got shape {x.shape}")
    out = kernels.composite_eval(X - instance.shift, *instance._packed)
    if counter is not None:
        counter.add(X.shape[0])
    return float(out[0]) if single else out


def in_bounds(instance: ProblemInstance, x):
    x = np.asarray(x)
    return bool(np.all((x >= instance.lower) & (x <= instance.upper)))


def true_subspaces(instance: ProblemInstance) -> Decomposition:
    return Decomposition([sorted(s.tolist()) for s in instance.subspaces], instance.dim)


def ground_truth_theta(instance: ProblemInstance) -> DesignStructureMatrix:
    return DesignStructureMatrix.from_groups(instance.subspaces, instance.dim)


# -- persistence ---------------------------------------------------------

_SECTIONS = ("format_version", "spec", "permutation", "shift", "weights", "rotations", "subspaces")


def _to_json(instance):
    s = instance.spec
    return {
        "format_version": FORMAT_VERSION,
        "spec": {
            "base": s.base,
            "s_size": list(s.s_size),
            "gamma": list(s.gamma),
            "bounds": [s.lower, s.upper],
            "seed": s.seed,
        },
        "permutation": instance.permutation.tolist(),
        "shift": instance.shift.tolist(),
        "weights": instance.weights.tolist(),
        "rotations": [r.tolist() for r in instance.rotations],
        "subspaces": [sub.tolist() for sub in instance.subspaces],
    }


def save_instance(instance: ProblemInstance, path):
    # one top-level section per line so truncation can be located
    doc = _to_json(instance)
    lines = [f"{json.dumps(k)}: {json.dumps(doc[k])}" for k in _SECTIONS]
    Path(path).write_text("{\n" + ",\n".join(lines) + "\n}\n")


def _locate_damage(text):
    found = {}
    for line in text.splitlines():
        line = line.strip().rstrip(",")
        if not line.startswith('"'):
            continue
        try:
            found.update(json.loads("{" + line + "}"))
        except json.JSONDecodeError:
            pass
    for key in _SECTIONS:
        if key not in found:
            return key
    return None


def load_instance(path) -> ProblemInstance:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        section = _locate_damage(text)
        raise InstanceFormatError(
            f"{path}: malformed instance file, section {section!r} is missing or truncated ({exc.msg})",
            section,
        ) from exc
    if not isinstance(doc, dict):
        raise InstanceFormatError(f"{path}: top level must be an object")
    for key in _SECTIONS:
        if key not in doc:
            raise InstanceFormatError(f"{path}: missing section {key!r}", key)
    if doc["format_version"] != FORMAT_VERSION:
        raise InstanceFormatError(
            f"{path}: format_version {doc['format_version']} is not supported (expected {FORMAT_VERSION})",
            "format_version",
        )
    try:
        s = doc["spec"]
        lower, upper = s["bounds"]
        spec = ProblemSpec(base=s["base"], s_size=tuple(s["s_size"]), gamma=tuple(s["gamma"]),
                           lower=float(lower), upper=float(upper), seed=int(s["seed"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise InstanceFormatError(f"{path}: invalid spec section: {exc}", "spec") from exc
    D = spec.dim
    permutation = np.asarray(doc["permutation"], dtype=np.int64)
    if permutation.shape != (D,) or not np.array_equal(np.sort(permutation), np.arange(D)):
        raise InstanceFormatError(f"{path}: permutation is not a bijection on 0..{D - 1}", "permutation")
    shift = np.asarray(doc["shift"], dtype=np.float64)
    if shift.shape != (D,):
        raise InstanceFormatError(f"{path}: shift must have length {D}", "shift")
    weights = np.asarray(doc["weights"], dtype=np.float64)
    m = len(spec.s_size)
    if weights.shape != (m,):
        raise InstanceFormatError(f"{path}: expected {m} weights", "weights")
    subspaces = [np.asarray(sub, dtype=np.int64) for sub in doc["subspaces"]]
    rotations = [np.asarray(r, dtype=np.float64) for r in doc["rotations"]]
    if len(subspaces) != m:
        raise InstanceFormatError(f"{path}: expected {m} subspaces", "subspaces")
    if len(rotations) != m or any(r.shape != (len(sub), len(sub)) for r, sub in zip(rotations, subspaces)):
        raise InstanceFormatError(f"{path}: rotation shapes do not match subspaces", "rotations")
    return ProblemInstance(spec, permutation, tuple(subspaces), shift, weights, tuple(rotations))
