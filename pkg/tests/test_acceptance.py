"""Acceptance gate: one test per criterion, each reported as a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v``; the summary lines are
printed at the end of the session.
"""
import contextlib
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np
import pytest

from hcclsgo import aob
from hcclsgo.decomposition import (
    DesignStructureMatrix,
    accuracy,
    degree_of_overlap,
    is_ideal_decomposition,
    random_decomposition,
    rddsm,
)
from hcclsgo.hcc import HccConfig, apply_blend, blend_overlap, glo_fes, run_cc, run_hcc
from hcclsgo.optimizers import OptimizerConfig, cmaes_optimize, default_popsize
from hcclsgo.stats import wilcoxon_rank_sum

from conftest import BASES

RESULTS = {}


@contextlib.contextmanager
def criterion(number, title):
    t0 = time.perf_counter()
    try:
        yield
    except BaseException:
        RESULTS[number] = (title, False, time.perf_counter() - t0)
        raise
    RESULTS[number] = (title, True, time.perf_counter() - t0)


def test_01_rddsm_is_exact_on_every_instance(full_instances):
    with criterion(1, "rddsm reaches Acc = 1.0 on all 24 full-size instances"):
        t0 = time.perf_counter()
        for key, inst in sorted(full_instances.items()):
            found = rddsm(aob.ground_truth_theta(inst))
            assert accuracy(found, aob.true_subspaces(inst), 1000) == 1.0, key
        assert time.perf_counter() - t0 < 60


def test_02_random_decomposition_accuracy_band(full_instances):
    with criterion(2, "random 20-group decomposition: mean Acc in [0.08, 0.15] on Γ1"):
        truth = aob.true_subspaces(full_instances[("elliptic", 1)])
        accs = [accuracy(random_decomposition(1000, 20, seed=s), truth, 1000) for s in range(25)]
        assert 0.08 <= np.mean(accs) <= 0.15


def test_03_hand_traced_decompositions():
    with criterion(3, "rddsm hand trace, all-ones and block-diagonal inputs"):
        edges = [(0, 3), (0, 4), (3, 4), (2, 4), (4, 5), (2, 5), (1, 5)]
        got = rddsm(DesignStructureMatrix.from_edges(edges, 6))
        assert set(got.groups) == {(0, 3, 4), (2, 4, 5), (1, 5)} and len(got) == 3
        assert rddsm(np.ones((4, 4), dtype=bool)).groups == ((0, 1, 2, 3),)
        blocks = DesignStructureMatrix.from_groups([[0, 1], [2, 3, 4]], 5)
        assert set(rddsm(blocks).groups) == {(0, 1), (2, 3, 4)}


def test_04_decomposition_properties():
    with criterion(4, "rddsm invariants on 600 random DSMs plus path graphs"):
        t0 = time.perf_counter()
        rng = np.random.default_rng(2024)
        cases = []
        for p in (0.2, 0.5, 0.8):
            for _ in range(200):
                n = int(rng.integers(1, 13))
                upper = np.triu(rng.random((n, n)) < p, 1)
                cases.append(upper | upper.T | np.eye(n, dtype=bool))
        cases += [DesignStructureMatrix.from_edges([(i, i + 1) for i in range(n - 1)], n).bits for n in range(2, 13)]
        for bits in cases:
            d = rddsm(bits)
            rep = is_ideal_decomposition(d, bits)
            assert rep.groups_fully_interacting and rep.interactions_covered
            assert set().union(*map(set, d.groups)) == set(range(len(bits)))
            assert len(set(d.groups)) == len(d.groups)
        assert len(cases) >= 500
        assert time.perf_counter() - t0 < 30


def test_05_benchmark_construction(full_instances):
    with criterion(5, "F(x_opt) = 0, orthogonal rotations, exact overlaps and DO values"):
        for (base, level), inst in full_instances.items():
            assert abs(aob.evaluate(inst, inst.shift)) <= 1e-9
            for r in inst.rotations:
                assert np.abs(r @ r.T - np.eye(len(r))).max() <= 1e-9
            g = aob.gamma_preset(level)[0]
            for a, b in zip(inst.subspaces, inst.subspaces[1:]):
                assert len(np.intersect1d(a, b)) == g
        for level, do in ((2, 0.019), (3, 0.057), (6, 0.190)):
            assert degree_of_overlap(aob.true_subspaces(full_instances[("schwefel", level)])) == do


def test_06_budget_arithmetic():
    with criterion(6, "glo_fes values and end-to-end FE accounting"):
        assert glo_fes(0, 3_000_000) == 0
        assert glo_fes(0.057, 3_000_000) == 736_800
        for base, level in (("elliptic", 3), ("schwefel", 6), ("ackley", 1)):
            inst = aob.generate_instance(aob.ProblemSpec.preset(base, level, seed=0, scale="mini"))
            decomp = rddsm(aob.ground_truth_theta(inst))
            calls = []

            def counted(X, inst=inst):
                calls.append(len(np.atleast_2d(X)))
                return aob.evaluate(inst, np.atleast_2d(X))

            counted.vectorized = True
            counted.dim, counted.lower, counted.upper = inst.dim, inst.lower, inst.upper
            res = run_hcc(counted, decomp, HccConfig(tfes=20_000, seed=0))
            lam_max = max(default_popsize(inst.dim), *(default_popsize(len(g)) for g in decomp.groups))
            assert res.sum_fes == sum(calls) <= 20_000
            assert 20_000 - res.sum_fes <= lam_max + len(decomp) + res.blend_evaluations


def test_07_blending():
    with criterion(7, "blend weights and locality"):
        assert np.array_equal(blend_overlap([2.0, 6.0], [4.0, 8.0], 5.0, 5.0), [3.0, 7.0])
        assert blend_overlap([2.0], [4.0], 1.0, 3.0)[0] == 3.5
        rng = np.random.default_rng(0)
        v = rng.normal(size=50)
        pos = np.array([3, 17, 40])
        out = apply_blend(v, pos, rng.normal(size=3), 2.0, 7.0)
        mask = np.ones(50, dtype=bool)
        mask[pos] = False
        assert out[mask].tobytes() == v[mask].tobytes()


def _final_value(job):
    algo, base, level, seed = job
    inst = aob.generate_instance(aob.ProblemSpec.preset(base, level, seed=0, scale="mini"))
    cfg = HccConfig(tfes=100_000, seed=seed)
    if algo == "random":
        return run_cc(inst, random_decomposition(inst.dim, 20, seed=seed), cfg).value
    decomp = rddsm(aob.ground_truth_theta(inst))
    return (run_hcc if algo == "hcc" else run_cc)(inst, decomp, cfg).value


@pytest.mark.slow
def test_08_directional_performance():
    with criterion(8, "mini scale: HCC <= CC on Γ3, RDDSM-CC beats random CC by 10x on Γ1"):
        jobs = [(a, b, 3, s) for b in ("elliptic", "schwefel") for a in ("hcc", "cc") for s in range(5)]
        jobs += [(a, b, 1, s) for b in ("elliptic", "schwefel") for a in ("cc", "random") for s in range(5)]
        with ProcessPoolExecutor(min(8, os.cpu_count() or 1)) as pool:
            values = dict(zip(jobs, pool.map(_final_value, jobs)))

        def median(algo, base, level):
            return float(np.median([values[(algo, base, level, s)] for s in range(5)]))

        for base in ("elliptic", "schwefel"):
            assert median("hcc", base, 3) <= median("cc", base, 3), base
            assert median("cc", base, 1) * 10 <= median("random", base, 1), base


def test_09_optimizer_sanity():
    with criterion(9, "CMA-ES solves the 10-D sphere; stagnation stops after 100 flat individuals"):
        hits = 0
        for seed in range(5):
            cfg = OptimizerConfig(dim=10, mean0=np.full(10, 1.0), budget=20_000, stagnation_window=None)
            hits += cmaes_optimize(lambda x: float(x @ x), cfg, seed=seed).best_value < 1e-8
        assert hits >= 4
        run = cmaes_optimize(lambda x: 3.0, OptimizerConfig(dim=10, budget=10_000), seed=0)
        assert run.stopped_by == "stagnation"
        assert run.fes_used - 1 == 100


def test_10_rank_sum():
    with criterion(10, "rank-sum exact p = 0.1 and ≈ on identical samples"):
        assert math.isclose(wilcoxon_rank_sum([1, 2, 3], [4, 5, 6]).p_value, 0.1, abs_tol=1e-15)
        assert wilcoxon_rank_sum([5, 5, 5], [5, 5, 5]).verdict == "≈"
