"""Command line entry points: ``aob``, ``decomp`` and ``hcc-bench``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import aob, decomposition, harness


def aob_main(argv=None):
    p = argparse.ArgumentParser(prog="aob", description="Generate and evaluate AOB problem instances.")
    sub = p.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("generate", help="write an instance file")
    g.add_argument("--base", required=True, choices=sorted(aob.BASE_FUNCTIONS))
    g.add_argument("--gamma-level", type=int, required=True, choices=range(1, 7))
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--scale", choices=("full", "mini"), default="full")
    g.add_argument("--out", required=True)

    e = sub.add_parser("eval", help="evaluate the rows of a CSV file of points")
    e.add_argument("--instance", required=True)
    e.add_argument("--point", required=True)

    t = sub.add_parser("theta", help="export the ground-truth DSM and subspaces")
    t.add_argument("--instance", required=True)
    t.add_argument("--out", required=True, help="DSM text file")
    t.add_argument("--groups", help="also write the true subspaces here")

    args = p.parse_args(argv)
    if args.cmd == "generate":
        spec = aob.ProblemSpec.preset(args.base, args.gamma_level, seed=args.seed, scale=args.scale)
        aob.save_instance(aob.generate_instance(spec), args.out)
        return 0
    try:
        inst = aob.load_instance(args.instance)
    except aob.InstanceFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.cmd == "eval":
        pts = np.loadtxt(args.point, delimiter=",", ndmin=2)
        if pts.shape[1] != inst.dim and pts.shape[0] == inst.dim and pts.shape[1] == 1:
            pts = pts.T
        for v in np.atleast_1d(aob.evaluate(inst, pts)):
            print(repr(float(v)))
        return 0
    decomposition.write_dsm(aob.ground_truth_theta(inst), args.out)
    if args.groups:
        decomposition.write_groups(aob.true_subspaces(inst), args.groups)
    return 0


def decomp_main(argv=None):
    p = argparse.ArgumentParser(prog="decomp", description="Decompose DSMs and score decompositions.")
    sub = p.add_subparsers(dest="cmd", required=True)
    r = sub.add_parser("rddsm", help="recursive DSM decomposition")
    r.add_argument("--theta", required=True)
    r.add_argument("--out", required=True)
    r.add_argument("--keep-subsets", action="store_true", help="do not prune groups contained in others")
    a = sub.add_parser("acc", help="decomposition accuracy against a ground truth")
    a.add_argument("--found", required=True)
    a.add_argument("--truth", required=True)
    a.add_argument("--dim", type=int, required=True)
    o = sub.add_parser("do", help="degree of overlap of a decomposition")
    o.add_argument("--groups", required=True)
    o.add_argument("--dim", type=int, required=True)
    args = p.parse_args(argv)
    if args.cmd == "rddsm":
        d = decomposition.rddsm(decomposition.read_dsm(args.theta), prune_subsets=not args.keep_subsets)
        decomposition.write_groups(d, args.out)
    elif args.cmd == "acc":
        found = decomposition.read_groups(args.found, args.dim)
        truth = decomposition.read_groups(args.truth, args.dim)
        print(repr(decomposition.accuracy(found, truth, args.dim)))
    else:
        d = decomposition.read_groups(args.groups, args.dim)
        print(repr(decomposition.degree_of_overlap(d, args.dim)))
    return 0


def bench_main(argv=None):
    p = argparse.ArgumentParser(prog="hcc-bench", description="Run and report AOB experiments.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="cmd", required=True)
    s = sub.add_parser("suite", help="run an experiment described by a JSON config")
    s.add_argument("--config", required=True)
    s.add_argument("--out", help="override the output directory")
    r = sub.add_parser("report", help="rebuild summary tables and curves")
    r.add_argument("--dir", required=True)
    args = p.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.cmd == "suite":
        cfg = harness.ExperimentConfig.from_json(args.config)
        if args.out:
            cfg.output = args.out
        rows = harness.run_experiment(cfg)
    else:
        rows = harness.report(args.dir)
        cfg = None
    out = cfg.output if cfg else args.dir
    print((Path(out) / "summary.txt").read_text(), end="")
    return 1 if any(r.failures for r in rows) else 0


if __name__ == "__main__":
    sys.exit(bench_main())
