"""Compare the compiled and pure-Python objective kernels.

    python3 benchmarks/bench_kernels.py [--repeat 200] [--batch 64]
"""
import argparse
import timeit

import numpy as np

from hcclsgo import _pykernels, aob

try:
    from hcclsgo import _ckernels
except ImportError:
    _ckernels = None


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=200)
    p.add_argument("--batch", type=int, default=25, help="rows per call; 25 is the default population at D=1000")
    p.add_argument("--level", type=int, default=6)
    args = p.parse_args()

    backends = {"python": _pykernels}
    if _ckernels is not None:
        backends["cython"] = _ckernels
    rng = np.random.default_rng(0)
    print(f"{'base':10s} {'backend':8s} {'single (us)':>12s} {'batch/pt (us)':>14s}")
    for base in sorted(aob.BASE_FUNCTIONS):
        inst = aob.generate_instance(aob.ProblemSpec.preset(base, args.level, seed=0))
        x = rng.uniform(-100, 100, (1, inst.dim)) - inst.shift
        X = rng.uniform(-100, 100, (args.batch, inst.dim)) - inst.shift
        timings = {}
        for name, mod in backends.items():
            single = min(timeit.repeat(lambda: mod.composite_eval(x, *inst._packed), number=args.repeat, repeat=3))
            batch = min(timeit.repeat(lambda: mod.composite_eval(X, *inst._packed), number=max(1, args.repeat // 10),
                                      repeat=3))
            timings[name] = (1e6 * single / args.repeat, 1e6 * batch / max(1, args.repeat // 10) / args.batch)
            print(f"{base:10s} {name:8s} {timings[name][0]:12.1f} {timings[name][1]:14.1f}")
        if len(timings) == 2:
            s = timings["python"][0] / timings["cython"][0]
            b = timings["python"][1] / timings["cython"][1]
            print(f"{'':10s} {'speedup':8s} {s:11.1f}x {b:13.1f}x")


if __name__ == "__main__":
    main()
