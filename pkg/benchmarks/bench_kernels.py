"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--m 200000] [--n 64] [--rank 200] [--repeat 7]

Prints the best-of-``repeat`` time for each kernel and backend and checks that
both backends agree.
"""
import argparse
import json
import timeit

import numpy as np

from ridge_sketch import _backend
from ridge_sketch._backend import get_kernels


def _best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, default=200_000, help="rows sketched / dimension of R^{-1}")
    ap.add_argument("--n", type=int, default=64, help="columns of the sketched matrix")
    ap.add_argument("--s", type=int, default=2_000, help="count-sketch rows")
    ap.add_argument("--rank", type=int, default=200, help="low-rank truncation")
    ap.add_argument("--repeat", type=int, default=7)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    backends = ["python"]
    if _backend.BACKEND == "compiled":
        backends.append("compiled")
    else:
        print("compiled extension not available; timing the fallback only")

    rng = np.random.default_rng(args.seed)
    A = np.asfortranarray(rng.standard_normal((args.m, args.n)))
    rows = rng.integers(0, args.s, args.m).astype(np.int64)
    signs = rng.choice([-1.0, 1.0], args.m)
    W = np.asfortranarray(np.linalg.qr(rng.standard_normal((args.m, args.rank)))[0])
    S = np.sort(rng.uniform(0, 1, args.rank))[::-1].copy()
    x = rng.standard_normal(args.m)

    results = {}
    outputs = {}
    for name in backends:
        k = get_kernels(name)
        outputs[name] = (k.countsketch_rows(A, rows, signs, args.s), k.lowrank_apply(W, S, 0.5, x))
        results[name] = {
            "countsketch_rows": _best(lambda: k.countsketch_rows(A, rows, signs, args.s), args.repeat),
            "lowrank_apply": _best(lambda: k.lowrank_apply(W, S, 0.5, x), args.repeat),
        }

    if len(outputs) == 2:
        for a, b in zip(outputs["python"], outputs["compiled"]):
            np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-10 * np.abs(a).max())
        results["speedup"] = {
            key: results["python"][key] / results["compiled"][key] for key in results["python"]
        }
    print(json.dumps({"m": args.m, "n": args.n, "s": args.s, "rank": args.rank, "seconds": results}, indent=1))


if __name__ == "__main__":
    main()
