"""Compare the compiled and pure-Python kernel backends on one workload.

Usage: python benchmarks/bench_kernels.py [--dim 2] [--n 400] [--lam 6] [--repeat 3]
"""
import argparse
import time

from cechlab import kernels
from cechlab.cech import build_complex
from cechlab.geometry import GeometryContext
from cechlab.homology import betti_numbers
from cechlab.morse import enumerate_critical_points
from cechlab.sampling import RngStream, sample_poisson


def _best(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--dim", type=int, default=2)
    ap.add_argument("--n", type=float, default=400)
    ap.add_argument("--lam", type=float, default=6.0)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    ctx = GeometryContext(args.dim)
    r = ctx.radius_for_lambda(args.lam, args.n)
    cloud = sample_poisson(args.n, ctx, RngStream(args.seed, 0))
    print(f"d={args.dim} n_realized={len(cloud)} Lambda={args.lam} r={r:.5f}")

    stages = {
        "complex": lambda: build_complex(cloud, r, ctx=ctx),
        "critical": lambda: enumerate_critical_points(cloud, r, ctx),
    }
    results = {}
    for name in kernels.backends():
        with kernels.using(name):
            cplx = build_complex(cloud, r, ctx=ctx)
            row = {stage: _best(fn, args.repeat) for stage, fn in stages.items()}
            row["homology"] = _best(lambda: betti_numbers(cplx), args.repeat)
        results[name] = row

    names = list(results)
    print(f"{'stage':<10}" + "".join(f"{n:>12}" for n in names) + ("     speedup" if len(names) > 1 else ""))
    # speedup = python time / compiled time
    for stage in ("complex", "critical", "homology"):
        times = [results[n][stage][0] for n in names]
        line = f"{stage:<10}" + "".join(f"{t:>11.4f}s" for t in times)
        if len(names) > 1:
            line += f"{results['python'][stage][0] / results['cython'][stage][0]:>11.1f}x"
        print(line)
    if len(names) > 1:
        a, b = (results[n]["homology"][1].betti for n in names)
        c1, c2 = (results[n]["critical"][1].counts for n in names)
        print("outputs agree:", a == b and c1 == c2)


if __name__ == "__main__":
    main()
