"""Compiled vs pure-Python kernels: associated Legendre evaluation and greedy packing.

    python benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import math
import timeit

import numpy as np

from planck_lab import kernels
from planck_lab.geometry import SPHERE, TORUS, candidate_centers, to_unit


def cases():
    rng = np.random.default_rng(0)
    for ell, n in ((20, 20_000), (100, 20_000), (400, 5_000)):
        ccos, csin = rng.standard_normal(ell + 1), rng.standard_normal(ell + 1)
        theta, phi = rng.uniform(0, math.pi, n), rng.uniform(0, 2 * math.pi, n)
        yield f"sphere_mode l={ell} n={n}", lambda b, a=(ell, ccos, csin, theta, phi): kernels.sphere_mode(*a, backend=b)
    for m, code, R in ((TORUS, 1, 0.05), (SPHERE, 2, 0.03)):
        cands = candidate_centers(m, 0.5 * R, 0)
        raw = to_unit(cands) if code == 2 else cands
        yield (f"greedy_pack {m} R={R} candidates={len(cands)}",
               lambda b, a=(raw, code, 2 * R): kernels.greedy_pack(*a, backend=b))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    names = [b for b in ("cython", "python") if b in kernels.BACKENDS]
    print(f"default backend: {kernels.BACKEND}")
    print(f"{'case':48s} " + " ".join(f"{n + ' [ms]':>14s}" for n in names) + ("     speedup" if len(names) == 2 else ""))
    for label, fn in cases():
        best = [min(timeit.repeat(lambda: fn(b), number=1, repeat=args.repeat)) * 1e3 for b in names]
        extra = f" {best[1] / best[0]:10.1f}x" if len(best) == 2 else ""
        print(f"{label:48s} " + " ".join(f"{t:14.2f}" for t in best) + extra)


if __name__ == "__main__":
    main()
