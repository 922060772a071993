"""Compare the compiled hot kernels against the pure Python fallback.

Times the two implementations of the lattice reduction loop and the
sphere search on identical inputs and verifies they produce identical
results along the way. Run from the repository root:

    python3 benchmarks/bench_kernels.py [--sizes 2,4,8] [--reps 200]

The compiled extension must be importable for a comparison; otherwise
only the pure path is timed.
"""

import argparse
import time

import numpy as np

from mimodetlab.constellation import build_constellation
from mimodetlab.kernels import HAVE_COMPILED, pure
from mimodetlab.lattice import qr

if HAVE_COMPILED:
    from mimodetlab.kernels import _core

CLLL_DELTA = 0.75


def _bases(rng, n, count):
    out = []
    for _ in range(count):
        H = (rng.standard_normal((n, n))
             + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
        out.append(qr(H))
    return out


def _time_clll(mod, factors, n):
    cap = 50 * n * n
    t0 = time.perf_counter()
    results = []
    for f in factors:
        q = f.q.copy()
        r = f.r.copy()
        t = np.eye(n, dtype=np.complex128)
        iters = mod.clll_kernel(q, r, t, CLLL_DELTA, cap)
        results.append((iters, t))
    return time.perf_counter() - t0, results


def _time_sphere(mod, problems, levels):
    re_l = np.asarray(levels, dtype=float)
    im_l = re_l
    t0 = time.perf_counter()
    results = []
    for r, y in problems:
        results.append(mod.sphere_search(r, y, re_l, im_l))
    return time.perf_counter() - t0, results


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="2,4,8",
                    help="comma list of matrix sizes")
    ap.add_argument("--reps", type=int, default=200,
                    help="problem instances per size")
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    rng = np.random.default_rng(1)
    c = build_constellation(16)
    print(f"compiled extension available: {HAVE_COMPILED}")
    header = f"{'kernel':<14}{'n':>4}{'pure':>12}{'compiled':>12}{'speedup':>10}"
    print(header)
    print("-" * len(header))

    for n in sizes:
        factors = _bases(rng, n, args.reps)
        t_pure, res_pure = _time_clll(pure, factors, n)
        line = f"{'clll':<14}{n:>4}{t_pure * 1e3:>10.1f}ms"
        if HAVE_COMPILED:
            t_fast, res_fast = _time_clll(_core, factors, n)
            for (ia, ta), (ib, tb) in zip(res_pure, res_fast):
                assert ia == ib and np.array_equal(ta, tb), "kernel mismatch"
            line += f"{t_fast * 1e3:>10.1f}ms{t_pure / t_fast:>9.1f}x"
        print(line)

    for n in sizes:
        problems = []
        for f in _bases(rng, n, args.reps):
            s = c.points[rng.integers(0, 16, n)]
            y = f.r @ s + 0.3 * (rng.standard_normal(n)
                                 + 1j * rng.standard_normal(n))
            problems.append((np.ascontiguousarray(f.r), y))
        t_pure, res_pure = _time_sphere(pure, problems, c.levels)
        line = f"{'sphere_search':<14}{n:>4}{t_pure * 1e3:>10.1f}ms"
        if HAVE_COMPILED:
            t_fast, res_fast = _time_sphere(_core, problems, c.levels)
            for (ia, na), (ib, nb) in zip(res_pure, res_fast):
                assert na == nb and np.array_equal(ia, ib), "kernel mismatch"
            line += f"{t_fast * 1e3:>10.1f}ms{t_pure / t_fast:>9.1f}x"
        print(line)


if __name__ == "__main__":
    main()
