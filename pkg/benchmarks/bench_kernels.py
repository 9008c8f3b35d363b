"""Time the Grassmann product kernels: numba against the numpy fallback.

Usage::

    python3 benchmarks/bench_kernels.py [--repeats 20] [--end-to-end]

The kernel timings call both implementations in one process.  With
``--end-to-end`` the monodromy of a random genus-2 surface is also timed in
two subprocesses, one of them with ``SUPERTEICH_DISABLE_JIT=1``.
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from superteich import _kernels as k

EPS = 1e-15

E2E_SNIPPET = """
import time, numpy as np
from superteich import builders, holonomy, _kernels
ds = builders.random_surface(2, 2, rng=np.random.default_rng(0), flips=6)
holonomy.all_monodromies(ds.triangulation, ds.coords, ds.orientation)
start = time.perf_counter()
for _ in range(5):
    holonomy.all_monodromies(ds.triangulation, ds.coords, ds.orientation)
print(_kernels.BACKEND, (time.perf_counter() - start) / 5)
"""


def random_operand(rng, n, terms):
    masks = np.unique(rng.integers(0, 1 << min(n, 62), size=terms, dtype=np.uint64))
    return masks, rng.uniform(-1, 1, size=masks.size)


def best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=20)
    ap.add_argument("--end-to-end", action="store_true")
    args = ap.parse_args()
    rng = np.random.default_rng(0)

    if not k.HAS_NUMBA:
        print("numba is not importable; only the numpy path is available")
    print(f"{'terms':>6} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}")
    for terms in (8, 32, 128, 512):
        m1, c1 = random_operand(rng, 24, terms)
        m2, c2 = random_operand(rng, 24, terms)
        t_np = best_of(lambda: k.mul_terms_numpy(m1, c1, m2, c2, EPS), args.repeats)
        if k.HAS_NUMBA:
            k.mul_terms_numba(m1, c1, m2, c2, EPS)  # compile outside the timing
            t_nb = best_of(lambda: k.mul_terms_numba(m1, c1, m2, c2, EPS), args.repeats)
            print(f"{terms:>6} {t_np * 1e3:>10.3f} {t_nb * 1e3:>10.3f} {t_np / t_nb:>7.1f}x")
        else:
            print(f"{terms:>6} {t_np * 1e3:>10.3f} {'n/a':>10} {'n/a':>8}")

    if args.end_to_end:
        print("\nmonodromy of a random (2, 2) surface, mean of 5 runs")
        for disable in ("0", "1"):
            env = dict(os.environ, SUPERTEICH_DISABLE_JIT=disable)
            res = subprocess.run([sys.executable, "-c", E2E_SNIPPET], env=env, capture_output=True, text=True, check=True)
            backend, secs = res.stdout.split()
            print(f"  {backend:>6}: {float(secs) * 1e3:.1f} ms")


if __name__ == "__main__":
    main()
