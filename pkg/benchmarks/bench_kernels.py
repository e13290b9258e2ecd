"""Time the compiled kernels against their numpy fallbacks.

Usage: python3 benchmarks/bench_kernels.py [--repeat R] [--quick]
"""
import argparse
import timeit

import numpy as np

from eocsiren import _backend, _fallback
from eocsiren.linalg import dft_1d, eigh_symmetric, singular_values


def cases(quick: bool):
    rng = np.random.default_rng(0)
    sizes = [16, 64] if quick else [16, 64, 128, 256]
    for n in sizes:
        a = rng.normal(size=(n, n))
        sym = a + a.T
        yield f"eigh n={n}", lambda kern, m=sym: eigh_symmetric(m, backend=kern)
        yield f"svd n={n}", lambda kern, m=a: singular_values(m, backend=kern)
    for n in ([256, 1024] if quick else [256, 1024, 2048, 4096]):
        x = rng.normal(size=n)
        yield f"dft n={n}", lambda kern, s=x: dft_1d(s, backend=kern)
    for n in ([10**4] if quick else [10**4, 10**6]):
        yield f"splitmix n={n}", lambda kern, k=n: kern.splitmix_block(12345, 0, k)


def best_time(fn, repeat: int) -> float:
    number = 1
    while timeit.timeit(fn, number=number) < 0.05 and number < 1000:
        number *= 2
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="small sizes only")
    args = ap.parse_args(argv)
    if _backend.compiled is None:
        print("compiled extension not built; timing the fallback only")
    print(f"{'case':<18} {'compiled [ms]':>14} {'fallback [ms]':>14} {'speedup':>8}")
    for name, fn in cases(args.quick):
        fb = best_time(lambda: fn(_fallback), args.repeat)
        if _backend.compiled is None:
            print(f"{name:<18} {'-':>14} {fb * 1e3:>14.3f} {'-':>8}")
            continue
        co = best_time(lambda: fn(_backend.compiled), args.repeat)
        print(f"{name:<18} {co * 1e3:>14.3f} {fb * 1e3:>14.3f} {fb / co:>7.1f}x")


if __name__ == "__main__":
    main()
