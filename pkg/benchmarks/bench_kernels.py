"""Compare the compiled and the numpy kernels.

Times the merged-grid part sums for one sample pair and for a batch of
bootstrap resamples, on both backends, and checks that they agree.

    python3 benchmarks/bench_kernels.py --sizes 1000 10000 --batch 200
"""
import argparse
import timeit

import numpy as np

from almostdom import _pykernels
from almostdom.empirical import sample_grid

try:
    from almostdom import _ckernels
except ImportError:
    _ckernels = None


def bench(fn, repeat):
    times = timeit.repeat(fn, number=1, repeat=repeat)
    return min(times)


def run(sizes, batch, repeat, seed):
    rng = np.random.default_rng(seed)
    backends = [("python", _pykernels)]
    if _ckernels is not None:
        backends.append(("cython", _ckernels))
    print(f"{'n':>7} {'m':>7} {'kernel':<16}" + "".join(f"{b:>12}" for b, _ in backends)
          + ("     speedup" if len(backends) == 2 else ""))
    for n in sizes:
        m = int(n * 1.3) + 1
        x, y = np.sort(rng.normal(size=n)), np.sort(rng.normal(0.4, 1.5, size=m))
        na = np.arange(1, n + 1) * m
        nb = np.arange(1, m + 1) * n
        ia, ib, w = sample_grid(n, m)
        X = np.sort(rng.normal(size=(batch, n)), axis=1)
        Y = np.sort(rng.normal(0.4, 1.5, size=(batch, m)), axis=1)
        rows = {
            "merge_int": lambda k: k.merge_int(na, nb, n * m),
            "part_sums": lambda k: k.part_sums(x, y, ia, ib, w),
            f"batch x{batch}": lambda k: k.batch_part_sums(X, Y, ia, ib, w),
        }
        ref = _pykernels.batch_part_sums(X, Y, ia, ib, w)
        for _, k in backends[1:]:
            got = k.batch_part_sums(X, Y, ia, ib, w)
            assert all(np.allclose(a, b, rtol=1e-12) for a, b in zip(got, ref))
        for name, call in rows.items():
            t = [bench(lambda k=k: call(k), repeat) for _, k in backends]
            line = f"{n:>7} {m:>7} {name:<16}" + "".join(f"{v * 1e3:>10.3f}ms" for v in t)
            if len(t) == 2:
                line += f"{t[0] / t[1]:>11.1f}x"
            print(line)
    if _ckernels is None:
        print("compiled kernels not built; only the python backend was timed")


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", type=int, nargs="+", default=[100, 1000, 10000])
    p.add_argument("--batch", type=int, default=100)
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)
    run(args.sizes, args.batch, args.repeat, args.seed)


if __name__ == "__main__":
    main()
