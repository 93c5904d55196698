"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py --sizes 4096 16384 65536 --repeat 50
"""

import argparse
import sys
import timeit

import numpy as np

from nlscatter import kernels


def cases(n, rng):
    z = rng.normal(size=n) + 1j * rng.normal(size=n)
    theta = rng.normal(size=n)
    r = np.abs(rng.normal(size=n)) * 100
    return {
        "phase_multiply": lambda m: m.phase_multiply(z, theta, 0.01),
        "masked_mass": lambda m: m.masked_mass(z, r, 50.0),
        "weighted_mass": lambda m: m.weighted_mass(z, r),
    }


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[4096, 16384, 65536])
    ap.add_argument("--repeat", type=int, default=50)
    args = ap.parse_args(argv)

    backends = kernels.backends()
    if "cython" not in backends:
        print("compiled extension not built; only the fallback is timed")
    rng = np.random.default_rng(0)
    names = sorted(backends)
    print(f"{'kernel':<16}{'n':>8}" + "".join(f"{b + ' [us]':>16}" for b in names) + f"{'speedup':>10}")
    for n in args.sizes:
        for kname, fn in cases(n, rng).items():
            us = {}
            for b in names:
                t = timeit.repeat(lambda: fn(backends[b]), number=1, repeat=args.repeat)
                us[b] = 1e6 * min(t)
            speed = us["python"] / us["cython"] if "cython" in us else float("nan")
            print(f"{kname:<16}{n:>8}" + "".join(f"{us[b]:>16.1f}" for b in names) + f"{speed:>10.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
