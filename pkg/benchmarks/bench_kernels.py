"""Compare the compiled and pure-Python kernel backends.

    python3 benchmarks/bench_kernels.py [--n 200000] [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from prestage import _pykernels as py
from prestage import kernels


def cases(mod, n, rng):
    lons = rng.uniform(-125, -66, n)
    lats = rng.uniform(24, 50, n)
    dens = 10 ** rng.uniform(0, 5, n)
    us = py.unit_values(dens, 0.0, 5.0)
    ring_n = min(n, 20000)
    return {
        "haversine_many": lambda: mod.haversine_many(-71.09, 42.36, lons, lats),
        "unit_values": lambda: mod.unit_values(dens, 0.0, 5.0),
        "kml_colors(jet)": lambda: mod.kml_colors(us, py.SCHEME_JET, 0x99, 0.5),
        "format_ring": lambda: mod.format_ring(lons[:ring_n], lats[:ring_n]),
    }


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if kernels.compiled is None:
        raise SystemExit("compiled kernels are not built; run pip install -e . --no-build-isolation")

    rng = np.random.default_rng(0)
    py_cases = cases(py, args.n, rng)
    rng = np.random.default_rng(0)
    c_cases = cases(kernels.compiled, args.n, rng)
    print(f"n={args.n}, best of {args.repeat}")
    print(f"{'kernel':<18} {'python s':>10} {'cython s':>10} {'speedup':>8}")
    for name in py_cases:
        tp = min(timeit.repeat(py_cases[name], number=1, repeat=args.repeat))
        tc = min(timeit.repeat(c_cases[name], number=1, repeat=args.repeat))
        print(f"{name:<18} {tp:>10.4f} {tc:>10.4f} {tp / tc:>7.1f}x")


if __name__ == "__main__":
    main()
