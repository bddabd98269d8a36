"""Compare the compiled and pure-Python kernel backends.

Run with ``python benchmarks/bench_kernels.py``.
"""

import argparse
import timeit

import numpy as np

from tzeff import _kernels_py

try:
    from tzeff import _kernels as _kernels_c
except ImportError:
    _kernels_c = None


def _cases(mod, n):
    state = np.array([1, 2, 3, 4], dtype=np.uint64)
    e = np.random.default_rng(0).standard_normal(n)
    buf = np.empty(n)
    return {
        "fill_normal": lambda: mod.fill_normal(state, buf),
        "ar1_filter": lambda: mod.ar1_filter(e, 0.5, 0.0),
        "bartlett_lrv": lambda: mod.bartlett_lrv(e, 7),
    }


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("-n", type=int, default=20_000, help="array length")
    p.add_argument("-r", "--repeat", type=int, default=5)
    args = p.parse_args(argv)

    backends = {"python": _kernels_py}
    if _kernels_c is not None:
        backends["cython"] = _kernels_c
    timings = {}
    for name, mod in backends.items():
        for case, fn in _cases(mod, args.n).items():
            timings[name, case] = min(timeit.repeat(fn, number=1, repeat=args.repeat))

    print(f"n = {args.n}")
    print(f"{'kernel':<14}{'python [ms]':>14}{'cython [ms]':>14}{'speedup':>10}")
    for case in _cases(_kernels_py, 1):
        py = timings["python", case]
        cy = timings.get(("cython", case))
        if cy is None:
            print(f"{case:<14}{py * 1e3:>14.3f}{'n/a':>14}{'n/a':>10}")
        else:
            print(f"{case:<14}{py * 1e3:>14.3f}{cy * 1e3:>14.3f}{py / cy:>9.1f}x")


if __name__ == "__main__":
    main()
