"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]

Both backends are imported directly, so no environment variable is needed.
Each line reports the best-of-N wall time per call and the ratio.
"""

import argparse
import timeit

from migdse import _kernels_py, benchmarks
from migdse.metrics import LUT_CUTS, LUT_SIZE

try:
    from migdse import _ckernels
except ImportError:
    _ckernels = None


def _time(fn, args, repeat):
    number = 3
    return min(timeit.repeat(lambda: fn(*args), number=number, repeat=repeat)) / number


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ns = ap.parse_args()
    if _ckernels is None:
        raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation`")
    print(f"{'circuit':<10} {'kernel':<10} {'python ms':>10} {'cython ms':>10} {'ratio':>7}")
    for name in benchmarks.names():
        m = benchmarks.load(name)
        base = (m.flat_fanins(), m.num_pis, m.pos)
        cases = {"reachable": base, "lut_map": base + (LUT_SIZE, LUT_CUTS)}
        for kernel, args in cases.items():
            py = _time(getattr(_kernels_py, kernel), args, ns.repeat)
            cy = _time(getattr(_ckernels, kernel), args, ns.repeat)
            assert getattr(_kernels_py, kernel)(*args) == getattr(_ckernels, kernel)(*args)
            print(f"{name:<10} {kernel:<10} {1e3 * py:10.3f} {1e3 * cy:10.3f} {py / cy:7.1f}")


if __name__ == "__main__":
    main()
