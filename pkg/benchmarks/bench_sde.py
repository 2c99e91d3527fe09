"""Wall-clock comparison of the numba and pure-numpy simulation backends.

    python benchmarks/bench_sde.py [--paths 20000] [--repeat 3]

The numba timing excludes the first (compiling) call. Both backends draw the
same counter-based noise, so the final positions are compared as well.
"""

import argparse
import time

import numpy as np

from ncdk import _accel
from ncdk.sde import SdeConfig, simulate
from ncdk.transition import ProcessSpec

CASES = [
    ("dyson N=3", ProcessSpec.bm(), [-0.5, 0.0, 0.5]),
    ("besq nu=0.5 N=2", ProcessSpec.besq(0.5), [0.5, 1.5]),
    ("circle N=3", ProcessSpec.circle(1.0, 3), [0.0, 2.0943951023931953, 4.1887902047863905]),
]


def best_of(repeat, fn):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--paths", type=int, default=20000)
    ap.add_argument("--dt", type=float, default=1e-3)
    ap.add_argument("--t-end", type=float, default=0.5, dest="t_end")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not _accel.USE_NUMBA:
        raise SystemExit("numba is disabled (NCDK_DISABLE_NUMBA set or numba missing)")
    sde = SdeConfig(args.dt, args.t_end, args.paths, seed=1)
    print(f"{'case':<18}{'numba s':>10}{'numpy s':>10}{'speedup':>9}{'max |diff|':>12}")
    for name, spec, start in CASES:
        simulate(spec, start, SdeConfig(args.dt, 10 * args.dt, 4, seed=1), backend="numba")  # compile
        tn, a = best_of(args.repeat, lambda: simulate(spec, start, sde, backend="numba"))
        tp, b = best_of(args.repeat, lambda: simulate(spec, start, sde, backend="numpy"))
        ok = a.ok & b.ok
        diff = float(np.max(np.abs(a.values[ok] - b.values[ok]))) if ok.any() else float("nan")
        print(f"{name:<18}{tn:>10.3f}{tp:>10.3f}{tp / tn:>9.1f}{diff:>12.1e}")


if __name__ == "__main__":
    main()
