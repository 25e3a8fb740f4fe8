"""Timing comparison of the compiled and pure-Python stepping kernels.

Runs the same workloads against both backend modules in one process and
prints a table of per-call times and speedups. Invoke as

    python3 benchmarks/bench_backends.py [--repeat N]

The workloads cover the three hot paths: closed-form cubic solves over a
parameter grid, adaptive integration of the scalar potential equation,
and adaptive integration of the two-potential system.
"""

import argparse
import math
import time

import numpy as np

from midiode._kernels import _pykernels

try:
    from midiode._kernels import _core
except ImportError:
    _core = None


def _cubic_grid(mod, ks, bs) -> int:
    _, cases = mod.cubic_closed_grid(ks, bs)
    return len(cases)


def _d2_run(mod, startup) -> int:
    d0, dp0 = startup
    xs, _, _, n_steps, _ = mod.integrate_d2(
        1.0, 3.0, 1e-6, d0, dp0, 1.2, 1e-10, 1e-10, False, None, 1_000_000)
    return n_steps + len(xs)


def _uv_run(mod, y0) -> int:
    xs, _, _, n_steps, _, _ = mod.integrate_uv(
        0.5, 1e-6, y0, 1.0, 1e-10, 1e-10, 0.0, 1e-8, None, 1_000_000)
    return n_steps + len(xs)


def _time(fn, mod, repeat: int, *args) -> float:
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(mod, *args)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5,
                        help="timing repetitions, best of (default 5)")
    parser.add_argument("--grid-n", type=int, default=20_000,
                        help="cubic solves per timing pass (default 20000)")
    args = parser.parse_args()

    rng = np.random.default_rng(7)
    ks = rng.uniform(-5.0, 5.0, args.grid_n)
    bs = rng.uniform(0.0, 5.0, args.grid_n)

    # identical starting states for both backends
    from midiode.bvp import series_startup_uv
    from midiode.potential import _startup_state
    d_startup = _startup_state(1.0, 3.0, 1e-6)
    uv_startup = series_startup_uv(0.5, 0.3, 1e-6)

    workloads = [
        (f"cubic closed form, {args.grid_n} solves", _cubic_grid, (ks, bs)),
        ("potential integration to 1.2, periodic", _d2_run, (d_startup,)),
        ("two-potential integration to 1.0", _uv_run, (uv_startup,)),
    ]

    print(f"{'workload':<42} {'python':>10} {'compiled':>10} {'speedup':>8}")
    for label, fn, extra in workloads:
        t_py = _time(fn, _pykernels, args.repeat, *extra)
        if _core is None:
            print(f"{label:<42} {t_py * 1e3:>8.2f}ms {'absent':>10}")
            continue
        t_c = _time(fn, _core, args.repeat, *extra)
        print(f"{label:<42} {t_py * 1e3:>8.2f}ms {t_c * 1e3:>8.2f}ms "
              f"{t_py / t_c:>7.1f}x")
    if _core is None:
        print("compiled backend not built; only the fallback was timed")


if __name__ == "__main__":
    main()
