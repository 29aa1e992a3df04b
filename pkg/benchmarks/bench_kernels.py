"""Timing comparison of the numba kernels against the numpy fallback.

Run with the default backend, then again with LAB_NO_NUMBA=1 to collect
the fallback column, or pass --both to fork the comparison in-process.

    python3 benchmarks/bench_kernels.py
    LAB_NO_NUMBA=1 python3 benchmarks/bench_kernels.py
"""

import argparse
import time

import numpy as np


def _time(fn, *args, repeat=5):
    fn(*args)  # warm-up (jit compilation)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def run(n, repeat):
    from martinet_lab import kernels
    rng = np.random.default_rng(0)
    x = np.cumsum(rng.standard_normal(n)) * 0.01
    y = np.cumsum(rng.standard_normal(n)) * 0.01
    b = 5
    rows = [
        ("holonomy_trapz", _time(kernels.holonomy_trapz, x, y, b,
                                 repeat=repeat)),
        ("holonomy_and_grad", _time(kernels.holonomy_and_grad, x, y, b,
                                    repeat=repeat)),
        ("length_and_grad", _time(kernels.length_and_grad, x, y,
                                  repeat=repeat)),
        ("rk4_angle", _time(kernels.rk4_angle, 0.1, -0.1, 0.3, 2.0, b,
                            1e-4, 20000, repeat=repeat)),
        ("winding_numbers", _time(kernels.winding_numbers,
                                  rng.uniform(-1, 1, 4096),
                                  rng.uniform(-1, 1, 4096),
                                  x[:2048], y[:2048], repeat=repeat)),
        ("segment_intersections", _time(kernels.segment_intersections,
                                        x[:2000], y[:2000], False, 1e-12,
                                        repeat=repeat)),
    ]
    print(f"backend={kernels.backend_name()} n={n}")
    for name, dt in rows:
        print(f"  {name:24s} {dt * 1e3:10.3f} ms")
    return {name: dt for name, dt in rows}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=200000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    run(args.n, args.repeat)


if __name__ == "__main__":
    main()
