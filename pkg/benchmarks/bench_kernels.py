#!/usr/bin/env python3
"""Benchmark the numba kernel path against the pure-numpy fallback.

Shapes mirror the production classifier: a 16-sample batch, conv1 (16 ch,
kernel 3) over the 1536-long FC output, conv2 (8 ch, kernel 5) over the
pooled 767-long map, plus the GELU activations. Run:

    python3 benchmarks/bench_kernels.py [--repeats 30]

The numba path is compiled (and disk-cached) on first call; the warm-up
iteration keeps compile time out of the numbers.
"""

import argparse
import time

import numpy as np

from depsum import kernels


def time_call(fn, *args, repeats: int) -> float:
    fn(*args)  # warm-up (JIT compile on the numba path)
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn(*args)
    return (time.perf_counter() - t0) / repeats


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=30)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    x1 = rng.normal(size=(16, 1, 1536))
    w1 = rng.normal(size=(16, 1, 3))
    b1 = rng.normal(size=16)
    dy1 = rng.normal(size=(16, 16, 1534))

    x2 = rng.normal(size=(16, 16, 767))
    w2 = rng.normal(size=(8, 16, 5))
    b2 = rng.normal(size=8)
    dy2 = rng.normal(size=(16, 8, 763))

    act = rng.normal(size=(16, 1536))

    cases = [
        ("conv1 forward", "conv1d_forward", (x1, w1, b1)),
        ("conv1 backward", "conv1d_backward", (x1, w1, dy1)),
        ("conv2 forward", "conv1d_forward", (x2, w2, b2)),
        ("conv2 backward", "conv1d_backward", (x2, w2, dy2)),
        ("maxpool fwd", "maxpool2_forward", (dy1,)),
        ("avgpool fwd", "avgpool2_forward", (dy2,)),
        ("gelu forward", "gelu_forward", (act,)),
        ("gelu grad", "gelu_grad", (act,)),
    ]

    paths = kernels.available_paths()
    if "numba" not in paths:
        print("numba unavailable; only the numpy fallback can be timed")

    print(f"active path: {kernels.ACTIVE_PATH} (set DEPSUM_NO_NUMBA=1 to force numpy)")
    print(f"{'kernel':<16} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}")
    for label, name, call_args in cases:
        t_np = time_call(paths["numpy"][name], *call_args, repeats=args.repeats) * 1e3
        if "numba" in paths:
            t_nb = time_call(paths["numba"][name], *call_args, repeats=args.repeats) * 1e3
            print(f"{label:<16} {t_np:>10.3f} {t_nb:>10.3f} {t_np / t_nb:>7.1f}x")
        else:
            print(f"{label:<16} {t_np:>10.3f} {'-':>10} {'-':>8}")


if __name__ == "__main__":
    main()
