"""Benchmark the compiled kernels against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--quick]
"""

import argparse
import math
import time

import numpy as np

from uavpos._kernels import pure

try:
    from uavpos._kernels import _ckern
except ImportError:
    _ckern = None


def bench_los(backend, n_positions, ues, boxes):
    rng = np.random.default_rng(7)
    positions = rng.uniform(0, 100, size=(n_positions, 3))
    positions[:, 2] = rng.uniform(5, 60, size=n_positions)
    t0 = time.perf_counter()
    total = 0
    for x, y, z in positions:
        total += int(backend.los_mask(x, y, z, ues, boxes, 1e-9).sum())
    return time.perf_counter() - t0, total


def bench_des(backend, duration):
    # Four saturating CBR sources on one medium.
    interval = [11200 / 58.5e6] * 4
    phase = [k * 1e-5 for k in range(4)]
    service = [11200 / (0.7 * 351e6)] * 4
    core = backend.DesCore(interval, phase, service, duration)
    t0 = time.perf_counter()
    core.advance(duration)
    elapsed = time.perf_counter() - t0
    return elapsed, sum(core.delivered_counts())


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true")
    args = parser.parse_args()

    n_positions = 2_000 if args.quick else 20_000
    duration = 20.0 if args.quick else 200.0

    rng = np.random.default_rng(3)
    ues = rng.uniform(0, 100, size=(4, 3))
    ues[:, 2] = 1.5
    boxes = np.array(
        [[40, 60, 40, 60, 15], [5, 20, 30, 45, 10], [80, 95, 30, 45, 12],
         [30, 45, 80, 95, 18], [55, 70, 80, 95, 25]],
        dtype=np.float64,
    )

    rows = []
    t_pure, n1 = bench_los(pure, n_positions, ues, boxes)
    rows.append(("LoS mask", "pure", t_pure, f"{n_positions} positions"))
    if _ckern is not None:
        t_c, n2 = bench_los(_ckern, n_positions, ues, boxes)
        assert n1 == n2, "backends disagree"
        rows.append(("LoS mask", "cython", t_c, f"{t_pure / t_c:.1f}x faster"))

    t_pure, pkts = bench_des(pure, duration)
    rows.append(("DES advance", "pure",
                 t_pure, f"{pkts} pkts, {pkts / t_pure / 1e6:.2f} Mpkt/s"))
    if _ckern is not None:
        t_c, pkts2 = bench_des(_ckern, duration)
        assert pkts == pkts2, "backends disagree"
        rows.append(("DES advance", "cython",
                     t_c, f"{pkts2 / t_c / 1e6:.2f} Mpkt/s, "
                          f"{t_pure / t_c:.1f}x faster"))

    print(f"{'kernel':<14}{'backend':<10}{'seconds':<12}note")
    for name, backend, seconds, note in rows:
        print(f"{name:<14}{backend:<10}{seconds:<12.3f}{note}")
    if _ckern is None:
        print("compiled extension not built; only the fallback was timed")


if __name__ == "__main__":
    main()
