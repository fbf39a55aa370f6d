#!/usr/bin/env python3
"""Timing comparison of the compiled sweep kernels against the pure fallback.

Usage: python benchmarks/bench_kernels.py [--segments 500] [--repeats 3]
"""

import argparse
import time

import numpy as np

from chaosgrad import RunConfig, compute_response, kernels
from chaosgrad.systems import get_system


def _best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--segments", type=int, default=500)
    parser.add_argument("--orbit-steps", type=int, default=200_000)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    if not kernels.compiled_available():
        print("compiled kernels unavailable; nothing to compare")
        return

    system = get_system("solenoid21")
    rng = np.random.default_rng(0)
    x0 = system.initial_state(rng)
    gamma = np.array([0.1, 0.1])
    cfg = RunConfig(system="solenoid21", gamma=gamma, segments=args.segments, seed=0)

    rows = []

    def orbit_fast():
        system.orbit_states(x0, gamma, args.orbit_steps)

    def orbit_pure():
        with kernels.use_pure():
            system.orbit_states(x0, gamma, args.orbit_steps)

    rows.append(("orbit %dk steps" % (args.orbit_steps // 1000),
                 _best_of(orbit_fast, args.repeats), _best_of(orbit_pure, args.repeats)))

    def response_fast():
        compute_response(cfg)

    def response_pure():
        with kernels.use_pure():
            compute_response(cfg)

    rows.append(("full response A=%d" % args.segments,
                 _best_of(response_fast, args.repeats), _best_of(response_pure, args.repeats)))

    with kernels.use_pure():
        check_pure = compute_response(cfg).derivative
    check_fast = compute_response(cfg).derivative
    drift = np.abs(check_fast - check_pure).max()

    print(f"{'case':<28}{'compiled':>12}{'pure':>12}{'speedup':>10}")
    for name, fast, pure in rows:
        print(f"{name:<28}{fast * 1e3:>10.1f}ms{pure * 1e3:>10.1f}ms{pure / fast:>9.1f}x")
    # same seed, but last-ulp roundoff decorrelates chaotic orbits, so the two
    # backends give statistically independent estimates of the same derivative
    print(f"derivative sampling difference between backends: {drift:.2e} "
          f"(order of one orbit's statistical error)")


if __name__ == "__main__":
    main()
