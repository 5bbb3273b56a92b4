"""Benchmark the compiled kernels against the pure-numpy fallback.

Runs three representative workloads (truth rotation propagation, the
two-channel observer, the rotated error system) in the current process, then
re-invokes itself with ATTOBS_NO_NUMBA=1 and prints a side-by-side comparison.

Usage: python benchmarks/bench_kernels.py [--seconds 60] [--dt 1e-3]
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

from attobs import _kernels


def make_inputs(duration, dt, seed=0):
    rng = np.random.default_rng(seed)
    n = int(round(duration / dt))
    return {
        "R0": np.eye(3),
        "omega_mid": rng.normal(scale=0.3, size=(n, 3)),
        "y0": rng.normal(size=9),
        "v_m": rng.normal(size=(n + 1, 2, 3)),
        "omega_m": rng.normal(scale=0.3, size=(n + 1, 3)),
        "K": np.stack([10.0 * np.eye(3)] * 2),
        "L": np.stack([0.15 * np.eye(3)] * 2),
        "E0": rng.normal(size=9),
        "alpha_i": np.array([0.0, 0.0, 1.0]),
        "beta_i": np.array([np.sqrt(0.5), 0.0, np.sqrt(0.5)]),
        "omega_half": rng.normal(scale=0.3, size=(2 * n + 1, 3)),
        "bias_half": rng.normal(scale=0.02, size=(2 * n + 1, 3)),
    }


def run_workloads(duration, dt):
    d = make_inputs(duration, dt)
    no_reinit = (np.empty(0, dtype=np.int64), np.empty((0, 9)))
    workloads = {
        "rotation_history": lambda: _kernels.rotation_history(
            d["R0"], d["omega_mid"], dt),
        "observer_history": lambda: _kernels.observer_history(
            d["y0"], d["v_m"], d["omega_m"], d["K"], d["L"], False, dt, *no_reinit),
        "error_history": lambda: _kernels.error_history(
            d["E0"], d["alpha_i"], d["beta_i"], d["omega_half"], d["bias_half"],
            10.0, 10.0, 0.15, 0.15, False, dt),
    }
    timings = {}
    for name, fn in workloads.items():
        fn()  # warm up (JIT compilation on the compiled path)
        t0 = time.perf_counter()
        fn()
        timings[name] = time.perf_counter() - t0
    return timings


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seconds", type=float, default=60.0,
                        help="simulated duration per workload")
    parser.add_argument("--dt", type=float, default=1e-3)
    parser.add_argument("--json", action="store_true",
                        help="emit timings as JSON and exit (internal)")
    args = parser.parse_args()

    timings = run_workloads(args.seconds, args.dt)
    if args.json:
        print(json.dumps({"numba": _kernels.NUMBA_ENABLED, "timings": timings}))
        return

    label = "numba" if _kernels.NUMBA_ENABLED else "numpy fallback"
    other_env = dict(os.environ)
    if _kernels.NUMBA_ENABLED:
        other_env["ATTOBS_NO_NUMBA"] = "1"
    else:
        other_env.pop("ATTOBS_NO_NUMBA", None)
    proc = subprocess.run(
        [sys.executable, os.path.abspath(__file__),
         "--seconds", str(args.seconds), "--dt", str(args.dt), "--json"],
        env=other_env, capture_output=True, text=True, check=True,
    )
    other = json.loads(proc.stdout)
    other_label = "numba" if other["numba"] else "numpy fallback"

    n = int(round(args.seconds / args.dt))
    print(f"{n} integration steps per workload (duration {args.seconds:g} s, "
          f"dt {args.dt:g} s)\n")
    print(f"{'workload':<20} {label:>14} {other_label:>16} {'speedup':>9}")
    for name, t in timings.items():
        t2 = other["timings"][name]
        ratio = t2 / t if t > 0 else float("inf")
        print(f"{name:<20} {t:>12.4f}s {t2:>14.4f}s {ratio:>8.1f}x")


if __name__ == "__main__":
    main()
