"""Compare the compiled and pure-Python kernels on the workloads that use them.

    python benchmarks/bench_backends.py [--repeat N]

Prints one line per (workload, backend) with the best wall time over
``--repeat`` runs, and checks that both backends produce identical output.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from sdhkb import _backend, _kernels_py
from sdhkb.coverage_sim import WorkloadParams, simulate_uncoverage


def best_of(repeat, fn):
    times = []
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t0)
    return min(times), result


def attach_workload(mod, n_draws):
    rng = np.random.default_rng(0)
    uniforms = rng.random(n_draws)

    def run():
        freqs = np.zeros(n_draws, dtype=np.int64)
        choices, n = mod.attach_draws(uniforms, freqs, 0, 2.5, True)
        return choices.tobytes(), n

    return run


def simulate_workload(mod):
    params = WorkloadParams()
    sizes = list(range(101))

    def run():
        return simulate_uncoverage(params, sizes, seed=0, replicates=50, backend=mod)

    return run


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    backends = {"python": _kernels_py}
    try:
        backends["cython"] = _backend.get_backend("cython")
    except ImportError:
        print("compiled extension not built; timing the Python kernels only")

    workloads = {
        "growing-pool draws (20k)": lambda m: attach_workload(m, 20_000),
        "uncoverage curve (50 reps)": simulate_workload,
    }
    for label, make in workloads.items():
        timings = {}
        outputs = {}
        for name, mod in backends.items():
            timings[name], outputs[name] = best_of(args.repeat, make(mod))
            print(f"{label:28s} {name:7s} {timings[name] * 1e3:9.2f} ms")
        if len(outputs) == 2:
            same = outputs["python"] == outputs["cython"]
            speedup = timings["python"] / timings["cython"]
            print(f"{label:28s} speedup {speedup:8.1f}x  identical={same}")


if __name__ == "__main__":
    main()
