"""Benchmark the compiled kernel core against the pure-numpy fallback.

Runs the same deterministic economy on both backends (results are
bit-identical; this script re-checks that while timing), reports end-to-end
wall time, the agent-evaluation (kernel) phase in isolation, and kernel-phase
scaling over worker counts with the compiled core.

    python benchmarks/bench_backends.py [--households 100000] [--quarters 40]
"""

from __future__ import annotations

import argparse
import json
import os
import time

import numpy as np

from decarbsim.config import parse_run_config
from decarbsim.fixtures import fixture_path
from decarbsim.kernels import HAVE_COMPILED, get_kernel_time, reset_kernel_time
from decarbsim.runner import build_sim


def timed_run(cfg, backend_name, workers=1):
    reset_kernel_time()
    sim = build_sim(cfg, workers=workers, backend_name=backend_name)
    t0 = time.perf_counter()
    sim.run(cfg.horizon_quarters)
    wall = time.perf_counter() - t0
    return sim, wall, get_kernel_time()


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--households", type=int, default=100_000)
    parser.add_argument("--quarters", type=int, default=40)
    parser.add_argument("--workers", type=int, nargs="*", default=[1, 2, 4, 8])
    args = parser.parse_args()

    with open(fixture_path("desk_config.json")) as f:
        doc = json.load(f)
    doc["population"]["n_households"] = args.households
    doc["horizon_quarters"] = args.quarters
    cfg = parse_run_config(doc, os.path.dirname(fixture_path("desk_config.json")))

    print(f"economy: {args.households} households, "
          f"{doc['population']['n_firms']} firms, {args.quarters} quarters")
    print(f"cpus: {os.cpu_count()}, compiled core: {HAVE_COMPILED}")
    print()

    sim_py, wall_py, kern_py = timed_run(cfg, "python")
    print(f"python fallback : {wall_py:7.2f}s total, {kern_py:6.2f}s agent kernels")
    if not HAVE_COMPILED:
        print("compiled core not built; nothing to compare")
        return

    sim_c, wall_c, kern_c = timed_run(cfg, "compiled")
    print(f"compiled core   : {wall_c:7.2f}s total, {kern_c:6.2f}s agent kernels"
          f"   ({wall_py / wall_c:.2f}x end-to-end, {kern_py / kern_c:.2f}x kernels)")

    same = (np.array_equal(sim_py.hh_dep, sim_c.hh_dep)
            and np.array_equal(sim_c.fm_dep, sim_py.fm_dep)
            and [f.gdp for f in sim_py.frames] == [f.gdp for f in sim_c.frames])
    print(f"backends bit-identical: {same}")
    if not same:
        raise SystemExit("backend results diverged")

    print("\nkernel-phase scaling (compiled core):")
    base = None
    for w in args.workers:
        _, wall, kern = timed_run(cfg, "compiled", workers=w)
        base = kern if base is None else base
        print(f"  workers={w:<2d}: {kern:6.2f}s kernels ({base / kern:5.2f}x), "
              f"{wall:6.2f}s total")


if __name__ == "__main__":
    main()
