"""Compare the compiled and pure-Python cost kernels on random scenarios.

    python benchmarks/bench_kernels.py --scenarios 20 --grid 64x64

Each backend runs the same grid search plus refinement for every index of
every scenario; the script reports wall time per backend and the largest
cost difference between them.
"""

import argparse
import time

from optmerge import kernels
from optmerge.errors import EmptyWindow
from optmerge.harness import random_scenario
from optmerge.policy import cost_model
from optmerge.safe_sets import search_region


def workload(n_scen):
    jobs = []
    for seed in range(n_scen):
        sc = random_scenario(seed)
        for k in sc.indices:
            try:
                jobs.append((cost_model(k, sc), search_region(k, sc)))
            except EmptyWindow:
                pass
    return jobs


def run(impl, jobs, n_t, n_v, tol):
    out = []
    t = time.perf_counter()
    for model, region in jobs:
        c0, _, v, s = kernels.grid_min(model, region, n_t, n_v, impl=impl)
        h_v = max(2.0 * (region.v_hi - region.v_lo) / (n_v - 1), tol)
        c1 = kernels.refine(model, region, v, s, h_v, 2.0 / (n_t - 1), tol, tol, impl=impl)[0]
        out.append(min(c0, c1))
    return time.perf_counter() - t, out


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--scenarios", type=int, default=20)
    p.add_argument("--grid", default="64x64")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args()
    n_t, n_v = (int(x) for x in args.grid.split("x"))

    jobs = workload(args.scenarios)
    impls = kernels.implementations()
    print(f"{len(jobs)} index solves, grid {n_t}x{n_v}, tol {args.tol:g}")
    if "cython" not in impls:
        print("compiled extension not built; timing the Python backend only")
    results = {}
    for name, impl in impls.items():
        best = min(run(impl, jobs, n_t, n_v, args.tol)[0] for _ in range(args.repeat))
        results[name] = (best, run(impl, jobs, n_t, n_v, args.tol)[1])
        print(f"{name:>8}: {best * 1e3:10.2f} ms  ({best / len(jobs) * 1e3:.3f} ms per index)")
    if len(results) == 2:
        py, cy = results["python"], results["cython"]
        diff = max(abs(a - b) / max(abs(a), 1.0) for a, b in zip(py[1], cy[1]))
        print(f" speedup: {py[0] / cy[0]:.1f}x   max relative cost difference: {diff:.2e}")


if __name__ == "__main__":
    main()
