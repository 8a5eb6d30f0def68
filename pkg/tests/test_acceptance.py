"""Acceptance suite: the ten release criteria at their stated tolerances.

Each criterion prints one PASS/FAIL line (shown in the pytest terminal
summary). Run directly with ``python tests/test_acceptance.py`` for the lines
alone.
"""

import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from optmerge import policy
from optmerge.disruption import base_time_disruption
from optmerge.errors import AssumptionViolated, EmptyWindow, Infeasible
from optmerge.harness import brute_force, random_scenario
from optmerge.safe_sets import check_safe_gap, safe_window
from optmerge.trajectory import (
    energy_closed_form, energy_quadrature, evaluate, monotone_horizon_bound, solve_coefficients,
)
from optmerge.types import make_scenario

ROOT = Path(__file__).resolve().parent.parent
RESULTS = {}
ORACLE_N = 512
REL = 1e-4


def report(num, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {num:>2}. {title}: {detail}"
    RESULTS[num] = line
    print(line)
    return ok


def close(a, b, rel=REL):
    return abs(a - b) <= rel * max(abs(b), 1e-12)


def _bvp_instances(n=1000, seed=20240101):
    rng = np.random.default_rng(seed)
    x0 = rng.uniform(-200, 200, n)
    D = rng.uniform(50, 800, n)
    return zip(x0, rng.uniform(0, 35, n), rng.uniform(0, 1000, n), x0 + D,
               rng.uniform(0, 35, n), rng.uniform(1, 80, n))


def criterion_1():
    worst = 0.0
    t = time.perf_counter()
    for x0, v0, t0, L, vm, T in _bvp_instances():
        c = solve_coefficients(x0, v0, t0, L, vm, t0 + T)
        q = energy_quadrature(c)
        e = energy_closed_form(x0, v0, t0, L, vm, t0 + T)
        worst = max(worst, abs(e - q) / max(1.0, q))
    dt = time.perf_counter() - t
    return report(1, "energy closed form vs quadrature", worst < 1e-9 and dt < 1.0,
                  f"max rel err {worst:.2e} (< 1e-9), {dt:.3f} s (< 1 s), 1000 instances")


def criterion_2():
    worst = 0.0
    v_max = 35.0
    for x0, v0, t0, L, vm, T in _bvp_instances():
        c = solve_coefficients(x0, v0, t0, L, vm, t0 + T)
        _, va, xa = evaluate(c, t0)
        _, vb, xb = evaluate(c, t0 + T)
        sx, sv = max(1.0, abs(L)), max(1.0, v_max)
        worst = max(worst, abs(xa - x0) / sx, abs(va - v0) / sv, abs(xb - L) / sx, abs(vb - vm) / sv)
    return report(2, "trajectory boundary residuals", worst < 1e-9,
                  f"max scaled residual {worst:.2e} (< 1e-9), 1000 instances")


def criterion_3():
    rng = np.random.default_rng(3)
    points = fails = 0
    seed = 0
    while points < 10_000:
        sc = random_scenario(seed)
        seed += 1
        for k in sc.indices:
            try:
                w = safe_window(k, sc.t0, sc)
            except EmptyWindow:
                continue
            for _ in range(25):
                v = rng.uniform(0.0, w.v_upper)
                lo = max(w.t_lower(v), sc.t0)
                hi = w.t_upper if math.isfinite(w.t_upper) else lo + 60.0
                if lo > hi:
                    continue
                t = rng.uniform(lo, hi)
                points += 1
                fails += not check_safe_gap(k, t, v, sc)
    return report(3, "safe-set soundness", fails == 0,
                  f"{fails} failures in {points} sampled window points ({seed} scenarios)")


def criterion_4():
    t = time.perf_counter()
    bad = []
    for seed in range(200):
        sc = random_scenario(seed)
        p = policy.optimal_index(sc)
        o = brute_force(sc, ORACLE_N, ORACLE_N)
        best = p.ranking[0]
        if not (best.k == o.argmin_k or close(best.total, o.cost_of(o.argmin_k))):
            bad.append(seed)
    dt = time.perf_counter() - t
    return report(4, "policy vs 512x512 oracle", not bad and dt < 60.0,
                  f"{200 - len(bad)}/200 agree, {dt:.1f} s (< 60 s)" + (f", seeds {bad}" if bad else ""))


def _theorem1_cases(count=100):
    seed = 0
    while count:
        sc = random_scenario(seed).with_alpha(1.0)
        seed += 1
        try:
            v = policy.platoon_merge_speed(sc)
        except (AssumptionViolated, EmptyWindow):
            continue
        g = policy.group_parameters(sc)
        q = policy.theorem1_index(sc, v, float(base_time_disruption(g.v_d, v, sc.model.u_bar)))
        if q is None:
            continue
        count -= 1
        yield seed - 1, sc, v >= g.v_d, q


def criterion_5():
    n = case_i = 0
    bad = []
    for seed, sc, is_case_i, q in _theorem1_cases():
        o = brute_force(sc, ORACLE_N, ORACLE_N)
        n += 1
        case_i += is_case_i
        if not (q == o.argmin_k or close(o.cost_of(q), o.cost_of(o.argmin_k))):
            bad.append((seed, q, o.argmin_k))
    return report(5, "Theorem 1 vs oracle at alpha=1", not bad and case_i >= 20,
                  f"{n - len(bad)}/{n} agree, case (i) in {case_i} (>= 20)"
                  + (f"; disagreements (seed, shortcut, oracle): {bad}" if bad else ""))


def criterion_6():
    n, seed = 0, 0
    bad = []
    while n < 100:
        sc = random_scenario(seed).with_alpha(0.0)
        seed += 1
        if sc.N < 2:
            continue
        try:
            last = policy.optimize_index(sc.N + 1, sc)
            if policy.theorem2_shortlist(sc, last, last.v_m) is None:
                continue
        except (AssumptionViolated, Infeasible):
            continue
        n += 1
        o = brute_force(sc, ORACLE_N, ORACLE_N)
        pair = min(o.cost_of(1), o.cost_of(sc.N + 1))
        best = o.cost_of(o.argmin_k)
        if pair - best > REL * abs(best):
            bad.append(seed - 1)
    return report(6, "Theorem 2 shortlist vs oracle at alpha=0", not bad,
                  f"{n - len(bad)}/{n} agree ({seed} seeds scanned)" + (f", seeds {bad}" if bad else ""))


def criterion_7():
    rng = np.random.default_rng(7)
    violations = 0
    for _ in range(100):
        x0, v0, vm = rng.uniform(0, 100), rng.uniform(0, 35), rng.uniform(0, 35)
        L = 400.0
        tau = monotone_horizon_bound(x0, v0, L, vm)
        for T in np.linspace(0.0, tau * (1 - 1e-6), 52)[1:-1]:
            h = 1e-6 * T
            d = (energy_closed_form(x0, v0, 0.0, L, vm, T + h)
                 - energy_closed_form(x0, v0, 0.0, L, vm, T - h)) / (2 * h)
            violations += not d < 0
    return report(7, "energy decreasing below the travel-time threshold", violations == 0,
                  f"{violations} sign violations over 100 triples x 50 horizons")


def criterion_8():
    n, seed = 0, 0
    bad = []
    while n < 50:
        sc = random_scenario(seed)
        seed += 1
        try:
            v = policy.platoon_merge_speed(sc)
        except (AssumptionViolated, EmptyWindow):
            continue
        n += 1
        a_l, a_u = policy.alpha_lower_threshold(sc, v), policy.alpha_upper_threshold(sc, v)
        rng = np.random.default_rng(seed - 1)
        highs = 1.0 - (1.0 - a_l) * rng.uniform(0, 1, 10)
        lows = a_u * rng.uniform(0, 1, 10)
        kh = {policy.optimal_index(sc.with_alpha(a)).unfiltered_argmin for a in highs}
        kl = {policy.optimal_index(sc.with_alpha(a)).unfiltered_argmin for a in lows}
        if len(kh) > 1 or len(kl) > 1:
            bad.append(seed - 1)
    return report(8, "weight-threshold consistency", not bad,
                  f"{n - len(bad)}/{n} scenarios stable above alpha_l and below alpha_u"
                  + (f", seeds {bad}" if bad else ""))


def criterion_9():
    # The AV is ahead of the platoon; slotting in first at alpha = 1 needs ~7.4 m/s^2.
    sc = make_scenario(t0=0.0, x0=100.0, v0=20.0, hdv_positions=[0.0, -90.0, -180.0],
                       hdv_speeds=25.0, L=400.0, alpha=1.0, beta=0.05)
    p = policy.optimal_index(sc)
    skipped = {k for k, _ in p.skipped_indices}
    rest = [k for k in sc.indices if k not in skipped]
    o = brute_force(sc, ORACLE_N, ORACLE_N, feasible_only=True, indices=rest)
    o_best = o.cost_of(o.argmin_k)
    unfiltered = p.unfiltered_argmin
    ok = (p.fallback_applied and p.feasible.ok and unfiltered in skipped
          and (p.k == o.argmin_k or close(p.total, o_best)) and p.total <= o_best * (1 + REL))
    return report(9, "actuator fallback", ok,
                  f"k*={unfiltered} skipped, chose k={p.k} J={p.total:.9g}; "
                  f"feasible oracle over {rest}: k={o.argmin_k} J={o_best:.9g}")


def criterion_10(tmp=None):
    import tempfile
    tmp = Path(tmp or tempfile.mkdtemp())
    scenarios = sorted((ROOT / "scenarios").glob("*.yaml"))
    diffs = []
    for path in scenarios:
        runs = []
        for i in range(2):
            out = tmp / f"{path.stem}_{i}"
            solve = subprocess.run([sys.executable, "-m", "optmerge.cli", "solve", str(path), "--out", str(out)],
                                   capture_output=True, check=True).stdout
            sweep = subprocess.run([sys.executable, "-m", "optmerge.cli", "sweep-alpha", str(path)],
                                   capture_output=True, check=True).stdout
            runs.append((solve, sweep, (out / "plan.yaml").read_bytes(), (out / "trajectory.csv").read_bytes()))
        if runs[0] != runs[1]:
            diffs.append(path.stem)
    return report(10, "CLI golden runs", len(scenarios) == 3 and not diffs,
                  f"{len(scenarios)} scenarios, solve + sweep-alpha byte-identical across runs"
                  + (f"; differ: {diffs}" if diffs else ""))


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


# Eq. (34) assumes every slot merges at one shared speed. Merging first has no
# leading HDV, so there the AV can reach platoon speed, disrupt nobody and
# arrive earliest; the full scan then always picks k = 1 at alpha = 1. Seed
# 149 is the one sampled platoon where the spacing test names another slot.
KNOWN_FAILURES = {
    criterion_5: "Eq. (34) picks k=3 at seed 149; merging first at platoon speed dominates (see ledger)",
}


@pytest.mark.parametrize("crit", [
    pytest.param(c, marks=pytest.mark.xfail(strict=True, reason=KNOWN_FAILURES[c]))
    if c in KNOWN_FAILURES else c
    for c in CRITERIA
], ids=lambda f: f.__name__)
def test_acceptance(crit):
    assert crit(), RESULTS.get(int(crit.__name__.split("_")[1]))


if __name__ == "__main__":
    results = [c() for c in CRITERIA]
    print(f"{sum(results)}/{len(results)} criteria pass")
    sys.exit(0 if all(results) else 1)
