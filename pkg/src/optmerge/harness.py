"""Verification tools: a dense brute-force oracle, a random platoon generator
and a time-stepped replay that audits every constraint along a plan.

The oracle prices grids with numpy straight from the disruption and
trajectory formulas. It shares no code with the policy's optimizer or the
compiled kernels, so agreement between the two is an independent check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .disruption import (
    base_energy_disruption,
    base_time_disruption,
    discount_sum,
    undisrupted_time_sum,
)
from . import policy
from .errors import AssumptionViolated, EmptyWindow, Infeasible, NoFeasiblePlan, RetriesExhausted
from .safe_sets import SearchRegion, gap_margins, hdv_position_at, search_region
from .trajectory import FEASIBILITY_TOL, energy_closed_form, energy_quadrature, evaluate, extrema
from .types import ConstraintLimits, Scenario, make_scenario, validate_scenario

MARGIN_TOL = 1e-9


def region_grid(region: SearchRegion, n_t: int, n_v: int):
    """Merging times and speeds of an ``n_t x n_v`` grid over the region.

    Each speed gets its own column of ``n_t`` times spanning the admissible
    interval for that speed. Returns 2-D arrays ``(t, v)`` of shape
    ``(columns, n_t)``; speeds with an empty interval are dropped.
    """
    v = np.linspace(region.v_lo, region.v_hi, n_v) if n_v > 1 else np.array([region.v_lo])
    lo = np.maximum(region.t_lower_intercept + region.t_lower_slope * v, region.t_floor)
    keep = lo <= region.t_hi
    v, lo = v[keep], lo[keep]
    s = np.linspace(0.0, 1.0, n_t) if n_t > 1 else np.zeros(1)
    t = lo[:, None] + s[None, :] * (region.t_hi - lo)[:, None]
    return t, np.broadcast_to(v[:, None], t.shape).copy()


def feasible_mask(x0, v0, t0, L, v_m, t_m, limits: ConstraintLimits):
    """Elementwise speed/accel feasibility of the minimum-energy trajectories."""
    v_m = np.asarray(v_m, dtype=float)
    T = np.asarray(t_m, dtype=float) - t0
    P = L - x0 - v0 * T
    Q = v_m - v0
    a = (6.0 * Q * T - 12.0 * P) / T**3
    b = (6.0 * P - 2.0 * Q * T) / T**2
    u_end = a * T + b
    tol = FEASIBILITY_TOL
    ok = (np.minimum(b, u_end) >= limits.u_min - tol) & (np.maximum(b, u_end) <= limits.u_max + tol)
    v_lo = np.minimum(v0, v_m)
    v_hi = np.maximum(v0, v_m)
    with np.errstate(divide="ignore", invalid="ignore"):
        tau = np.where(a != 0.0, -b / a, -1.0)
        vertex = v0 - 0.5 * b * b / np.where(a != 0.0, a, 1.0)
    inside = (tau > 0.0) & (tau < T)
    v_lo = np.where(inside, np.minimum(v_lo, vertex), v_lo)
    v_hi = np.where(inside, np.maximum(v_hi, vertex), v_hi)
    return ok & (v_lo >= limits.v_min - tol) & (v_hi <= limits.v_max + tol)


def grid_costs(k: int, scenario: Scenario, t: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Joint cost of merging as the ``k``-th vehicle, evaluated elementwise."""
    av, alpha = scenario.av, scenario.alpha
    T = t - scenario.t0
    energy = energy_closed_form(av.position, av.velocity, scenario.t0, scenario.L, v, t)
    time = T + undisrupted_time_sum(scenario)
    if k <= scenario.N:
        v_dk = scenario.hdv(k).v_d
        w = discount_sum(k, t, scenario)
        time = time + base_time_disruption(v_dk, v, scenario.model.u_bar) * w
        energy = energy + base_energy_disruption(v_dk, v, scenario.model.u_bar) * w
    return alpha * time + (1.0 - alpha) * energy


@dataclass(frozen=True)
class OracleEntry:
    k: int
    t_m: float
    v_m: float
    cost: float
    note: str = ""


@dataclass(frozen=True)
class OracleResult:
    per_k: tuple[OracleEntry, ...]
    argmin_k: int
    grid_resolution: tuple[int, int]

    def cost_of(self, k: int) -> float:
        for e in self.per_k:
            if e.k == k:
                return e.cost
        raise KeyError(k)


def brute_force(
    scenario: Scenario, n_t: int = 512, n_v: int = 512, feasible_only: bool = False,
    indices=None,
) -> OracleResult:
    """Exhaustive grid minimum for every index, then the cheapest index.

    With ``feasible_only`` grid points whose trajectory breaks a speed or
    acceleration limit are discarded first. Empty windows are recorded with
    infinite cost.
    """
    if n_t < 2 or n_v < 2:
        raise ValueError("grid needs at least 2 x 2 points")
    entries = []
    ks = list(scenario.indices) if indices is None else list(indices)
    for k in ks:
        try:
            region = search_region(k, scenario)
        except EmptyWindow as exc:
            entries.append(OracleEntry(k, math.nan, math.nan, math.inf, f"empty window: {exc.reason}"))
            continue
        t, v = region_grid(region, n_t, n_v)
        cost = grid_costs(k, scenario, t, v)
        if feasible_only:
            av = scenario.av
            mask = feasible_mask(av.position, av.velocity, scenario.t0, scenario.L, v, t, scenario.limits)
            cost = np.where(mask, cost, np.inf)
        if cost.size == 0 or not np.isfinite(cost).any():
            entries.append(OracleEntry(k, math.nan, math.nan, math.inf, "no admissible grid point"))
            continue
        flat = int(np.argmin(cost))
        entries.append(OracleEntry(k, float(t.flat[flat]), float(v.flat[flat]), float(cost.flat[flat])))
    best = min(entries, key=lambda e: (e.cost, e.k))
    return OracleResult(tuple(entries), best.k, (n_t, n_v))


# --- random homogeneous platoons ---------------------------------------------


@dataclass(frozen=True)
class ScenarioRanges:
    """Sampling ranges for :func:`random_scenario` (inclusive bounds)."""

    n_hdv: tuple[int, int] = (1, 6)
    spacing: tuple[float, float] = (40.0, 100.0)
    platoon_speed: tuple[float, float] = (20.0, 30.0)
    av_speed: tuple[float, float] = (12.0, 30.0)
    L: tuple[float, float] = (300.0, 500.0)
    av_position: tuple[float, float] = (0.0, 100.0)
    lead_gap: tuple[float, float] = (100.0, 450.0)  # merge point minus HDV 1 position
    t0: tuple[float, float] = (0.0, 100.0)
    alpha: tuple[float, float] = (0.0, 1.0)
    beta: tuple[float, float] = (0.01, 0.2)
    u_bar: tuple[float, float] = (2.0, 5.0)
    phi_c: tuple[float, float] = (0.8, 1.5)
    phi_h: tuple[float, float] = (0.8, 1.5)
    delta: tuple[float, float] = (2.0, 6.0)
    v_max: tuple[float, float] = (30.0, 35.0)
    u_max: tuple[float, float] = (2.5, 4.0)
    u_min: tuple[float, float] = (-7.0, -5.0)
    v_min: float = 0.0
    max_retries: int = 100


def random_scenario(seed: int, ranges: ScenarioRanges = ScenarioRanges()) -> Scenario:
    """Deterministic random platoon scenario with equal HDV speeds and spacing.

    Draws are rejected until the window for merging last is nonempty.
    """
    rng = np.random.default_rng(seed)
    u = lambda r: float(rng.uniform(*r))  # noqa: E731
    for _ in range(ranges.max_retries):
        N = int(rng.integers(ranges.n_hdv[0], ranges.n_hdv[1] + 1))
        L = u(ranges.L)
        z = u(ranges.spacing)
        x1 = L - u(ranges.lead_gap)
        sc = make_scenario(
            t0=u(ranges.t0),
            x0=u(ranges.av_position),
            v0=u(ranges.av_speed),
            hdv_positions=[x1 - i * z for i in range(N)],
            hdv_speeds=u(ranges.platoon_speed),
            L=L,
            alpha=u(ranges.alpha),
            v_min=ranges.v_min,
            v_max=u(ranges.v_max),
            u_min=u(ranges.u_min),
            u_max=u(ranges.u_max),
            phi_c=u(ranges.phi_c),
            phi_h=u(ranges.phi_h),
            delta=u(ranges.delta),
            u_bar=u(ranges.u_bar),
            beta=u(ranges.beta),
        )
        try:
            validate_scenario(sc)
            search_region(N + 1, sc)
        except (EmptyWindow, ValueError):
            continue
        return sc
    raise RetriesExhausted(f"seed {seed}: no valid scenario in {ranges.max_retries} draws")


# --- replay ------------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    t: float
    constraint: str
    margin: float  # negative: amount by which the constraint is broken


@dataclass(frozen=True)
class ReplayAudit:
    samples: dict = field(repr=False)
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def sample_times(t_start: float, t_end: float, dt: float) -> np.ndarray:
    """Times ``t_start + i*dt`` strictly before ``t_end``, then ``t_end`` itself."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    n = int(math.floor((t_end - t_start) / dt + 1e-9))
    ts = t_start + dt * np.arange(n + 1)
    ts = ts[ts < t_end - 1e-12]
    return np.append(ts, t_end)


def replay(plan, scenario: Scenario, dt: float = 0.01) -> ReplayAudit:
    """Step through the plan and report every violated constraint.

    Speed and acceleration limits are checked at their exact extrema over
    the whole horizon, so the verdict does not depend on ``dt``. The two
    merge gaps are checked at the merging time with the AV at the merge point.
    """
    coeffs = plan.coeffs
    ts = sample_times(coeffs.valid_from, coeffs.valid_to, dt)
    u, v, x = evaluate(coeffs, ts)
    hdv_x = np.array(
        [[hdv_position_at(i, t, scenario) for i in range(1, scenario.N + 1)] for t in ts]
    ).reshape(len(ts), scenario.N)
    samples = {"t": ts, "x": x, "v": v, "u": u, "hdv_x": hdv_x}

    lim = scenario.limits
    out = []
    (v_lo, v_hi), (u_lo, u_hi) = extrema(coeffs)
    a, b, T = coeffs.jerk, coeffs.accel, coeffs.horizon

    def when_v(value):
        if value == coeffs.v_start:
            return coeffs.valid_from
        if a != 0.0 and 0.0 < -b / a < T and value != plan.v_m:
            return coeffs.valid_from - b / a
        return coeffs.valid_to

    def when_u(value):
        return coeffs.valid_from if value == b else coeffs.valid_to

    for name, margin, t in (
        ("speed_min", v_lo - lim.v_min, when_v(v_lo)),
        ("speed_max", lim.v_max - v_hi, when_v(v_hi)),
        ("accel_min", u_lo - lim.u_min, when_u(u_lo)),
        ("accel_max", lim.u_max - u_hi, when_u(u_hi)),
    ):
        if margin < -MARGIN_TOL:
            out.append(Violation(t, name, margin))

    leading, trailing, _ = gap_margins(plan.k, coeffs.valid_to, plan.v_m, scenario)
    gap_tol = MARGIN_TOL * max(1.0, scenario.L)
    if leading is not None and leading < -gap_tol:
        out.append(Violation(coeffs.valid_to, "merge_leading", leading))
    if trailing is not None and trailing < -gap_tol:
        out.append(Violation(coeffs.valid_to, "merge_trailing", trailing))
    return ReplayAudit(samples, tuple(out))


# --- property suites ---------------------------------------------------------

ORACLE_RTOL = 1e-4
ENERGY_RTOL = 1e-9


@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    detail: str = ""


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-12)


def oracle_check(scenario: Scenario, plan, n: int = 512) -> Check:
    """Policy argmin against the brute-force argmin (same index or costs within 1e-4)."""
    oracle = brute_force(scenario, n, n)
    best = plan.ranking[0]
    j_o = oracle.cost_of(oracle.argmin_k)
    ok = best.k == oracle.argmin_k or _rel(best.total, j_o) < ORACLE_RTOL
    return Check("oracle_agreement", ok, f"policy k={best.k} J={best.total:.9g}, "
                 f"oracle k={oracle.argmin_k} J={j_o:.9g}")


def energy_check(plan, scenario: Scenario) -> Check:
    av = scenario.av
    closed = float(energy_closed_form(av.position, av.velocity, scenario.t0, scenario.L, plan.v_m, plan.t_m))
    quad = energy_quadrature(plan.coeffs)
    err = abs(closed - quad) / max(1.0, quad)
    return Check("energy_equivalence", err < ENERGY_RTOL, f"relative error {err:.3g}")


def theorem_checks(scenario: Scenario, n: int = 512, grid=(64, 64), tol=1e-6) -> list[Check]:
    """Fast-path answers at alpha = 1 and alpha = 0 against the oracle, when they apply."""
    out = []
    try:
        v_star = policy.platoon_merge_speed(scenario)
    except (AssumptionViolated, EmptyWindow):
        return out
    g = policy.group_parameters(scenario)
    s1 = scenario.with_alpha(1.0)
    D_t = float(base_time_disruption(g.v_d, v_star, scenario.model.u_bar))
    q = policy.theorem1_index(s1, v_star, D_t)
    if q is not None:
        o = brute_force(s1, n, n)
        j = o.cost_of(o.argmin_k)
        ok = q == o.argmin_k or _rel(o.cost_of(q), j) < ORACLE_RTOL
        out.append(Check("theorem1", ok, f"shortcut k={q}, oracle k={o.argmin_k}"))
    s0 = scenario.with_alpha(0.0)
    try:
        last = policy.optimize_index(scenario.N + 1, s0, grid, tol)
    except Infeasible:
        return out
    if policy.theorem2_shortlist(s0, last, last.v_m) is not None:
        o = brute_force(s0, n, n)
        j = o.cost_of(o.argmin_k)
        pair = min(o.cost_of(1), o.cost_of(scenario.N + 1))
        ok = pair - j <= ORACLE_RTOL * abs(j)
        out.append(Check("theorem2", ok, f"min over (1, N+1) {pair:.9g}, oracle min {j:.9g}"))
    return out


def verify_scenario(scenario: Scenario, n: int = 512, grid=(64, 64), tol=1e-6) -> list[Check]:
    """Every property that can be checked on one scenario."""
    try:
        plan = policy.optimal_index(scenario, grid, tol)
    except NoFeasiblePlan as exc:
        return [Check("plan_exists", False, str(exc))]
    checks = [oracle_check(scenario, plan, n), energy_check(plan, scenario)]
    audit = replay(plan, scenario)
    checks.append(Check("replay", audit.ok, "; ".join(
        f"{v.constraint} by {-v.margin:.3g} at t={v.t:.6g}" for v in audit.violations)))
    checks += theorem_checks(scenario, n, grid, tol)
    return checks
