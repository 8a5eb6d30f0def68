"""Optimal merging-index policy.

For each merging index the AV's merging time and speed are chosen to
minimise the joint time/energy cost of all vehicles (``optimize_index``);
the cheapest index wins (``optimal_index``). Indices whose optimal
trajectory breaks the speed or acceleration limits are skipped in favour
of the next cheapest one.

For homogeneous, equally spaced HDV platoons two shortcuts identify the
winner without the full scan: a spacing test for time-dominated weights
(``theorem1_index``) and a travel-time test for energy-dominated weights
that narrows the choice to merging first or last (``theorem2_shortlist``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional


from . import kernels
from .disruption import (
    HdvCost,
    base_energy_disruption,
    base_time_disruption,
    hdv_cost,
    undisrupted_time_sum,
)
from .errors import AssumptionViolated, EmptyWindow, Infeasible, NoFeasiblePlan, UnsafePoint
from .safe_sets import check_safe_gap, safe_window, search_region
from .trajectory import (
    FeasibilityReport,
    TrajectoryCoefficients,
    energy_closed_form,
    feasibility,
    solve_coefficients,
)
from .types import Scenario, check_index, group_parameters, satisfies_assumption2

DEFAULT_GRID = (64, 64)
DEFAULT_TOL = 1e-6
FAST_PATH_MODES = ("off", "advisory", "only")


@dataclass(frozen=True)
class CostBreakdown:
    av_time: float
    av_energy: float
    hdv: HdvCost

    def total(self, alpha: float) -> float:
        time = self.av_time + self.hdv.undisrupted_time_sum + self.hdv.time_disruption
        energy = self.av_energy + self.hdv.energy_disruption
        return alpha * time + (1.0 - alpha) * energy

    def av_part(self, alpha: float) -> float:
        return alpha * self.av_time + (1.0 - alpha) * self.av_energy

    def hdv_part(self, alpha: float) -> float:
        h = self.hdv
        return alpha * (h.undisrupted_time_sum + h.time_disruption) + (1.0 - alpha) * h.energy_disruption


@dataclass(frozen=True)
class IndexSolution:
    k: int
    t_m: float
    v_m: float
    cost: CostBreakdown
    total: float


@dataclass(frozen=True)
class FastPathInfo:
    theorem: str  # "theorem1", "theorem2" or "none"
    answer: Optional[tuple[int, ...]]
    alpha_lower: Optional[float]
    alpha_upper: Optional[float]
    agrees: Optional[bool] = None


@dataclass(frozen=True)
class MergePlan:
    k: int
    t_m: float
    v_m: float
    coeffs: TrajectoryCoefficients
    cost: CostBreakdown
    feasible: FeasibilityReport
    fallback_applied: bool
    skipped_indices: tuple[tuple[int, str], ...]
    candidates: tuple[IndexSolution, ...] = ()
    fast_path: Optional[FastPathInfo] = None
    alpha: float = field(default=math.nan)

    @property
    def total(self) -> float:
        return self.cost.total(self.alpha)

    @property
    def ranking(self) -> tuple[IndexSolution, ...]:
        """Evaluated indices ordered by cost, ties to the smaller index."""
        return tuple(sorted(self.candidates, key=lambda s: (s.total, s.k)))

    @property
    def unfiltered_argmin(self) -> int:
        return self.ranking[0].k


def cost_model(k: int, scenario: Scenario) -> kernels.CostModel:
    check_index(k, scenario)
    N = scenario.N
    disrupts = k <= N
    if disrupts:
        hk = scenario.hdv(k)
        dz0 = tuple(hk.x - scenario.hdv(i).x for i in range(k + 1, N + 1))
        dv = tuple(hk.v_d - scenario.hdv(i).v_d for i in range(k + 1, N + 1))
        v_dk = hk.v_d
    else:
        dz0 = dv = ()
        v_dk = 1.0
    return kernels.CostModel(
        x0=scenario.av.position,
        v0=scenario.av.velocity,
        t0=scenario.t0,
        L=scenario.L,
        alpha=scenario.alpha,
        undisrupted=undisrupted_time_sum(scenario),
        disrupts=disrupts,
        v_dk=v_dk,
        u_bar=scenario.model.u_bar,
        beta=scenario.model.beta,
        dz0=dz0,
        dv=dv,
    )


def cost_at(k: int, t_m: float, v_m: float, scenario: Scenario) -> CostBreakdown:
    """Cost terms of merging as the ``k``-th vehicle at time ``t_m`` and speed ``v_m``."""
    check_index(k, scenario)
    lim = scenario.limits
    gap = check_safe_gap(k, t_m, v_m, scenario)
    if not (gap and gap.leading is not False and gap.trailing is not False):
        raise UnsafePoint(f"(t_m={t_m}, v_m={v_m}) violates the merge gap of index {k}")
    if not -1e-9 <= v_m <= lim.v_max + 1e-9:
        raise UnsafePoint(f"merging speed {v_m} outside [0, {lim.v_max}]")
    av = scenario.av
    energy = energy_closed_form(av.position, av.velocity, scenario.t0, scenario.L, v_m, t_m)
    return CostBreakdown(t_m - scenario.t0, energy, hdv_cost(k, v_m, t_m, scenario))


def _solution(k, t_m, v_m, scenario) -> IndexSolution:
    cost = cost_at(k, t_m, v_m, scenario)
    return IndexSolution(k, t_m, v_m, cost, cost.total(scenario.alpha))


def optimize_index(
    k: int,
    scenario: Scenario,
    grid: tuple[int, int] = DEFAULT_GRID,
    tol: float = DEFAULT_TOL,
) -> IndexSolution:
    """Minimise the joint cost of index ``k`` over its safe window.

    A coarse ``n_t x n_v`` grid locates the basin; coordinate descent with
    shrinking brackets then polishes the point to ``tol`` in both merging
    time and merging speed. Raises :class:`Infeasible` for an empty window.
    """
    try:
        region = search_region(k, scenario)
    except EmptyWindow as exc:
        raise Infeasible(str(exc)) from exc
    n_t, n_v = grid
    model = cost_model(k, scenario)
    c0, t, v, s = kernels.grid_min(model, region, n_t, n_v)
    if not math.isfinite(c0):
        raise Infeasible(f"index {k}: no finite-cost point in the window")
    h_v = 2.0 * (region.v_hi - region.v_lo) / max(n_v - 1, 1)
    h_s = 2.0 / max(n_t - 1, 1)
    c1, t1, v1, _, _ = kernels.refine(model, region, v, s, max(h_v, tol), h_s, tol, tol)
    if c1 <= c0:
        t, v = t1, v1
    return _solution(k, t, v, scenario)


def _feasible_fallback(k: int, scenario: Scenario, n: int = 128) -> Optional[IndexSolution]:
    """Cheapest grid point of index ``k`` whose trajectory respects all limits."""
    try:
        region = search_region(k, scenario)
    except EmptyWindow:
        return None
    from .harness import feasible_mask, region_grid

    tt, vv = region_grid(region, n, n)
    av = scenario.av
    mask = feasible_mask(av.position, av.velocity, scenario.t0, scenario.L, vv, tt, scenario.limits)
    if not mask.any():
        return None
    model = cost_model(k, scenario)
    best = None
    for t, v in zip(tt[mask], vv[mask]):
        c = kernels.point_cost(model, t, v)
        if best is None or c < best[0]:
            best = (c, t, v)
    return _solution(k, float(best[1]), float(best[2]), scenario)


def _plan_from(sol: IndexSolution, scenario: Scenario):
    av = scenario.av
    coeffs = solve_coefficients(av.position, av.velocity, scenario.t0, scenario.L, sol.v_m, sol.t_m)
    return coeffs, feasibility(coeffs, scenario.limits)


def solve_indices(scenario: Scenario, ks, grid=DEFAULT_GRID, tol=DEFAULT_TOL):
    """Step-1 solutions for the given indices plus (k, reason) for empty windows."""
    sols, empty = [], []
    for k in ks:
        try:
            sols.append(optimize_index(k, scenario, grid, tol))
        except Infeasible as exc:
            empty.append((k, f"empty window: {exc}"))
    return sols, empty


def optimal_index(
    scenario: Scenario,
    grid: tuple[int, int] = DEFAULT_GRID,
    tol: float = DEFAULT_TOL,
    fast_path: str = "off",
) -> MergePlan:
    """Pick the cheapest merging index whose trajectory is actuator-feasible."""
    if fast_path not in FAST_PATH_MODES:
        raise ValueError(f"fast_path must be one of {FAST_PATH_MODES}")
    N = scenario.N
    all_ks = list(scenario.indices)
    info = None
    ks = all_ks
    if fast_path != "off":
        info = fast_path_verdict(scenario, grid, tol)
        if fast_path == "only" and info.answer is not None:
            ks = list(info.answer)

    sols, skipped = solve_indices(scenario, ks, grid, tol)
    plan = _walk(sols, skipped, scenario)
    if plan is None and ks != all_ks:
        rest, rest_empty = solve_indices(scenario, [k for k in all_ks if k not in ks], grid, tol)
        sols, skipped = sols + rest, skipped + rest_empty
        plan = _walk(sols, skipped, scenario)
    if plan is None:
        last = _feasible_fallback(N + 1, scenario)
        if last is None:
            raise NoFeasiblePlan("no index, including merging last, admits a feasible trajectory")
        coeffs, rep = _plan_from(last, scenario)
        walked = [(s.k, "actuator limits violated") for s in sorted(sols, key=lambda s: (s.total, s.k))]
        plan = MergePlan(last.k, last.t_m, last.v_m, coeffs, last.cost, rep, True,
                         tuple(skipped + walked), tuple(sols), None, scenario.alpha)

    if info is not None and fast_path == "advisory" and info.answer is not None:
        full_best = min(plan.candidates, key=lambda s: (s.total, s.k)).k
        if info.theorem == "theorem2":
            short = [s for s in plan.candidates if s.k in info.answer]
            agrees = bool(short) and min(short, key=lambda s: (s.total, s.k)).k == full_best
        else:
            agrees = info.answer[0] == full_best
        info = FastPathInfo(info.theorem, info.answer, info.alpha_lower, info.alpha_upper, agrees)
    return MergePlan(plan.k, plan.t_m, plan.v_m, plan.coeffs, plan.cost, plan.feasible,
                     plan.fallback_applied, plan.skipped_indices, plan.candidates, info,
                     scenario.alpha)


def _walk(sols, skipped, scenario) -> Optional[MergePlan]:
    ranked = sorted(sols, key=lambda s: (s.total, s.k))
    skipped = list(skipped)
    fallback = False
    for sol in ranked:
        coeffs, rep = _plan_from(sol, scenario)
        if rep.ok:
            return MergePlan(sol.k, sol.t_m, sol.v_m, coeffs, sol.cost, rep, fallback,
                             tuple(skipped), tuple(sorted(sols, key=lambda s: s.k)), None,
                             scenario.alpha)
        what = []
        if not rep.speed_ok:
            what.append(f"speed range [{rep.v_range[0]:.6g}, {rep.v_range[1]:.6g}]")
        if not rep.accel_ok:
            what.append(f"accel range [{rep.u_range[0]:.6g}, {rep.u_range[1]:.6g}]")
        skipped.append((sol.k, "actuator limits violated: " + ", ".join(what)))
        fallback = True
    return None


# --- weight thresholds -------------------------------------------------------


def max_excess_energy(v_max, v0, u_max, N, v_d, v_min, u_bar) -> float:
    return 0.5 * ((v_max - v0) * u_max + N * (v_d - v_min) * u_bar)


def geometric_sum(gamma: float, n: int) -> float:
    """1 + gamma + ... + gamma**(n-1)."""
    if abs(1.0 - gamma) < 1e-12:
        return float(n)
    return (1.0 - gamma**n) / (1.0 - gamma)


def alpha_lower(e_max, z, v_d, gamma, N, D_t) -> float:
    return e_max / (e_max + z / v_d + gamma ** (N - 1) * D_t)


def alpha_upper(e_min, z, v_d, gamma, N, D_t) -> float:
    denom = e_min + N * z / v_d + geometric_sum(gamma, N) * D_t
    return e_min / denom if denom > 0 else 0.0


def _platoon(scenario: Scenario):
    if not satisfies_assumption2(scenario) or scenario.N < 2:
        raise AssumptionViolated("needs at least two equally spaced HDVs with one desired speed")
    g = group_parameters(scenario)
    return g.N, g.v_d, g.z, math.exp(-scenario.model.beta * g.z)


def alpha_lower_threshold(scenario: Scenario, v_m_star: Optional[float] = None) -> float:
    """Weight above which the time-optimal index stays optimal.

    ``v_m_star`` defaults to :func:`platoon_merge_speed`.
    """
    N, v_d, z, gamma = _platoon(scenario)
    if v_m_star is None:
        v_m_star = platoon_merge_speed(scenario)
    lim, av = scenario.limits, scenario.av
    e_max = max_excess_energy(lim.v_max, av.velocity, lim.u_max, N, v_d, lim.v_min, scenario.model.u_bar)
    D_t = float(base_time_disruption(v_d, v_m_star, scenario.model.u_bar))
    return alpha_lower(e_max, z, v_d, gamma, N, D_t)


def alpha_upper_threshold(scenario: Scenario, v_m_star: Optional[float] = None) -> float:
    """Weight below which the energy-optimal index stays optimal.

    ``v_m_star`` defaults to :func:`platoon_merge_speed`.
    """
    N, v_d, z, gamma = _platoon(scenario)
    if v_m_star is None:
        v_m_star = platoon_merge_speed(scenario)
    u_bar = scenario.model.u_bar
    D_t = float(base_time_disruption(v_d, v_m_star, u_bar))
    e_min = gamma ** (N - 1) * float(base_energy_disruption(v_d, v_m_star, u_bar))
    return alpha_upper(e_min, z, v_d, gamma, N, D_t)


# --- shortcuts for homogeneous platoons --------------------------------------

_BOUND_RTOL = 1e-12


def spacing_bounds(q: int, N: int, gamma: float, v_d: float, D_t: float):
    """Interval of platoon spacings for which merging as the ``q``-th vehicle is time-optimal.

    Merging first has no upper bound and merging last no lower bound.
    """
    scale = v_d * D_t
    if q <= N:
        n = N - q + 1
        lower = geometric_sum(gamma, n) / n * scale
    else:
        lower = -math.inf
    if q >= 2:
        upper = gamma ** (N - q + 1) * geometric_sum(gamma, q - 1) / (q - 1) * scale
    else:
        upper = math.inf
    return lower, upper


def theorem1_index(scenario: Scenario, v_m_star: float, D_t: float) -> Optional[int]:
    """Time-optimal index of a homogeneous platoon, or ``None`` if no index fits.

    A merging speed at or above the platoon speed disrupts nobody, so merging
    first wins. Otherwise the first ``q`` whose spacing interval contains
    the actual spacing is returned. Scenarios where some index has no safe
    window fall outside the shortcut and also give ``None``.
    """
    N, v_d, z, gamma = _platoon(scenario)
    if not all_windows_open(scenario):
        return None
    if v_m_star >= v_d:
        return 1
    for q in range(1, N + 2):
        lo, hi = spacing_bounds(q, N, gamma, v_d, D_t)
        if lo * (1 - _BOUND_RTOL) <= z <= hi * (1 + _BOUND_RTOL):
            return q
    return None


def travel_time_threshold(L, x0, v0, v_m) -> float:
    denom = v0 + v_m + math.sqrt(v0 * v_m)
    return math.inf if denom == 0 else 3.0 * (L - x0) / denom


def theorem2_shortlist(scenario: Scenario, plan_last, v_m_star: float) -> Optional[tuple[int, int]]:
    """``(1, N+1)`` when merging last arrives early enough, else ``None``.

    ``plan_last`` is the solution for merging behind the whole platoon
    (anything with a ``t_m`` attribute).
    """
    N, _, _, _ = _platoon(scenario)
    av = scenario.av
    threshold = travel_time_threshold(scenario.L, av.position, av.velocity, v_m_star)
    if plan_last.t_m - scenario.t0 <= threshold * (1 + _BOUND_RTOL):
        return (1, N + 1)
    return None


def all_windows_open(scenario: Scenario) -> bool:
    """True when every merging index has a nonempty search region."""
    for k in scenario.indices:
        try:
            search_region(k, scenario)
        except EmptyWindow:
            return False
    return True


def platoon_merge_speed(scenario: Scenario) -> float:
    """Highest merging speed admitted by the gap common to every slot inside the platoon.

    With equal speeds and spacing each interior slot has the same speed
    bound; this is the merging speed shared by all indices in the shortcuts
    and weight thresholds. Raises :class:`EmptyWindow` if the gap is too short.
    """
    _platoon(scenario)
    return safe_window(2, scenario.t0, scenario).v_upper


def fast_path_verdict(scenario: Scenario, grid=DEFAULT_GRID, tol=DEFAULT_TOL) -> FastPathInfo:
    """Which shortcut applies to ``scenario`` and what it answers."""
    try:
        v_star = platoon_merge_speed(scenario)
        a_l = alpha_lower_threshold(scenario, v_star)
        a_u = alpha_upper_threshold(scenario, v_star)
    except (AssumptionViolated, EmptyWindow):
        return FastPathInfo("none", None, None, None)
    if not all_windows_open(scenario):
        return FastPathInfo("none", None, a_l, a_u)
    alpha = scenario.alpha
    if alpha <= a_u:
        try:
            last = optimize_index(scenario.N + 1, scenario, grid, tol)
        except Infeasible:
            return FastPathInfo("none", None, a_l, a_u)
        short = theorem2_shortlist(scenario, last, last.v_m)
        if short is not None:
            return FastPathInfo("theorem2", short, a_l, a_u)
    if alpha > a_l:
        g = group_parameters(scenario)
        D_t = float(base_time_disruption(g.v_d, v_star, scenario.model.u_bar))
        q = theorem1_index(scenario, v_star, D_t)
        if q is not None:
            return FastPathInfo("theorem1", (q,), a_l, a_u)
    return FastPathInfo("none", None, a_l, a_u)
