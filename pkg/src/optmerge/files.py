"""Reading and writing scenario files and plan reports (YAML).

Scenario files mirror :class:`~optmerge.types.Scenario` field by field, plus
an optional ``solver`` section. Floats are written with ``repr`` precision so
a parse, serialize, parse cycle returns an identical scenario. Reports use a
fixed 9-significant-digit format so golden files are stable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import yaml

from .errors import ScenarioError
from .harness import sample_times
from .policy import DEFAULT_GRID, DEFAULT_TOL, FAST_PATH_MODES, MergePlan
from .trajectory import evaluate, feasibility, solve_coefficients
from .types import BehaviorModel, ConstraintLimits, Hdv, Scenario, VehicleState, validate_scenario

UNITS_HEADER = (
    "# Units: positions and distances in m, speeds in m/s, accelerations in m/s^2,\n"
    "# times in s (absolute), beta in 1/m, alpha unitless in [0, 1].\n"
    "# HDVs are listed from the merge point backwards (HDV 1 first).\n"
)

_LIMIT_FIELDS = ("v_min", "v_max", "u_min", "u_max", "phi_c", "phi_h", "delta")


@dataclass(frozen=True)
class SolverSettings:
    grid: tuple[int, int] = DEFAULT_GRID
    tol: float = DEFAULT_TOL
    fast_path: str = "off"


def fmt(x) -> str:
    """Pinned float format for reports: 9 significant digits."""
    if x is None:
        return "-"
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.9g}"


def _num(x):
    """Round to 9 significant digits for structured output."""
    return None if x is None else float(fmt(x)) if math.isfinite(x) else fmt(x)


# --- scenarios ---------------------------------------------------------------


def scenario_to_dict(sc: Scenario, solver: SolverSettings | None = None) -> dict:
    d = {
        "t0": sc.t0,
        "L": sc.L,
        "alpha": sc.alpha,
        "av": {"position": sc.av.position, "velocity": sc.av.velocity},
        "hdvs": [
            {"position": h.x, "velocity": h.state.velocity, "desired_speed": h.v_d}
            for h in sc.hdvs
        ],
        "limits": {f: getattr(sc.limits, f) for f in _LIMIT_FIELDS},
        "model": {"u_bar": sc.model.u_bar, "beta": sc.model.beta},
    }
    if solver is not None:
        d["solver"] = {"grid": list(solver.grid), "tol": solver.tol, "fast_path": solver.fast_path}
    return d


def _field(d: dict, key: str, where: str):
    if not isinstance(d, dict) or key not in d:
        raise ScenarioError(f"missing field '{key}' in {where}")
    val = d[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ScenarioError(f"field '{key}' in {where} must be a number, got {val!r}")
    return float(val)


def scenario_from_dict(d: dict) -> tuple[Scenario, SolverSettings]:
    if not isinstance(d, dict):
        raise ScenarioError("scenario file must hold a mapping at top level")
    av = d.get("av")
    hdvs_raw = d.get("hdvs", [])
    if not isinstance(hdvs_raw, list):
        raise ScenarioError("'hdvs' must be a list")
    hdvs = []
    for i, h in enumerate(hdvs_raw, start=1):
        where = f"hdvs[{i}]"
        v = _field(h, "velocity", where)
        v_d = _field(h, "desired_speed", where) if "desired_speed" in h else v
        hdvs.append(Hdv(VehicleState(_field(h, "position", where), v), v_d))
    lim = d.get("limits")
    mdl = d.get("model")
    sc = Scenario(
        t0=_field(d, "t0", "scenario"),
        av=VehicleState(_field(av, "position", "av"), _field(av, "velocity", "av")),
        hdvs=tuple(hdvs),
        L=_field(d, "L", "scenario"),
        alpha=_field(d, "alpha", "scenario"),
        limits=ConstraintLimits(*(_field(lim, f, "limits") for f in _LIMIT_FIELDS)),
        model=BehaviorModel(_field(mdl, "u_bar", "model"), _field(mdl, "beta", "model")),
    )
    validate_scenario(sc)
    return sc, _solver_from(d.get("solver") or {})


def _solver_from(s: dict) -> SolverSettings:
    if not isinstance(s, dict):
        raise ScenarioError("'solver' must be a mapping")
    grid = s.get("grid", list(DEFAULT_GRID))
    if (
        not isinstance(grid, (list, tuple)) or len(grid) != 2
        or not all(isinstance(g, int) and g >= 2 for g in grid)
    ):
        raise ScenarioError(f"solver.grid must be two integers >= 2, got {grid!r}")
    tol = s.get("tol", DEFAULT_TOL)
    if isinstance(tol, bool) or not isinstance(tol, (int, float)) or not tol > 0:
        raise ScenarioError(f"solver.tol must be a positive number, got {tol!r}")
    mode = s.get("fast_path", "off")
    if mode is False:  # YAML 1.1 reads a bare `off` as false
        mode = "off"
    if mode not in FAST_PATH_MODES:
        raise ScenarioError(f"solver.fast_path must be one of {FAST_PATH_MODES}, got {mode!r}")
    return SolverSettings((int(grid[0]), int(grid[1])), float(tol), mode)


def dumps_scenario(sc: Scenario, solver: SolverSettings | None = None) -> str:
    body = yaml.safe_dump(scenario_to_dict(sc, solver), sort_keys=False, default_flow_style=None)
    return UNITS_HEADER + body


def loads_scenario(text: str) -> tuple[Scenario, SolverSettings]:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError(f"not valid YAML: {exc}") from None
    return scenario_from_dict(data)


def load_scenario(path) -> tuple[Scenario, SolverSettings]:
    return loads_scenario(Path(path).read_text(encoding="utf-8"))


def save_scenario(path, sc: Scenario, solver: SolverSettings | None = None) -> None:
    Path(path).write_text(dumps_scenario(sc, solver), encoding="utf-8")


# --- reports -----------------------------------------------------------------


def candidate_rows(plan: MergePlan, scenario: Scenario):
    """Per-index rows ``(k, t_m, v_m, J_A, J_H, J, feasible, note)`` in index order."""
    skipped = dict(plan.skipped_indices)
    av, alpha = scenario.av, scenario.alpha
    by_k = {s.k: s for s in plan.candidates}
    rows = []
    for k in scenario.indices:
        s = by_k.get(k)
        if s is None:
            rows.append((k, None, None, None, None, None, None, skipped.get(k, "not evaluated")))
            continue
        c = solve_coefficients(av.position, av.velocity, scenario.t0, scenario.L, s.v_m, s.t_m)
        ok = feasibility(c, scenario.limits).ok
        rows.append((k, s.t_m, s.v_m, s.cost.av_part(alpha), s.cost.hdv_part(alpha), s.total, ok, ""))
    return rows


def format_table(plan: MergePlan, scenario: Scenario) -> str:
    head = ("k", "t_m", "v_m", "J_A", "J_H", "J", "feasible")
    lines = ["  ".join(f"{h:>16}" if i else f"{h:>3}" for i, h in enumerate(head))]
    for k, t, v, ja, jh, j, ok, note in candidate_rows(plan, scenario):
        if t is None:
            lines.append(f"{k:>3}  {'-':>16}  {'-':>16}  {'-':>16}  {'-':>16}  {'-':>16}  {'-':>16}  {note}")
            continue
        mark = "  <- chosen" if k == plan.k else ""
        lines.append(
            f"{k:>3}  " + "  ".join(f"{fmt(x):>16}" for x in (t, v, ja, jh, j))
            + f"  {'yes' if ok else 'no':>16}{mark}"
        )
    return "\n".join(lines)


def plan_to_dict(plan: MergePlan, scenario: Scenario) -> dict:
    c = plan.coeffs
    fp = plan.fast_path
    return {
        "k": plan.k,
        "t_m": _num(plan.t_m),
        "v_m": _num(plan.v_m),
        "alpha": _num(plan.alpha),
        "cost": {
            "total": _num(plan.total),
            "av_time": _num(plan.cost.av_time),
            "av_energy": _num(plan.cost.av_energy),
            "hdv_undisrupted_time": _num(plan.cost.hdv.undisrupted_time_sum),
            "hdv_time_disruption": _num(plan.cost.hdv.time_disruption),
            "hdv_energy_disruption": _num(plan.cost.hdv.energy_disruption),
        },
        "trajectory": {
            "a0": _num(c.a0), "b0": _num(c.b0), "c0": _num(c.c0), "d0": _num(c.d0),
            "valid_from": _num(c.valid_from), "valid_to": _num(c.valid_to),
        },
        "feasible": {
            "speed_ok": plan.feasible.speed_ok,
            "accel_ok": plan.feasible.accel_ok,
            "v_range": [_num(x) for x in plan.feasible.v_range],
            "u_range": [_num(x) for x in plan.feasible.u_range],
        },
        "fallback_applied": plan.fallback_applied,
        "skipped_indices": [{"k": k, "reason": r} for k, r in plan.skipped_indices],
        "candidates": [
            {"k": k, "t_m": _num(t), "v_m": _num(v), "J_A": _num(ja), "J_H": _num(jh),
             "J": _num(j), "feasible": ok, **({"note": note} if note else {})}
            for k, t, v, ja, jh, j, ok, note in candidate_rows(plan, scenario)
        ],
        "fast_path": None if fp is None else {
            "theorem": fp.theorem,
            "answer": None if fp.answer is None else list(fp.answer),
            "alpha_lower": _num(fp.alpha_lower),
            "alpha_upper": _num(fp.alpha_upper),
            "agrees": fp.agrees,
        },
    }


def dumps_plan(plan: MergePlan, scenario: Scenario) -> str:
    return yaml.safe_dump(plan_to_dict(plan, scenario), sort_keys=False)


def trajectory_csv(plan: MergePlan, dt: float) -> str:
    """``t,x,v,u`` samples every ``dt`` from the observation time; last row at ``t_m``."""
    ts = sample_times(plan.coeffs.valid_from, plan.coeffs.valid_to, dt)
    u, v, x = evaluate(plan.coeffs, ts)
    out = ["t,x,v,u"]
    out += [f"{fmt(t)},{fmt(xi)},{fmt(vi)},{fmt(ui)}" for t, xi, vi, ui in zip(ts, x, v, u)]
    return "\n".join(out) + "\n"


__all__ = [
    "SolverSettings", "fmt", "scenario_to_dict", "scenario_from_dict", "dumps_scenario",
    "loads_scenario", "load_scenario", "save_scenario", "candidate_rows", "format_table",
    "plan_to_dict", "dumps_plan", "trajectory_csv",
]
