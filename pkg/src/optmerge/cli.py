"""Command-line entry point: ``optmerge {solve,verify,sweep-alpha}``.

Exit codes: 0 success, 1 parse or validation error, 2 no feasible plan,
3 a verification property failed.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import harness, policy
from .errors import AssumptionViolated, EmptyWindow, MergeError, NoFeasiblePlan, ScenarioError
from .files import SolverSettings, dumps_plan, fmt, format_table, load_scenario, trajectory_csv
from .types import validate_scenario

EXIT_OK, EXIT_INPUT, EXIT_NO_PLAN, EXIT_VERIFY = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits with 2 by default, which means "no plan" here
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _grid(text: str) -> tuple[int, int]:
    try:
        n_t, n_v = (int(p) for p in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected NTxNV, e.g. 64x64, got {text!r}") from None
    if n_t < 2 or n_v < 2:
        raise argparse.ArgumentTypeError("grid needs at least 2 points per axis")
    return n_t, n_v


def _seeds(text: str) -> range:
    try:
        lo, _, hi = text.partition(":")
        r = range(int(lo), int(hi)) if hi else range(int(lo), int(lo) + 1)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected START:STOP or SEED, got {text!r}") from None
    if not len(r):
        raise argparse.ArgumentTypeError("empty seed range")
    return r


def _alphas(text: str) -> list[float]:
    try:
        vals = [float(a) for a in text.split(",") if a.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals or any(not 0.0 <= a <= 1.0 for a in vals):
        raise argparse.ArgumentTypeError("alpha values must lie in [0, 1]")
    return vals


def _positive(text: str) -> float:
    x = float(text)
    if not x > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return x


def _settings(args, base: SolverSettings) -> SolverSettings:
    return SolverSettings(
        args.grid or base.grid,
        args.refine_tol or base.tol,
        getattr(args, "fast_path", None) or base.fast_path,
    )


def _load(args):
    sc, solver = load_scenario(args.scenario)
    if getattr(args, "alpha", None) is not None:
        sc = validate_scenario(sc.with_alpha(args.alpha))
    return sc, _settings(args, solver)


# --- solve -------------------------------------------------------------------


def cmd_solve(args) -> int:
    sc, st = _load(args)
    try:
        plan = policy.optimal_index(sc, st.grid, st.tol, st.fast_path)
    except NoFeasiblePlan as exc:
        print(f"no feasible plan: {exc}", file=sys.stderr)
        return EXIT_NO_PLAN

    if args.format == "yaml":
        sys.stdout.write(dumps_plan(plan, sc))
    else:
        print(f"scenario: {args.scenario}  N={sc.N}  alpha={fmt(sc.alpha)}")
        print(format_table(plan, sc))
        print(f"chosen k={plan.k}  t_m={fmt(plan.t_m)}  v_m={fmt(plan.v_m)}  J={fmt(plan.total)}"
              + ("  (fallback applied)" if plan.fallback_applied else ""))
        for k, why in plan.skipped_indices:
            print(f"skipped k={k}: {why}")
        if plan.fast_path is not None:
            fp = plan.fast_path
            print(f"fast path: {fp.theorem}  answer={list(fp.answer) if fp.answer else '-'}  "
                  f"alpha_l={fmt(fp.alpha_lower)}  alpha_u={fmt(fp.alpha_upper)}  "
                  f"agrees={'-' if fp.agrees is None else fp.agrees}")

    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "plan.yaml").write_text(dumps_plan(plan, sc), encoding="utf-8")
        (out / "trajectory.csv").write_text(trajectory_csv(plan, args.dt), encoding="utf-8")
    return EXIT_OK


# --- verify ------------------------------------------------------------------


def cmd_verify(args) -> int:
    n = args.oracle_grid
    grid = args.grid or policy.DEFAULT_GRID
    tol = args.refine_tol or policy.DEFAULT_TOL
    if args.scenario:
        sc, st = _load(args)
        cases = [(args.scenario, sc)]
        grid, tol = st.grid, st.tol
    else:
        cases = ((f"seed {s}", harness.random_scenario(s)) for s in args.seeds)

    passed, failed = {}, {}
    first_failures = []
    for label, sc in cases:
        for c in harness.verify_scenario(sc, n, grid, tol):
            bucket = passed if c.ok else failed
            bucket[c.name] = bucket.get(c.name, 0) + 1
            if not c.ok:
                first_failures.append(f"FAIL {c.name} [{label}]: {c.detail}")
    for line in first_failures:
        print(line)
    for name in sorted(set(passed) | set(failed)):
        print(f"{name}: {passed.get(name, 0)} passed, {failed.get(name, 0)} failed")
    if failed:
        return EXIT_VERIFY
    print("all properties hold")
    return EXIT_OK


# --- sweep -------------------------------------------------------------------


def cmd_sweep_alpha(args) -> int:
    sc, st = _load(args)
    alphas = args.alphas if args.alphas else list(np.linspace(0.0, 1.0, args.steps))
    print("alpha,k,J")
    for a in alphas:
        try:
            plan = policy.optimal_index(sc.with_alpha(float(a)), st.grid, st.tol)
            print(f"{fmt(a)},{plan.k},{fmt(plan.total)}")
        except NoFeasiblePlan as exc:
            print(f"{fmt(a)},-,- # {exc}")
    try:
        v_star = policy.platoon_merge_speed(sc)
        print(f"# alpha_l={fmt(policy.alpha_lower_threshold(sc, v_star))}")
        print(f"# alpha_u={fmt(policy.alpha_upper_threshold(sc, v_star))}")
    except (AssumptionViolated, EmptyWindow) as exc:
        print(f"# alpha thresholds unavailable: {exc}")
    return EXIT_OK


# --- wiring ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="optmerge", description="Optimal merging index for one AV joining an HDV stream.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def solver_flags(sp, fast=True):
        sp.add_argument("--grid", type=_grid, help="coarse grid as NTxNV (default from file, else 64x64)")
        sp.add_argument("--refine-tol", type=_positive, help="refinement tolerance in s and m/s")
        if fast:
            sp.add_argument("--fast-path", choices=policy.FAST_PATH_MODES)

    s = sub.add_parser("solve", help="solve one scenario file")
    s.add_argument("scenario")
    s.add_argument("--alpha", type=float, help="override the weight in the file")
    solver_flags(s)
    s.add_argument("--format", choices=("table", "yaml"), default="table")
    s.add_argument("--out", help="directory for plan.yaml and trajectory.csv")
    s.add_argument("--dt", type=_positive, default=0.1, help="trajectory sample step, s")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="check policy properties against the brute-force oracle")
    v.add_argument("scenario", nargs="?", help="scenario file (default: random seeds)")
    v.add_argument("--seeds", type=_seeds, default=range(0, 20), help="START:STOP (default 0:20)")
    v.add_argument("--oracle-grid", type=int, default=512, help="oracle points per axis")
    solver_flags(v, fast=False)
    v.set_defaults(func=cmd_verify, alpha=None)

    w = sub.add_parser("sweep-alpha", help="optimal index across a grid of weights")
    w.add_argument("scenario")
    w.add_argument("--alphas", type=_alphas, help="comma-separated weights")
    w.add_argument("--steps", type=lambda x: max(int(x), 2), default=11, help="evenly spaced weights when --alphas is absent")
    solver_flags(w, fast=False)
    w.set_defaults(func=cmd_sweep_alpha, alpha=None)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, MergeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
