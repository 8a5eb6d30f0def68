from pathlib import Path

import numpy as np
import pytest
import yaml

from optmerge import disruption
from optmerge.cli import main
from optmerge.files import SolverSettings, dumps_scenario, load_scenario, loads_scenario, save_scenario
from optmerge.harness import random_scenario
from optmerge.types import make_scenario

SCENARIOS = sorted((Path(__file__).parent.parent / "scenarios").glob("*.yaml"))


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_three_scenarios_shipped():
    assert len(SCENARIOS) == 3


@pytest.mark.parametrize("path", SCENARIOS, ids=lambda p: p.stem)
def test_scenario_files_round_trip(path):
    sc, solver = load_scenario(path)
    again, solver2 = loads_scenario(dumps_scenario(sc, solver))
    assert again == sc and solver2 == solver


def test_round_trip_random_floats():
    for seed in range(10):
        sc = random_scenario(seed)
        assert loads_scenario(dumps_scenario(sc))[0] == sc


def test_units_header(tmp_path):
    p = tmp_path / "s.yaml"
    save_scenario(p, random_scenario(0), SolverSettings())
    assert p.read_text().startswith("# Units:")


@pytest.mark.parametrize("path", SCENARIOS, ids=lambda p: p.stem)
def test_solve_is_byte_identical(path, capsys, tmp_path):
    a = run(capsys, "solve", path, "--out", tmp_path / "a")
    b = run(capsys, "solve", path, "--out", tmp_path / "b")
    assert a[0] == 0 and a == b
    for name in ("plan.yaml", "trajectory.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_trajectory_csv(capsys, tmp_path):
    code, _, _ = run(capsys, "solve", SCENARIOS[0], "--out", tmp_path, "--dt", "0.25")
    assert code == 0
    lines = (tmp_path / "trajectory.csv").read_text().splitlines()
    assert lines[0] == "t,x,v,u"
    plan = yaml.safe_load((tmp_path / "plan.yaml").read_text())
    t, x, v, _ = map(float, lines[-1].split(","))
    assert t == pytest.approx(plan["t_m"], rel=1e-8)
    sc, _ = load_scenario(SCENARIOS[0])
    assert x == pytest.approx(sc.L, rel=1e-8) and v == pytest.approx(plan["v_m"], rel=1e-8)
    ts = np.array([float(r.split(",")[0]) for r in lines[1:]])
    np.testing.assert_allclose(np.diff(ts)[:-1], 0.25, rtol=1e-6)


def test_plan_yaml_lists_skips_and_candidates(capsys):
    wide = next(p for p in SCENARIOS if p.stem == "wide_platoon")
    code, out, _ = run(capsys, "solve", wide, "--alpha", "1", "--format", "yaml")
    plan = yaml.safe_load(out)
    assert code == 0 and plan["fallback_applied"] and plan["skipped_indices"][0]["k"] == 1
    assert len(plan["candidates"]) == 4


def test_time_optimal_row_is_first_index(capsys):
    wide = next(p for p in SCENARIOS if p.stem == "wide_platoon")
    code, out, _ = run(capsys, "solve", wide, "--alpha", "1")
    rows = [ln.split() for ln in out.splitlines() if ln[:3].strip().isdigit()]
    best = min(rows, key=lambda r: float(r[5]))
    assert code == 0 and best[0] == "1"


def test_fast_path_only_shortlist(capsys, tmp_path):
    sc = random_scenario(74).with_alpha(0.0)  # merging last arrives early enough
    p = tmp_path / "s.yaml"
    save_scenario(p, sc)
    _, fast, _ = run(capsys, "solve", p, "--fast-path", "only", "--format", "yaml")
    _, full, _ = run(capsys, "solve", p, "--format", "yaml")
    fast, full = yaml.safe_load(fast), yaml.safe_load(full)
    evaluated = [c["k"] for c in fast["candidates"] if c["J"] is not None]
    assert evaluated == [1, sc.N + 1]
    assert fast["k"] == full["k"] and fast["fast_path"]["theorem"] == "theorem2"


@pytest.mark.parametrize("path", SCENARIOS, ids=lambda p: p.stem)
def test_sweep_is_byte_identical(path, capsys):
    a = run(capsys, "sweep-alpha", path)
    assert a[0] == 0 and a == run(capsys, "sweep-alpha", path)


def test_sweep_rows_and_thresholds(capsys):
    wide = next(p for p in SCENARIOS if p.stem == "wide_platoon")
    code, out, _ = run(capsys, "sweep-alpha", wide, "--alphas", "0,0.25,0.5,0.75,1")
    lines = out.splitlines()
    rows = [ln.split(",") for ln in lines[1:] if not ln.startswith("#")]
    assert code == 0 and lines[0] == "alpha,k,J" and len(rows) == 5
    a_l = float(next(ln for ln in lines if ln.startswith("# alpha_l=")).split("=")[1])
    assert len({r[1] for r in rows if float(r[0]) >= a_l}) <= 1


def test_sweep_reports_missing_thresholds(capsys):
    mixed = next(p for p in SCENARIOS if p.stem == "mixed_speeds")
    _, out, _ = run(capsys, "sweep-alpha", mixed, "--steps", "3")
    assert "thresholds unavailable" in out


def test_exit_code_missing_file(capsys, tmp_path):
    assert run(capsys, "solve", tmp_path / "nope.yaml")[0] == 1


@pytest.mark.parametrize("text, needle", [
    ("t0: [1", "YAML"),
    ("t0: 0\nL: 400\n", "av"),
    ("t0: 0\nL: 400\nalpha: 2\nav: {position: 0, velocity: 20}\nhdvs: []\n"
     "limits: {v_min: 0, v_max: 33, u_min: -7, u_max: 3, phi_c: 1, phi_h: 1, delta: 5}\n"
     "model: {u_bar: 5, beta: 0.1}\n", "alpha"),
    ("t0: 0\nL: 400\nalpha: 0.5\nav: {position: 0, velocity: 20}\n"
     "hdvs: [{position: 200, velocity: 25}, {position: 300, velocity: 25}]\n"
     "limits: {v_min: 0, v_max: 33, u_min: -7, u_max: 3, phi_c: 1, phi_h: 1, delta: 5}\n"
     "model: {u_bar: 5, beta: 0.1}\n", "decrease"),
])
def test_exit_code_invalid_file(text, needle, capsys, tmp_path):
    p = tmp_path / "bad.yaml"
    p.write_text(text)
    code, _, err = run(capsys, "solve", p)
    assert code == 1 and needle in err


def test_exit_code_bad_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["solve", str(SCENARIOS[0]), "--grid", "64by64"])
    assert exc.value.code == 1


def test_exit_code_no_feasible_plan(capsys, tmp_path):
    sc = make_scenario(t0=0, x0=390, v0=20, hdv_positions=[385], hdv_speeds=25, L=400, alpha=0.5,
                       u_min=-1.0, u_max=1.0)
    p = tmp_path / "stuck.yaml"
    save_scenario(p, sc)
    code, _, err = run(capsys, "solve", p)
    assert code == 2 and "no feasible plan" in err


def test_verify_passes_on_seeds(capsys):
    code, out, _ = run(capsys, "verify", "--seeds", "0:4", "--oracle-grid", "128")
    assert code == 0 and "all properties hold" in out


def test_verify_single_file_fast(capsys):
    import time
    t = time.perf_counter()
    code, _, _ = run(capsys, "verify", SCENARIOS[0], "--oracle-grid", "256")
    assert code == 0 and time.perf_counter() - t < 1.0


def test_verify_detects_injected_fault(capsys, monkeypatch):
    monkeypatch.setattr(disruption, "discount_factor", lambda beta, z: np.exp(beta * np.asarray(z, float)))
    code, out, _ = run(capsys, "verify", "--seeds", "0:12", "--oracle-grid", "128")
    assert code == 3
    assert "FAIL oracle_agreement [seed" in out
