"""Acceptance gate: one PASS/FAIL line per criterion at its stated tolerance.

Run directly (``python3 tests/test_acceptance.py``) or through pytest; in
the latter case the lines are repeated in the terminal summary.
"""
from __future__ import annotations

import math
import time

import numpy as np
import pytest

from pushsafe.model import (
    OperationPoint,
    VehicleParams,
    contact_force,
    contact_force_slope,
    equilibrium_grid,
    equilibrium_residuals,
    solve_equilibrium,
)
from pushsafe.planner import Outcome, build_plan, execute_plan, reference_grid
from pushsafe.safety import PUBLISHED_ZONES, Zone, calibrate_limits, classify, thrust_boundary, zone_table
from pushsafe.sim import SimConfig, run_to_equilibrium

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # running as a script
    ACCEPTANCE_LINES = []

PARAMS = VehicleParams()
REFERENCE_BETAS = (10.0, 30.0, 60.0, 80.0, 90.0)


def crit_1_hover_calibration():
    lim = calibrate_limits(PARAMS, C_h=0.61)
    e_sum = abs(lim.T_sum_max - 35.2) / 35.2
    e_max = abs(lim.T_max - 8.8) / 8.8
    ok = e_sum <= 0.01 and e_max <= 0.01
    return ok, f"T_sum_max={lim.T_sum_max:.3f} N (rel {e_sum:.2%}), T_max={lim.T_max:.3f} N (rel {e_max:.2%}), tol 1%"


def crit_2_risk_reproduction():
    a = classify(60.0, 15.0, PARAMS, calibrate_limits(PARAMS), phi_u_mode="published")
    ok = a.zone is Zone.CRITICAL and abs(a.lam - 0.71) <= 0.005
    return ok, f"zone={a.zone.value}, phi_u={a.phi_u:g}, lambda={a.lam:.4f} (target 0.71 +- 0.005)"


def crit_3_zone_table():
    t0 = time.perf_counter()
    table = zone_table(REFERENCE_BETAS, PARAMS, calibrate_limits(PARAMS, eta=0.7))
    elapsed = time.perf_counter() - t0
    worst = 0
    parts = []
    for z in table:
        pub = PUBLISHED_ZONES[z.beta0]
        ours = (z.table_safe_hi, z.table_crit_lo, z.table_crit_hi)
        dev = max(abs(a - b) for a, b in zip(ours, pub))
        worst = max(worst, dev)
        mark = "" if dev <= 5 else " DEVIATION"
        parts.append(f"b={z.beta0:g}: safe 0-{ours[0]} crit {ours[1]}-{ours[2]} vs published "
                     f"0-{pub[0]} {pub[1]}-{pub[2]}{mark}")
    ok = worst <= 5 and elapsed < 1.0
    return ok, f"max |diff|={worst} deg (tol 5), {elapsed:.3f} s; " + "; ".join(parts)


def crit_4_equilibrium_consistency():
    t0 = time.perf_counter()
    worst_res = 0.0
    worst_sum = 0.0
    n = 0
    w = PARAMS.link_weight
    for beta0 in range(1, 91):
        for phi0 in range(0, beta0):
            op = OperationPoint(float(beta0), float(phi0))
            sol = solve_equilibrium(op, PARAMS)
            r_z, r_y, r_tau = equilibrium_residuals(op, PARAMS, sol)
            f_scale = PARAMS.G_t + sol.T_sum + sol.f_e
            m_scale = sol.f_e * sol.l_e + w * sol.l_Ge + abs(sol.tau_sum_x)
            worst_res = max(worst_res, abs(r_z) / f_scale, abs(r_y) / f_scale, abs(r_tau) / m_scale)
            worst_sum = max(worst_sum, abs(2.0 * (sol.T_in + sol.T_out) - sol.T_sum) / sol.T_sum)
            n += 1
    elapsed = time.perf_counter() - t0
    ok = worst_res < 1e-9 and worst_sum <= 1e-12 and elapsed < 1.0
    return ok, f"{n} points, max rel residual {worst_res:.2e} (<1e-9), pair-sum rel {worst_sum:.2e} (<=1e-12), {elapsed:.3f} s"


def _scan_boundary(beta0, threshold, step=1e-4):
    # Exhaustive oracle: first grid angle whose outer-pair thrust reaches the threshold.
    phis = np.arange(0.0, beta0 - 0.5, step)
    t_out = equilibrium_grid(beta0, phis, PARAMS)["T_out"]
    hit = np.flatnonzero(t_out >= threshold)
    return phis[hit[0]] if hit.size else math.nan


def crit_5_oracle_equivalence():
    lim = calibrate_limits(PARAMS)
    t0 = time.perf_counter()
    worst = 0.0
    for beta0 in REFERENCE_BETAS:
        for thr in (lim.T_safe, lim.T_max):
            worst = max(worst, abs(thrust_boundary(beta0, thr, PARAMS) - _scan_boundary(beta0, thr)))
    elapsed = time.perf_counter() - t0
    ok = worst <= 2e-4 and elapsed < 5.0
    return ok, f"max |bisection - scan| = {worst:.2e} deg (tol 2e-4) over 10 boundaries, {elapsed:.2f} s"


SIM_SAFE_POINTS = ((10, 1), (30, 2), (30, 3), (60, 4), (60, 7), (80, 5), (80, 10), (90, 3), (90, 8), (90, 12))
SIM_FAILURE_POINTS = ((10, 5), (30, 14), (60, 30), (80, 42), (90, 50))


def crit_6_simulator_fixed_point():
    lim = calibrate_limits(PARAMS)
    cfg = SimConfig()
    t0 = time.perf_counter()
    worst = 0.0
    bad = []
    for b, p in SIM_SAFE_POINTS:
        op = OperationPoint(float(b), float(p))
        assert classify(op.beta0, op.phi0, PARAMS, lim).zone is Zone.SAFE
        res = run_to_equilibrium(op, PARAMS, lim, cfg)
        err = abs(res.f_n - contact_force(op, PARAMS)) / contact_force(op, PARAMS)
        worst = max(worst, err)
        if not res.converged or err > 0.02:
            bad.append(f"({b},{p}) converged={res.converged} err={err:.2%}")
    for b, p in SIM_FAILURE_POINTS:
        op = OperationPoint(float(b), float(p))
        assert classify(op.beta0, op.phi0, PARAMS, lim).zone is Zone.FAILURE
        res = run_to_equilibrium(op, PARAMS, lim, cfg)
        if res.saturation_events == 0 or res.reached_attitude:
            bad.append(f"failure point ({b},{p}) sat={res.saturation_events} reached={res.reached_attitude}")
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 60.0
    detail = f"safe: max f_n rel err {worst:.2e} (tol 2%); failure points saturate; {elapsed:.1f} s"
    return ok, detail + ("; " + "; ".join(bad) if bad else "")


def crit_7_gradient_check():
    rng = np.random.default_rng(7)
    h = 1e-4
    worst = 0.0
    for _ in range(100):
        beta0 = rng.uniform(5.0, 90.0)
        phi0 = rng.uniform(0.0, beta0 - 5.0)
        phi0 = max(phi0, h)
        analytic = contact_force_slope(OperationPoint(beta0, phi0), PARAMS)
        fd = (contact_force(OperationPoint(beta0, phi0 + h), PARAMS)
              - contact_force(OperationPoint(beta0, phi0 - h), PARAMS)) / (2 * h)
        worst = max(worst, abs(fd - analytic) / abs(analytic))
    return worst <= 1e-5, f"max rel diff {worst:.2e} on 100 random points (tol 1e-5)"


def crit_8_planner_protocol():
    lim = calibrate_limits(PARAMS)
    plan = build_plan(reference_grid(), PARAMS, lim, phi_u_mode="published")
    zones = [c.zone for c in plan.cases]
    n_safe = zones.count(Zone.SAFE)
    crit = plan.cases[n_safe:]
    checks = {
        "safe first": all(z is Zone.SAFE for z in zones[:n_safe]) and all(z is Zone.CRITICAL for z in zones[n_safe:]),
        "critical ascending": all(a.lam <= b.lam for a, b in zip(crit, crit[1:])),
        "failures excluded": all(c.zone is Zone.FAILURE for c in plan.excluded) and Zone.FAILURE not in zones,
        "tail ends at (60,15)": bool(crit) and (crit[-1].beta0, crit[-1].phi0) == (60.0, 15.0),
    }
    report = execute_plan(plan, lambda c: (c.beta0, c.phi0) != (60.0, 15.0))
    stop = report.stop_index
    checks["stops at (60,15)"] = stop is not None and (plan.cases[stop].beta0, plan.cases[stop].phi0) == (60.0, 15.0)
    checks["skips after stop"] = stop is not None and all(o is Outcome.SKIPPED for o in report.outcomes[stop + 1:]) \
        and all(o is Outcome.SUCCESS for o in report.outcomes[:stop])
    tail = ", ".join(f"({c.beta0:g},{c.phi0:g}) l={c.lam:.2f}" for c in crit)
    failed = [k for k, v in checks.items() if not v]
    detail = f"critical order: {tail}; excluded {len(plan.excluded)}"
    if failed:
        detail += "; failed sub-checks: " + ", ".join(failed)
    return not failed, detail


CRITERIA = [
    (1, "hover calibration", crit_1_hover_calibration),
    (2, "risk reproduction", crit_2_risk_reproduction),
    (3, "zone table vs published", crit_3_zone_table),
    (4, "equilibrium consistency", crit_4_equilibrium_consistency),
    (5, "bisection vs scan oracle", crit_5_oracle_equivalence),
    (6, "simulator fixed point", crit_6_simulator_fixed_point),
    (7, "gradient check", crit_7_gradient_check),
    (8, "planner protocol", crit_8_planner_protocol),
]


def _run(number, name, fn) -> tuple[bool, str]:
    ok, detail = fn()
    line = f"{'PASS' if ok else 'FAIL'} criterion {number} ({name}): {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    return ok, line


@pytest.mark.parametrize("number,name,fn", CRITERIA, ids=[f"criterion_{n}" for n, _, _ in CRITERIA])
def test_criterion(number, name, fn):
    ok, line = _run(number, name, fn)
    assert ok, line


if __name__ == "__main__":
    results = [_run(*c)[0] for c in CRITERIA]
    raise SystemExit(0 if all(results) else 1)
