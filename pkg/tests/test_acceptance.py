"""Acceptance criteria 1 to 10.

Each test prints one ``criterion N: PASS|FAIL`` line (also repeated in the
terminal summary) and then asserts the criterion at its stated tolerance.
Run with ``pytest tests/test_acceptance.py -s`` to see the lines inline.
"""
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np
import pytest

from bdls import scenarios
from bdls.bd_system import BDState, IntegratorConfig, integrate, integrate_constant_monomer
from bdls.harness import (SweepPlan, boundary_identification, entropy_monitor, lemma65_check,
                          run_sweep)
from bdls.ls_solver import SpaceTimeTest, ls_solve, weak_form_residual
from bdls.qssa import small_cluster_profile
from bdls.rates import classify_regime

from conftest import ACCEPTANCE_LINES

pytestmark = pytest.mark.acceptance


def report(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    return ok


# --------------------------------------------------------------------------- #

def test_criterion_01_conservation():
    sc = scenarios.compensated_equal()
    eps = 0.05
    state = sc.bd_state(eps, sc.i_max(eps))
    t0 = time.perf_counter()
    traj = integrate(sc.fam, state, IntegratorConfig(t_end=1.0), sample_times=np.linspace(0.0, 1.0, 11))
    wall = time.perf_counter() - t0
    drift = float(np.max(np.abs(traj.mass - traj.mass[0])) / traj.mass[0])
    ok = drift < 1e-8 and wall < 60.0
    report(1, ok, f"relative mass drift {drift:.2e} (< 1e-8), I_max {state.i_max}, {wall:.1f} s")
    assert ok


# --------------------------------------------------------------------------- #

def test_criterion_02_qssa_oracle():
    eps, i_max = 0.01, 1000
    t0 = time.perf_counter()
    errors = {}
    for sc in (scenarios.slow(), scenarios.compensated_equal(), scenarios.compensated_unequal()):
        reg = classify_regime(sc.fam)
        u = 1.5 * reg.rho + 0.5
        prof = small_cluster_profile(reg, sc.fam, u, 10)
        traj = integrate_constant_monomer(sc.fam, BDState(0.0, eps, u, np.zeros(i_max - 1)), u,
                                          IntegratorConfig(t_end=5.0, rtol=1e-10, atol=1e-14))
        d = eps ** sc.fam.r_a * traj.final.c[:9]
        errors[sc.name] = float(np.max(np.abs(d / prof.d - 1.0)))
    wall = time.perf_counter() - t0
    ok = all(e < 1e-4 for e in errors.values()) and wall < 300.0
    detail = ", ".join(f"{k} {v:.1e}" for k, v in errors.items())
    report(2, ok, f"max rel error i=2..10: {detail} (< 1e-4), {wall:.1f} s")
    assert ok


# --------------------------------------------------------------------------- #

BOUNDARY_EPS = (0.04, 0.02, 0.01)
BOUNDARY_SCENARIOS = ("slow", "compensated_equal", "compensated_unequal", "fast")


def _boundary_error(job):
    name, eps = job
    sc = scenarios.ALL[name]
    traj = integrate(sc.fam, sc.bd_state(eps), IntegratorConfig(t_end=1.0),
                     sample_times=np.linspace(0.0, 1.0, 201), keep_states=False)
    return boundary_identification(traj, sc.fam, sc.regime, (0.0, 1.0)).summary


def test_criterion_03_boundary_identification():
    jobs = [(n, e) for n in BOUNDARY_SCENARIOS for e in BOUNDARY_EPS]
    t0 = time.perf_counter()
    with ProcessPoolExecutor(max_workers=4) as pool:
        errs = dict(zip(jobs, pool.map(_boundary_error, jobs)))
    wall = time.perf_counter() - t0
    ok = wall < 1800.0
    parts = []
    for n in BOUNDARY_SCENARIOS:
        seq = [errs[(n, e)] for e in BOUNDARY_EPS]
        ok &= all(b < a for a, b in zip(seq, seq[1:])) and seq[-1] < 0.05
        parts.append(f"{n} " + "/".join(f"{x:.2%}" for x in seq))
    report(3, ok, "; ".join(parts) + f" (decreasing, < 5% at 0.01), {wall:.1f} s")
    assert ok


# --------------------------------------------------------------------------- #

@pytest.fixture(scope="module")
def slow_sweep():
    sc = scenarios.slow()
    plan = SweepPlan(eps_list=(0.1, 0.05, 0.025), fam=sc.fam, initial=sc.initial, u_in=sc.u_in,
                     x_max=sc.x_max, t_samples=(0.0, 0.25, 0.5, 1.0), ls_cells=1600,
                     z_grid=(0.1, 0.2, 0.4), workers=3)
    t0 = time.perf_counter()
    rep = run_sweep(plan)
    return rep, time.perf_counter() - t0


def test_criterion_04_bd_to_ls(slow_sweep):
    rep, wall = slow_sweep
    D = rep.distance_matrix()[:, 1:]
    U = rep.u_sup()
    ok = (not rep.failures and bool(np.all(np.diff(D, axis=0) < 0.0)) and bool(np.all(np.diff(U) < 0.0))
          and wall < 1800.0)
    cols = "; ".join(f"t={t}: " + "/".join(f"{x:.4f}" for x in D[:, k])
                     for k, t in enumerate(rep.plan.t_samples[1:]))
    report(4, ok, f"distances {cols}; u_sup " + "/".join(f"{x:.1e}" for x in U) + f", {wall:.1f} s")
    assert ok


def test_criterion_05_laplace_monitor(slow_sweep):
    rep, _ = slow_sweep
    rho = classify_regime(rep.plan.fam).rho
    u_min = min(r.u_min for r in rep.results)
    L = rep.laplace_matrix((0.1, 0.2, 0.4))
    growth = L[1:] / L[:-1] - 1.0
    ok = u_min > rho + 0.1 and bool(np.all(growth < 0.10))
    report(5, ok, f"min u {u_min:.3f} (> rho+0.1 = {rho + 0.1:.2f}); max growth per halving "
                  f"{growth.max():.2%} (< 10%)")
    assert ok


# --------------------------------------------------------------------------- #

def test_criterion_06_ls_order():
    sc = scenarios.translation()
    grids = (100, 200, 400, 800)
    t0 = time.perf_counter()
    errs = []
    for J in grids:
        traj = ls_solve(sc.fam, sc.regime, sc.ls_state(J), 1.0, cfl=0.5, frozen_u=True, inflow=lambda u: 0.0)
        edges = np.linspace(0.0, sc.x_max, J + 1)
        exact = sc.initial.cell_averages(edges - sc.u_in * 1.0)
        errs.append(float(np.sum(np.abs(traj.final.f - exact)) * sc.x_max / J))
    wall = time.perf_counter() - t0
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    fit = -np.polyfit(np.log(np.array(grids, dtype=float)), np.log(errs), 1)[0]
    ok = bool(np.all((orders >= 0.8) & (orders <= 1.2))) and 0.8 <= fit <= 1.2 and wall < 60.0
    report(6, ok, "orders " + "/".join(f"{o:.3f}" for o in orders) + f", fitted {fit:.3f} (in [0.8, 1.2]), "
                  f"{wall:.1f} s")
    assert ok


# --------------------------------------------------------------------------- #

def _weak_tests(T, L):
    th = lambda t: (1.0 - t / T) ** 2
    tht = lambda t: -2.0 * (1.0 - t / T) / T
    inside = lambda x, g: np.where(x < L, g(x), 0.0)
    return [
        SpaceTimeTest.separable(th, tht, lambda x: inside(x, lambda y: (1 - (y / L) ** 2) ** 2),
                                lambda x: inside(x, lambda y: -4 * y / L ** 2 * (1 - (y / L) ** 2)), "poly"),
        SpaceTimeTest.separable(th, tht, lambda x: inside(x, lambda y: np.sin(np.pi * y / L) ** 2),
                                lambda x: inside(x, lambda y: np.pi / L * np.sin(2 * np.pi * y / L)), "sin2"),
        SpaceTimeTest.separable(th, tht, lambda x: inside(x, lambda y: np.cos(np.pi * y / (2 * L)) ** 2),
                                lambda x: inside(x, lambda y: -np.pi / (2 * L) * np.sin(np.pi * y / L)), "cos2"),
    ]


def test_criterion_07_weak_residual():
    sc = scenarios.slow()
    T = 1.0
    tests = _weak_tests(T, 3.0)
    t0 = time.perf_counter()
    res = []
    for J in (100, 200, 400, 800):
        traj = ls_solve(sc.fam, sc.regime, sc.ls_state(J), T, cfl=0.9, record_steps=True)
        res.append([abs(weak_form_residual(traj, t)) for t in tests])
    wall = time.perf_counter() - t0
    res = np.array(res)
    ratios = res[:-1] / res[1:]
    ok = bool(np.all(ratios >= 1.7)) and wall < 300.0
    report(7, ok, f"residual ratio per halving min {ratios.min():.3f} max {ratios.max():.3f} (>= 1.7), "
                  f"finest {res[-1].max():.1e}, {wall:.1f} s")
    assert ok


# --------------------------------------------------------------------------- #

def test_criterion_08_lemma():
    t0 = time.perf_counter()
    found = {}
    for r in (0.1, 0.3, 0.5, 0.7, 0.9):
        for frac in (0.25, 0.5, 0.9):
            found[(r, frac)] = lemma65_check(r, frac * (1.0 / r - 1.0), 100_000)
    wall = time.perf_counter() - t0
    ok = len(found) == 15 and wall < 60.0
    report(8, ok, f"I_0 found for 15/15 (r, delta), largest {max(found.values())}, {wall:.1f} s")
    assert ok


# --------------------------------------------------------------------------- #

def test_criterion_09_entropy():
    sc = replace(scenarios.compensated_equal(), x_max=8.0)
    eps, T = 0.02, 10.0
    traj = integrate(sc.fam, sc.bd_state(eps), IntegratorConfig(t_end=T), sample_times=np.linspace(0.0, T, 41))
    series = entropy_monitor(traj.states, 0.5, sc.fam.r_a, sc.fam)
    ok = series.bounded() and bool(np.all(np.isfinite(series.values))) and series.late_slope < 1e-3
    report(9, ok, f"C {series.C:.3f}, late slope {series.late_slope:.2e} per unit time (< 1e-3)")
    assert ok


# --------------------------------------------------------------------------- #

def test_criterion_10_property_suites():
    import test_properties as tp

    suites = (tp.test_metric_axioms, tp.test_bd_positivity, tp.test_ls_positivity,
              tp.test_rhs_matches_reference, tp.test_config_round_trip)
    t0 = time.perf_counter()
    failed = []
    for fn in suites:
        try:
            fn()
        except Exception as exc:  # report every suite before failing
            failed.append(f"{fn.__name__}: {type(exc).__name__}")
    wall = time.perf_counter() - t0
    ok = not failed and tp.N_CASES >= 1000 and wall < 300.0
    report(10, ok, f"{len(suites) - len(failed)}/{len(suites)} suites at {tp.N_CASES} cases, {wall:.1f} s"
                   + (f"; failed {failed}" if failed else ""))
    assert ok
