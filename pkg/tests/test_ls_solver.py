import math

import numpy as np
import pytest

from bdls import scenarios
from bdls.errors import DomainError, RegimeExit, ValidationError
from bdls.initial import InitialProfile
from bdls.ls_solver import (
    LSState, SpaceTimeTest, _stable_dt, ls_rhs_flux, ls_solve, ls_step, weak_form_residual,
)
from bdls.rates import RateFamily, classify_regime


def fam(**kw):
    base = dict(alpha=1.0, beta=1.0, a_bar=1.0, b_bar=0.5, r_a=0.5, r_b=0.5, eta=1.0)
    base.update(kw)
    return RateFamily(**base)


def grid_state(f, x_max=4.0, cells=40, u=1.0, m=None):
    return LSState.on_grid(x_max, cells, np.asarray(f, dtype=float), u, m)


def test_state_mass_bookkeeping():
    st = grid_state(np.ones(40), u=0.5)
    assert st.m == pytest.approx(0.5 + 8.0)
    assert st.mass_residual == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(ValidationError):
        LSState(t=0.0, dx=0.1, x_max=4.0, f=np.ones(39), u=1.0, m=1.0)


def test_interior_upwind_and_boundaries():
    f_ = fam()
    reg = classify_regime(f_)
    rng = np.random.default_rng(0)
    st = grid_state(rng.uniform(0, 1, 40), u=1.0)
    j = 10
    v = f_.a(j * st.dx) * st.u - f_.b(j * st.dx)
    assert v > 0
    assert ls_rhs_flux(f_, reg, st, j) == pytest.approx(v * st.f[j - 1], rel=1e-15)
    assert ls_rhs_flux(f_, reg, st, 0) == pytest.approx(f_.alpha * st.u**2)
    vJ = f_.a(4.0) * st.u - f_.b(4.0)
    assert ls_rhs_flux(f_, reg, st, 40) == pytest.approx(max(vJ, 0.0) * st.f[-1])
    with pytest.raises(DomainError):
        ls_rhs_flux(f_, reg, st, 41)


def test_upwind_from_the_right_when_velocity_negative():
    f_ = fam(r_b=0.9, b_bar=3.0, eta=0.5)
    reg = classify_regime(f_)
    st = grid_state(np.linspace(1, 2, 40), u=1.0)
    j = 35
    v = f_.a(j * st.dx) - f_.b(j * st.dx)
    assert v < 0
    assert ls_rhs_flux(f_, reg, st, j) == pytest.approx(v * st.f[j], rel=1e-15)


def test_fast_regime_no_inflow():
    f_ = fam(eta=0.0)
    st = grid_state(np.zeros(40), u=1.5)
    assert ls_rhs_flux(f_, classify_regime(f_), st, 0) == 0.0
    traj = ls_solve(f_, classify_regime(f_), st, 1.0)
    assert not np.any(traj.final.f) and traj.final.u == 1.5


def test_single_step_inflow_fills_first_cell():
    f_ = fam()
    reg = classify_regime(f_)
    st = grid_state(np.zeros(40), u=1.2)
    nxt = ls_step(f_, reg, st, cfl=0.5)
    dt = nxt.t
    assert nxt.f[0] == pytest.approx(dt * f_.alpha * 1.2**2 / st.dx, rel=1e-14)
    assert not np.any(nxt.f[1:])
    v = f_.a(st.interfaces) * 1.2 - f_.b(st.interfaces)
    assert dt == pytest.approx(0.5 * st.dx / np.max(np.abs(v)), rel=1e-14)


def test_regime_exit_at_threshold():
    f_ = fam(eta=0.5)
    reg = classify_regime(f_)
    st = grid_state(np.zeros(40), u=reg.rho)
    with pytest.raises(RegimeExit) as info:
        ls_step(f_, reg, st)
    assert info.value.t == 0.0
    with pytest.raises(ValidationError):
        ls_solve(f_, reg, st, 1.0)


def test_degenerate_cfl_uses_cap():
    assert _stable_dt(np.zeros(5), 0.1, 0.9, 0.25) == 0.25
    assert _stable_dt(np.array([0.0, 2.0]), 0.1, 0.5, 0.25) == pytest.approx(0.025)


def test_trajectory_exit_reported():
    sc = scenarios.compensated_equal()
    traj = ls_solve(sc.fam, sc.regime, sc.ls_state(200), 40.0, sample_times=[0.0, 10.0, 40.0])
    assert traj.exited
    assert 10.0 < traj.exit_time < 40.0
    assert traj.final.t == traj.exit_time
    assert traj.u[-1] <= sc.regime.rho
    assert np.all(traj.u[:-1] > sc.regime.rho)


def test_mass_residual_stays_at_roundoff_with_outflow():
    # speed u, rho = 0, weak inflow; a bump next to x_max leaves the window
    f_ = scenarios.translation().fam.with_params(alpha=0.01)
    init = InitialProfile("gaussian", center=1.6, width=0.1)
    st = LSState.on_grid(2.0, 200, init.cell_averages(np.linspace(0, 2, 201)), 3.0)
    traj = ls_solve(f_, classify_regime(f_), st, 1.0)
    assert not traj.exited
    assert traj.final.escaped > 0.5 * (st.m - st.u)
    assert np.max(np.abs(traj.mass_residual)) < 1e-12
    assert abs(traj.final.mass_residual) < 1e-12


def test_t_end_zero_returns_init():
    sc = scenarios.slow()
    init = sc.ls_state(100)
    traj = ls_solve(sc.fam, sc.regime, init, 0.0, sample_times=[0.0])
    assert len(traj.states) == 1
    np.testing.assert_array_equal(traj.final.f, init.f)
    assert traj.final.u == init.u


def test_zero_start_slow_number_matches_inflow_integral():
    f_ = fam(alpha=0.5)
    reg = classify_regime(f_)
    errs = []
    for cells in (100, 200, 400):
        st = grid_state(np.zeros(cells), x_max=4.0, cells=cells, u=1.0)
        traj = ls_solve(f_, reg, st, 1.0)
        number = float(np.sum(traj.final.f) * st.dx)
        # left-endpoint rule matches forward Euler's use of N at the step start
        inflow = math.fsum(np.diff(traj.t) * f_.alpha * traj.u[:-1] ** 2)
        assert number == pytest.approx(inflow, rel=1e-12)
        exact_like = np.trapezoid(f_.alpha * traj.u**2, traj.t)
        errs.append(abs(number - exact_like))
    assert errs[2] < errs[1] < errs[0]


def test_scaling_linearity_frozen_u():
    f_ = fam(b_bar=0.0, r_a=0.0, r_b=0.0)
    reg = classify_regime(f_)
    init = InitialProfile("gaussian", center=1.0, width=0.3)
    edges = np.linspace(0, 4, 201)
    base = LSState.on_grid(4.0, 200, init.cell_averages(edges), 1.0)
    lam = 3.7
    scaled = LSState.on_grid(4.0, 200, lam * base.f, 1.0, m=lam * base.m)
    kw = dict(frozen_u=True, inflow=lambda u: 0.0, sample_times=[0.0, 0.5, 1.0])
    a = ls_solve(f_, reg, base, 1.0, **kw)
    b = ls_solve(f_, reg, scaled, 1.0, **kw)
    for sa, sb in zip(a.states, b.states):
        np.testing.assert_allclose(sb.f, lam * sa.f, rtol=1e-13, atol=1e-300)


def test_cfl_validated():
    sc = scenarios.slow()
    with pytest.raises(ValidationError):
        ls_solve(sc.fam, sc.regime, sc.ls_state(50), 1.0, cfl=1.5)


def test_weak_residual_zero_test_function():
    sc = scenarios.slow()
    traj = ls_solve(sc.fam, sc.regime, sc.ls_state(100), 0.5, record_steps=True)
    assert weak_form_residual(traj, SpaceTimeTest.zero()) == 0.0
    plain = ls_solve(sc.fam, sc.regime, sc.ls_state(100), 0.5)
    with pytest.raises(ValidationError):
        weak_form_residual(plain, SpaceTimeTest.zero())


def test_weak_residual_translation_small():
    sc = scenarios.translation()
    T, L = 1.0, 3.5
    test = SpaceTimeTest.separable(
        lambda t: (T - t) ** 2 if np.isscalar(t) else (T - np.asarray(t)) ** 2,
        lambda t: -2.0 * (T - np.asarray(t)),
        lambda x: np.where(np.asarray(x) < L, np.sin(np.pi * np.asarray(x) / L) ** 2, 0.0),
        lambda x: np.where(np.asarray(x) < L, np.pi / L * np.sin(2 * np.pi * np.asarray(x) / L), 0.0),
    )
    traj = ls_solve(sc.fam, sc.regime, sc.ls_state(400), T, frozen_u=True,
                    inflow=lambda u: 0.0, record_steps=True)
    assert abs(weak_form_residual(traj, test)) < 1e-3
