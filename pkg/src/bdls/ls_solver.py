"""Finite-volume solver for the Lifshitz-Slyozov transport equation.

    d_t f + d_x[(a(x) u - b(x)) f] = 0,     u(t) + int x f(t, x) dx = m,

with inflow flux ``N(u)`` through ``x = 0``.  Cells are ``[(j-1) dx, j dx)``,
``j = 1..J``; interface ``j`` sits at ``x = j dx``.  The update is first-order
upwind with forward Euler, and ``u`` is recovered from the mass constraint
after every step rather than evolved.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Sequence

import numpy as np

from .errors import DomainError, RegimeExit, ValidationError
from .qssa import nucleation_rate
from .rates import NucleationRegime, RateFamily


@dataclass(frozen=True)
class LSState:
    """Cell averages ``f`` on a uniform grid together with ``u`` and the mass ``m``.

    ``escaped`` is the first moment carried out through ``x = x_max``; it
    stays in the mass balance so outflow does not feed back into ``u``.
    """

    t: float
    dx: float
    x_max: float
    f: np.ndarray
    u: float
    m: float
    escaped: float = 0.0

    def __post_init__(self):
        f = np.asarray(self.f, dtype=float)
        if f.ndim != 1 or f.size < 1:
            raise ValidationError("f must be a non-empty 1-d array")
        if not (self.dx > 0.0 and self.x_max > 0.0):
            raise ValidationError("dx and x_max must be positive")
        if not math.isclose(f.size * self.dx, self.x_max, rel_tol=1e-12):
            raise ValidationError("cells * dx must equal x_max")
        object.__setattr__(self, "f", f)

    @classmethod
    def on_grid(cls, x_max: float, cells: int, f, u: float, m: Optional[float] = None, t: float = 0.0):
        dx = x_max / cells
        st = cls(t=t, dx=dx, x_max=x_max, f=f, u=u, m=0.0 if m is None else m)
        if m is None:
            st = replace(st, m=u + st.first_moment())
        return st

    @property
    def cells(self) -> int:
        return self.f.size

    @property
    def centers(self) -> np.ndarray:
        return (np.arange(self.cells) + 0.5) * self.dx

    @property
    def interfaces(self) -> np.ndarray:
        return np.arange(self.cells + 1) * self.dx

    @property
    def edges(self) -> np.ndarray:
        return self.interfaces

    @property
    def heights(self) -> np.ndarray:
        return self.f

    def first_moment(self) -> float:
        return math.fsum(self.centers * self.f * self.dx)

    def total(self) -> float:
        return math.fsum(self.f) * self.dx

    @property
    def mass_residual(self) -> float:
        return self.u + self.first_moment() + self.escaped - self.m


class _Transport:
    """Interface velocities and fluxes for a fixed grid."""

    def __init__(self, fam: RateFamily, regime: NucleationRegime, dx: float, cells: int,
                 inflow: Optional[Callable[[float], float]] = None):
        self.fam = fam
        self.regime = regime
        self.x_if = np.arange(cells + 1) * dx
        self.a_if = fam.a(self.x_if)
        self.b_if = fam.b(self.x_if)
        self.inflow = inflow

    def velocity(self, u):
        return self.a_if * u - self.b_if

    def boundary_inflow(self, u) -> float:
        if self.inflow is not None:
            return float(self.inflow(u))
        return nucleation_rate(self.regime, self.fam, u)

    def fluxes(self, u, f):
        """Numerical fluxes at interfaces 0..J and the boundary rate used."""
        v = self.velocity(u)
        F = np.empty(v.size)
        right = v[1:-1] > 0.0
        F[1:-1] = np.where(right, v[1:-1] * f[:-1], v[1:-1] * f[1:])
        F[-1] = max(v[-1], 0.0) * f[-1]
        if u > self.regime.rho:
            N = self.boundary_inflow(u)
            F[0] = N
        else:
            N = 0.0
            F[0] = min(v[0], 0.0) * f[0]
        return F, N, v


def ls_rhs_flux(fam: RateFamily, regime: NucleationRegime, state: LSState, j: int,
                inflow: Optional[Callable[[float], float]] = None) -> float:
    """Numerical flux through interface ``j`` (``0 <= j <= J``)."""
    if not 0 <= j <= state.cells:
        raise DomainError(f"interface {j} outside 0..{state.cells}")
    tr = _Transport(fam, regime, state.dx, state.cells, inflow)
    F, _, _ = tr.fluxes(state.u, state.f)
    return float(F[j])


def _stable_dt(v, dx, cfl, dt_cap):
    vmax = float(np.max(np.abs(v)))
    if vmax == 0.0:
        return dt_cap
    return cfl * dx / vmax


def _advance(tr: _Transport, f, u, m, dx, dt, F):
    f_new = f - (dt / dx) * (F[1:] - F[:-1])
    # roundoff can leave -1e-17 where a cell was emptied exactly
    np.maximum(f_new, 0.0, out=f_new)
    return f_new


def _project(f, centers, dx, m, escaped=0.0):
    return m - escaped - math.fsum(centers * f * dx)


def ls_step(fam: RateFamily, regime: NucleationRegime, state: LSState, cfl: float = 0.9,
            dt_cap: float = 1e-2, dt: Optional[float] = None, frozen_u: bool = False,
            inflow: Optional[Callable[[float], float]] = None) -> LSState:
    """One forward-Euler upwind step followed by the mass projection of ``u``.

    Raises
    ------
    RegimeExit
        If ``u <= rho`` before the step or after the projection.
    """
    if not 0.0 < cfl <= 1.0:
        raise ValidationError("cfl must lie in (0, 1]")
    if state.u <= regime.rho:
        raise RegimeExit(f"u={state.u:.6g} <= rho={regime.rho:.6g} at t={state.t:.6g}", t=state.t)
    tr = _Transport(fam, regime, state.dx, state.cells, inflow)
    F, N, v = tr.fluxes(state.u, state.f)
    h = _stable_dt(v, state.dx, cfl, dt_cap)
    if dt is not None:
        h = min(h, dt)
    f_new = _advance(tr, state.f, state.u, state.m, state.dx, h, F)
    escaped = state.escaped + float(h * F[-1]) * state.x_max
    u_new = state.u if frozen_u else _project(f_new, state.centers, state.dx, state.m, escaped)
    if u_new <= regime.rho:
        raise RegimeExit(f"projected u={u_new:.6g} <= rho={regime.rho:.6g} at t={state.t + h:.6g}",
                         t=state.t + h)
    return LSState(t=state.t + h, dx=state.dx, x_max=state.x_max, f=f_new, u=u_new, m=state.m,
                   escaped=escaped)


@dataclass
class LSTrajectory:
    """Output of :func:`ls_solve`.

    ``states`` are the snapshots at the sample times reached; the per-step
    trace arrays (``t``, ``u``, ``N``, ``mass_residual``) include every full
    step.  With ``record_steps`` the step-start densities are kept in
    ``step_f`` (shape ``(n_steps, J)``) for weak-form quadrature.
    """

    states: List[LSState]
    t: np.ndarray
    u: np.ndarray
    N: np.ndarray
    mass_residual: np.ndarray
    exit_time: Optional[float] = None
    exit_message: str = ""
    step_t: Optional[np.ndarray] = None
    step_dt: Optional[np.ndarray] = None
    step_u: Optional[np.ndarray] = None
    step_N: Optional[np.ndarray] = None
    step_f: Optional[np.ndarray] = None
    initial: Optional[LSState] = None
    fam: Optional[RateFamily] = field(default=None, repr=False)
    frozen_u: bool = False

    @property
    def final(self) -> LSState:
        return self.states[-1]

    @property
    def exited(self) -> bool:
        return self.exit_time is not None

    def state_at(self, t: float) -> LSState:
        for st in self.states:
            if math.isclose(st.t, t, rel_tol=1e-12, abs_tol=1e-14):
                return st
        raise DomainError(f"no snapshot at t={t}")


def ls_solve(fam: RateFamily, regime: NucleationRegime, init: LSState, t_end: float,
             cfl: float = 0.9, sample_times: Optional[Sequence[float]] = None,
             dt_cap: float = 1e-2, frozen_u: bool = False,
             inflow: Optional[Callable[[float], float]] = None,
             record_steps: bool = False) -> LSTrajectory:
    """Integrate from ``init.t`` to ``t_end``.

    Parameters
    ----------
    init : LSState
        Cell averages of the initial measure, ``u_in`` and ``m``.
    frozen_u : bool
        Test mode: keep ``u = init.u`` instead of projecting.
    inflow : callable, optional
        Override for the boundary rate ``N(u)`` (test mode).
    record_steps : bool
        Keep every step-start density for :func:`weak_form_residual`.

    Notes
    -----
    On a regime exit the trajectory is truncated and ``exit_time`` holds the
    time ``T`` at which ``u`` reached ``rho``.
    """
    if not 0.0 < cfl <= 1.0:
        raise ValidationError("cfl must lie in (0, 1]")
    if not init.u > regime.rho:
        raise ValidationError(f"u_in={init.u:g} must exceed rho={regime.rho:g}")
    if sample_times is None:
        sample_times = [init.t, t_end]
    samples = sorted(set(float(s) for s in sample_times))
    if samples and (samples[0] < init.t - 1e-15 or samples[-1] > t_end + 1e-12):
        raise ValidationError("sample times must lie in [t0, t_end]")

    tr = _Transport(fam, regime, init.dx, init.cells, inflow)
    centers, dx, m = init.centers, init.dx, init.m
    f, u, t = init.f.copy(), float(init.u), float(init.t)
    escaped = float(init.escaped)
    states, tt, uu, NN, mr = [], [], [], [], []
    rec_t, rec_dt, rec_u, rec_N, rec_f = [], [], [], [], []

    def trace(t_, u_, f_, N_):
        tt.append(t_)
        uu.append(u_)
        NN.append(N_)
        mr.append(u_ + math.fsum(centers * f_ * dx) + escaped - m)

    _, N0, _ = tr.fluxes(u, f)
    trace(t, u, f, N0)
    exit_time, message = None, ""
    try:
        for target in samples:
            while t < target - 1e-15 * max(1.0, abs(target)):
                F, N, v = tr.fluxes(u, f)
                h = _stable_dt(v, dx, cfl, dt_cap)
                if t + h >= target:
                    h = target - t
                if record_steps:
                    rec_t.append(t); rec_dt.append(h); rec_u.append(u); rec_N.append(N); rec_f.append(f)
                f = _advance(tr, f, u, m, dx, h, F)
                escaped += float(h * F[-1]) * init.x_max
                t = target if t + h >= target else t + h
                if not frozen_u:
                    u = _project(f, centers, dx, m, escaped)
                _, N_new, _ = tr.fluxes(u, f) if u > regime.rho else (None, 0.0, None)
                trace(t, u, f, N_new)
                if u <= regime.rho:
                    raise RegimeExit(f"projected u={u:.6g} <= rho={regime.rho:.6g} at t={t:.6g}", t=t)
            states.append(LSState(t=t, dx=dx, x_max=init.x_max, f=f.copy(), u=u, m=m, escaped=escaped))
    except RegimeExit as exc:
        exit_time, message = exc.t, str(exc)
        states.append(LSState(t=t, dx=dx, x_max=init.x_max, f=f.copy(), u=max(u, 0.0), m=m,
                              escaped=escaped))

    arr = lambda v: np.asarray(v, dtype=float)
    return LSTrajectory(
        states=states, t=arr(tt), u=arr(uu), N=arr(NN), mass_residual=arr(mr),
        exit_time=exit_time, exit_message=message,
        step_t=arr(rec_t) if record_steps else None,
        step_dt=arr(rec_dt) if record_steps else None,
        step_u=arr(rec_u) if record_steps else None,
        step_N=arr(rec_N) if record_steps else None,
        step_f=np.array(rec_f) if record_steps else None,
        initial=init, fam=fam, frozen_u=frozen_u,
    )


# --------------------------------------------------------------------------- #
# weak form

@dataclass(frozen=True)
class SpaceTimeTest:
    """Test function ``phi(t, x)`` with its partial derivatives (vectorised)."""

    __test__ = False

    phi: Callable
    phi_t: Callable
    phi_x: Callable
    name: str = "phi"

    @classmethod
    def separable(cls, theta, theta_t, psi, psi_x, name="phi"):
        return cls(phi=lambda t, x: theta(t) * psi(x),
                   phi_t=lambda t, x: theta_t(t) * psi(x),
                   phi_x=lambda t, x: theta(t) * psi_x(x), name=name)

    @classmethod
    def zero(cls):
        z = lambda t, x: np.zeros(np.broadcast(np.asarray(t), np.asarray(x)).shape)
        return cls(phi=z, phi_t=z, phi_x=z, name="zero")


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(3)


def weak_form_residual(traj: LSTrajectory, test: SpaceTimeTest, regime: Optional[NucleationRegime] = None) -> float:
    """Left side of the weak formulation evaluated on a recorded trajectory.

    ``int int [phi_t + (a u - b) phi_x] f dx dt + int phi(0, x) f_in dx
    + int phi(s, 0) N(u(s)) ds``.  On each step ``f``, ``u`` and ``N`` are
    interpolated linearly between the step end points and integrated with
    Simpson's rule in time and 3-point Gauss per cell in space.  Requires
    ``record_steps=True``.
    """
    if traj.step_f is None:
        raise ValidationError("trajectory was solved without record_steps=True")
    fam = traj.fam
    init = traj.initial
    dx = init.dx
    edges = init.interfaces
    xq = 0.5 * (edges[:-1, None] + edges[1:, None]) + 0.5 * dx * _GL_NODES[None, :]
    wq = 0.5 * dx * _GL_WEIGHTS[None, :]
    a_q, b_q = fam.a(xq), fam.b(xq)
    n_steps = traj.step_t.size
    f_end = np.vstack((traj.step_f[1:], traj.final.f[None, :])) if n_steps else traj.step_f
    u_end = np.concatenate((traj.step_u[1:], [traj.final.u])) if n_steps else traj.step_u
    # trace entry k+1 is the state after step k
    N_end = traj.N[1:n_steps + 1]

    def density_term(t, u, f):
        g = (test.phi_t(t, xq) + (a_q * u - b_q) * test.phi_x(t, xq)) * wq
        return np.sum(f[:, None] * g)

    total = []
    for n in range(n_steps):
        t0, h = traj.step_t[n], traj.step_dt[n]
        f0, f1 = traj.step_f[n], f_end[n]
        u0, u1 = traj.step_u[n], u_end[n]
        N0, N1 = traj.step_N[n], N_end[n]
        tm = t0 + 0.5 * h
        total.append(h / 6.0 * (density_term(t0, u0, f0)
                                + 4.0 * density_term(tm, 0.5 * (u0 + u1), 0.5 * (f0 + f1))
                                + density_term(t0 + h, u1, f1)))
        total.append(h / 6.0 * (float(test.phi(t0, 0.0)) * N0 + 4.0 * float(test.phi(tm, 0.0)) * 0.5 * (N0 + N1)
                                + float(test.phi(t0 + h, 0.0)) * N1))
    total.append(np.sum(init.f[:, None] * test.phi(init.t, xq) * wq))
    return math.fsum(total)
