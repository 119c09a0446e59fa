"""Truncated, eps-rescaled Becker-Doring system.

The state is the monomer concentration ``u`` and the cluster vector
``c_i`` for ``i = 2..I_max``.  Fluxes are

    J_1 = alpha u**2 - eps**eta beta c_2
    J_i = a_i u c_i - b_{i+1} c_{i+1},   2 <= i < I_max

and ``J_{I_max} = 0`` (reflecting wall), so the truncated system conserves
``u + sum eps**2 i c_i`` exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .errors import DomainError, ValidationError
from .integrator import IntegratorConfig, dopri_step
from .rates import RateFamily, discrete_rates, rate_arrays

__all__ = [
    "BDState",
    "IntegratorConfig",
    "BDRhs",
    "flux",
    "rhs",
    "mass",
    "tail_indicator",
    "step",
    "integrate",
    "integrate_constant_monomer",
    "Trajectory",
    "default_i_max",
]


@dataclass(frozen=True)
class BDState:
    """Snapshot ``(t, eps, u, c)``; ``c[k]`` is the concentration of size ``k + 2``."""

    t: float
    eps: float
    u: float
    c: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        if c.ndim != 1 or c.size < 2:
            raise ValidationError("c must be a 1-d array covering at least sizes 2..3")
        if not self.eps > 0.0:
            raise ValidationError("eps must be positive")
        object.__setattr__(self, "c", c)

    @property
    def i_max(self) -> int:
        return self.c.size + 1

    @property
    def sizes(self) -> np.ndarray:
        return np.arange(2, self.i_max + 1)

    def cluster(self, i: int) -> float:
        if not 2 <= i <= self.i_max:
            raise DomainError(f"cluster index {i} outside 2..{self.i_max}")
        return float(self.c[i - 2])

    def as_vector(self) -> np.ndarray:
        return np.concatenate(([self.u], self.c))

    @classmethod
    def from_vector(cls, t, eps, y) -> "BDState":
        return cls(t=t, eps=eps, u=float(y[0]), c=np.array(y[1:], dtype=float))


def default_i_max(x_max: float, eps: float) -> int:
    """``ceil(x_max/eps) + ceil(0.5 x_max/eps)``: the window plus a transport buffer."""
    return int(math.ceil(x_max / eps) + math.ceil(0.5 * x_max / eps))


class BDRhs:
    """Vectorised right-hand side for a fixed ``(fam, eps, I_max)``.

    Called as ``f(t, y)`` with ``y = [u, c_2, ..., c_Imax]``.  With
    ``frozen_u`` the monomer derivative is forced to zero.
    """

    def __init__(self, fam: RateFamily, eps: float, i_max: int, frozen_u: bool = False):
        if i_max < 3:
            raise ValidationError("I_max must be >= 3")
        self.fam = fam
        self.eps = float(eps)
        self.i_max = int(i_max)
        self.frozen_u = frozen_u
        a, b = rate_arrays(fam, eps, i_max)
        self.a = a[:-1]            # a_i, i = 2..I_max-1
        self.b_next = b[1:]        # b_{i+1}, i = 2..I_max-1
        self.denuc = eps**fam.eta * fam.beta
        self.n_calls = 0

    def fluxes(self, u, c):
        """``J_1 .. J_{I_max-1}`` as an array of length ``I_max - 1``."""
        J = np.empty(self.i_max - 1)
        J[0] = self.fam.alpha * u * u - self.denuc * c[0]
        J[1:] = self.a * u * c[:-1] - self.b_next * c[1:]
        return J

    def __call__(self, t, y):
        self.n_calls += 1
        u = y[0]
        c = y[1:]
        J = self.fluxes(u, c)
        dy = np.empty_like(y)
        if self.frozen_u:
            dy[0] = 0.0
        else:
            dy[0] = -self.eps * (J[0] + np.sum(J))
        inv = 1.0 / self.eps
        dy[1:-1] = (J[:-1] - J[1:]) * inv
        dy[-1] = J[-1] * inv
        return dy


def flux(fam: RateFamily, state: BDState, i: int) -> float:
    """Flux ``J_i`` between sizes ``i`` and ``i + 1`` (``1 <= i <= I_max - 1``)."""
    if not 1 <= i <= state.i_max - 1:
        raise DomainError(f"flux index {i} outside 1..{state.i_max - 1}")
    if i == 1:
        return fam.alpha * state.u**2 - state.eps**fam.eta * fam.beta * state.c[0]
    a_i, _ = discrete_rates(fam, state.eps, i)
    _, b_next = discrete_rates(fam, state.eps, i + 1)
    return a_i * state.u * state.c[i - 2] - b_next * state.c[i - 1]


def rhs(fam: RateFamily, state: BDState):
    """Return ``(du, dc)`` for the truncated system."""
    f = BDRhs(fam, state.eps, state.i_max)
    dy = f(state.t, state.as_vector())
    return float(dy[0]), dy[1:]


def mass(state: BDState) -> float:
    """``u + sum_i eps**2 i c_i`` with correctly rounded summation."""
    eps2 = state.eps**2
    terms = eps2 * state.sizes * state.c
    return math.fsum(np.concatenate(([state.u], terms)))


def tail_indicator(state: BDState, fraction: float = 0.9) -> float:
    """Mass ``sum eps**2 i c_i`` carried by sizes ``i > fraction * I_max``."""
    sizes = state.sizes
    sel = sizes > fraction * state.i_max
    return math.fsum(state.eps**2 * sizes[sel] * state.c[sel])


def step(fam: RateFamily, state: BDState, cfg: IntegratorConfig, dt: Optional[float] = None,
         frozen_u: bool = False) -> BDState:
    """Advance ``state`` by one accepted adaptive step (trial size ``dt`` or ``cfg.dt_init``)."""
    f = BDRhs(fam, state.eps, state.i_max, frozen_u=frozen_u)
    y = state.as_vector()
    k1 = f(state.t, y)
    trial = min(cfg.dt_init if dt is None else dt, cfg.dt_max)
    t_new, y_new, _, _, _, _ = dopri_step(f, state.t, y, trial, k1, cfg)
    return BDState.from_vector(t_new, state.eps, y_new)


@dataclass
class Trajectory:
    """Sampled output of :func:`integrate`.

    ``traces`` maps a column name (``eps_eta_c2``, ``eps_ra_c2``, ...) to its
    per-sample values.  ``states`` holds the full snapshots.
    """

    t: np.ndarray
    u: np.ndarray
    mass: np.ndarray
    tail: np.ndarray
    traces: dict
    states: list
    n_steps: int = 0
    n_rejected: int = 0
    n_rhs: int = 0
    frozen_u: bool = False

    @property
    def final(self) -> BDState:
        return self.states[-1]

    def columns(self):
        cols = {"t": self.t, "u": self.u, "mass": self.mass, "tail": self.tail}
        cols.update(self.traces)
        return cols


def _trace_names(watch):
    return ["eps_eta_c2"] + [f"eps_ra_c{i}" for i in watch]


def _record(fam, state, watch, log):
    log["t"].append(state.t)
    log["u"].append(state.u)
    log["mass"].append(mass(state))
    log["tail"].append(tail_indicator(state))
    log["eps_eta_c2"].append(state.eps**fam.eta * state.c[0])
    for i in watch:
        log[f"eps_ra_c{i}"].append(state.eps**fam.r_a * state.c[i - 2])


def integrate(
    fam: RateFamily,
    state0: BDState,
    cfg: IntegratorConfig,
    sample_times: Optional[Sequence[float]] = None,
    observers: Iterable[Callable] = (),
    watch: Sequence[int] = (2, 3),
    frozen_u: bool = False,
    keep_states: bool = True,
) -> Trajectory:
    """Integrate from ``state0.t`` to ``cfg.t_end`` and sample.

    Parameters
    ----------
    sample_times : sequence of float, optional
        Output times in ``[state0.t, cfg.t_end]``; defaults to the two end
        points.  The integrator lands exactly on each of them.
    observers : iterable of callables
        Each is called as ``obs(state)`` at every sample.
    watch : sequence of int
        Sizes ``i`` whose ``eps**r_a c_i`` trace is recorded.
    """
    observers = list(observers)
    t0, t_end = state0.t, cfg.t_end
    if sample_times is None:
        sample_times = [t0, t_end] if t_end > t0 else [t0]
    samples = sorted(set(float(s) for s in sample_times))
    if samples and (samples[0] < t0 - 1e-15 or samples[-1] > t_end + 1e-15):
        raise ValidationError("sample times must lie in [t0, t_end]")
    watch = [int(i) for i in watch if 2 <= int(i) <= state0.i_max]

    f = BDRhs(fam, state0.eps, state0.i_max, frozen_u=frozen_u)
    y = state0.as_vector()
    if frozen_u:
        y[0] = state0.u
    t = t0
    log = {k: [] for k in ["t", "u", "mass", "tail", *_trace_names(watch)]}
    states = []

    def emit(tt, yy):
        st = BDState.from_vector(tt, state0.eps, yy)
        _record(fam, st, watch, log)
        if keep_states:
            states.append(st)
        for obs in observers:
            obs(st)

    k = f(t, y)
    dt = min(cfg.dt_init, cfg.dt_max)
    n_steps = n_rej = 0
    for target in samples:
        while t < target:
            remaining = target - t
            if remaining <= 1e-13 * max(1.0, abs(target)):
                t = target
                break
            trial = min(dt, cfg.dt_max)
            hit = trial >= remaining
            if hit:
                trial = remaining
            t_new, y, k, used, dt_next, rej = dopri_step(f, t, y, trial, k, cfg)
            n_steps += 1
            n_rej += rej
            t = target if (hit and used == remaining) else t_new
            # keep the proposed size when a sample time truncated the step
            dt = dt_next if not (hit and used == remaining) else max(dt, dt_next)
        emit(t, y)
    if not states and keep_states:
        states.append(BDState.from_vector(t, state0.eps, y))

    arr = {k2: np.asarray(v, dtype=float) for k2, v in log.items()}
    traces = {k2: arr[k2] for k2 in _trace_names(watch)}
    return Trajectory(
        t=arr["t"], u=arr["u"], mass=arr["mass"], tail=arr["tail"], traces=traces,
        states=states, n_steps=n_steps, n_rejected=n_rej, n_rhs=f.n_calls, frozen_u=frozen_u,
    )


def integrate_constant_monomer(
    fam: RateFamily,
    state0: BDState,
    u_fixed: float,
    cfg: IntegratorConfig,
    sample_times: Optional[Sequence[float]] = None,
    watch: Sequence[int] = (2, 3),
    keep_states: bool = True,
) -> Trajectory:
    """Integrate only the cluster equations with the monomer frozen at ``u_fixed``."""
    if not u_fixed > 0.0:
        raise ValidationError("u_fixed must be positive")
    start = replace(state0, u=float(u_fixed))
    return integrate(fam, start, cfg, sample_times=sample_times, watch=watch,
                     frozen_u=True, keep_states=keep_states)
