"""Experiment orchestration: eps-sweeps against an LS reference, boundary-flux
identification, the sign scan of the entropy lemma and the entropy monitor.

Convergence is reported as raw distances per ``eps``; the harness never fits
a rate.  The limit is only known along subsequences, but the full
decreasing ``eps`` list is what gets run here.
"""
from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .bd_system import BDState, IntegratorConfig, Trajectory, integrate
from .errors import BDLSError, DomainError, ValidationError
from .initial import InitialProfile
from .ls_solver import LSState, LSTrajectory, ls_solve
from .qssa import d2_limit
from .rates import RateFamily, Regime, classify_regime
from .scaling import (DEFAULT_Z_GRID, TestFunctionFamily, check_entropy_delta, density_of,
                      entropy_functional, laplace, weak_star_distance, write_csv)

DEFAULT_SKIP_FRACTION = 0.1
SUBSEQUENCE_NOTE = ("convergence in the theory holds along subsequences; "
                    "this report runs the full decreasing eps list and cannot distinguish the two")


# --------------------------------------------------------------------------- #
# sweep

@dataclass(frozen=True)
class SweepPlan:
    """Everything an eps-sweep needs; immutable so workers can share it.

    ``ls_cells = None`` picks ``4 x_max / min(eps)`` cells.
    """

    eps_list: Tuple[float, ...]
    fam: RateFamily
    initial: InitialProfile
    u_in: float
    x_max: float
    t_samples: Tuple[float, ...]
    t_end: Optional[float] = None
    ls_cells: Optional[int] = None
    cfl: float = 0.9
    i_max_factor: float = 2.0
    n_test: int = 16
    z_grid: Tuple[float, ...] = DEFAULT_Z_GRID
    n_dense: int = 41
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    workers: int = 1
    window: Optional[Tuple[float, float]] = None
    skip_fraction: float = DEFAULT_SKIP_FRACTION
    out_dir: Optional[str] = None

    def __post_init__(self):
        eps = tuple(float(e) for e in self.eps_list)
        if not eps:
            raise ValidationError("eps_list must not be empty")
        if any(e <= 0.0 for e in eps):
            raise ValidationError("every eps must be positive")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ValidationError("eps_list must be strictly decreasing")
        object.__setattr__(self, "eps_list", eps)
        ts = tuple(sorted(float(t) for t in self.t_samples))
        if not ts or ts[0] < 0.0:
            raise ValidationError("t_samples must be nonempty and nonnegative")
        object.__setattr__(self, "t_samples", ts)
        if self.t_end is None:
            object.__setattr__(self, "t_end", ts[-1])
        if self.t_end < ts[-1]:
            raise ValidationError("t_end must cover every sample time")
        if self.workers < 1:
            raise ValidationError("workers must be >= 1")

    @property
    def reference_cells(self) -> int:
        if self.ls_cells is not None:
            return int(self.ls_cells)
        return int(math.ceil(4.0 * self.x_max / min(self.eps_list)))

    @property
    def dense_times(self) -> np.ndarray:
        grid = np.linspace(0.0, self.t_end, self.n_dense) if self.t_end > 0.0 else np.array([0.0])
        return np.unique(np.concatenate((grid, self.t_samples)))

    def test_family(self) -> TestFunctionFamily:
        return TestFunctionFamily.default(self.x_max, self.n_test)


@dataclass
class EpsResult:
    eps: float
    ok: bool
    failure_time: float = float("nan")
    message: str = ""
    distances: Dict[float, float] = field(default_factory=dict)
    u_sup: float = float("nan")
    laplace_sup: Dict[float, float] = field(default_factory=dict)
    initial_distance: float = float("nan")
    boundary: Optional["BoundaryTable"] = None
    u_min: float = float("nan")
    wall_time: float = 0.0
    trajectory: Optional[Trajectory] = None


@dataclass
class ConvergenceReport:
    """Per-eps distances, monomer deviations, boundary tables and Laplace sups."""

    plan: SweepPlan
    results: List[EpsResult]
    reference: LSTrajectory

    @property
    def launched(self) -> int:
        return len(self.results)

    @property
    def failures(self) -> List[EpsResult]:
        return [r for r in self.results if not r.ok]

    @property
    def successes(self) -> List[EpsResult]:
        return [r for r in self.results if r.ok]

    def distance_matrix(self) -> np.ndarray:
        """Shape ``(n_eps, n_t)``; NaN for failed runs."""
        return np.array([[r.distances.get(t, np.nan) for t in self.plan.t_samples] for r in self.results])

    def u_sup(self) -> np.ndarray:
        return np.array([r.u_sup for r in self.results])

    def laplace_matrix(self, z_grid: Optional[Sequence[float]] = None) -> np.ndarray:
        z_grid = self.plan.z_grid if z_grid is None else z_grid
        return np.array([[r.laplace_sup.get(z, np.nan) for z in z_grid] for r in self.results])

    def report_rows(self):
        rows = []
        for r in self.results:
            status = "ok" if r.ok else "failed"
            for t in self.plan.t_samples:
                rows.append((r.eps, t, r.distances.get(t, float("nan")), r.u_sup, status,
                             r.failure_time, r.message))
        return rows

    def write(self, out_dir: Optional[str] = None):
        out_dir = out_dir or self.plan.out_dir
        if out_dir is None:
            raise ValidationError("no output directory given")
        os.makedirs(out_dir, exist_ok=True)
        write_csv(os.path.join(out_dir, "report.csv"),
                  ("eps", "t", "distance", "u_sup", "status", "failure_time", "message"), self.report_rows())
        brows = []
        for r in self.results:
            if r.boundary is not None:
                for t, meas, pred, err in zip(r.boundary.t, r.boundary.measured, r.boundary.predicted,
                                              r.boundary.rel_error):
                    brows.append((r.eps, t, meas, pred, err))
        write_csv(os.path.join(out_dir, "boundary.csv"), ("eps", "t", "measured", "predicted", "rel_error"), brows)
        lrows = [(r.eps, z, v) for r in self.results for z, v in r.laplace_sup.items()]
        write_csv(os.path.join(out_dir, "laplace.csv"), ("eps", "z", "sup_F"), lrows)
        return out_dir


def _run_one(plan: SweepPlan, eps: float, ref_u_t, ref_u, ref_states, keep: bool = False) -> EpsResult:
    """Worker body; module level so it pickles."""
    start = time.perf_counter()
    regime = classify_regime(plan.fam)
    res = EpsResult(eps=eps, ok=True)
    n = int(round(plan.i_max_factor * plan.x_max / eps))
    state0 = BDState(t=0.0, eps=eps, u=plan.u_in, c=plan.initial.sample_bd(eps, n))
    cfg = IntegratorConfig(rtol=plan.integrator.rtol, atol=plan.integrator.atol,
                           dt_init=plan.integrator.dt_init, dt_min=plan.integrator.dt_min,
                           t_end=plan.t_end, dt_max=plan.integrator.dt_max)
    tests = plan.test_family()
    sup_F = {z: -math.inf for z in plan.z_grid}

    def watch_laplace(st):
        for z in plan.z_grid:
            sup_F[z] = max(sup_F[z], laplace(st, z, plan.fam.r_a))

    times = plan.dense_times
    try:
        traj = integrate(plan.fam, state0, cfg, sample_times=times, observers=[watch_laplace])
    except BDLSError as exc:
        res.ok = False
        res.failure_time = float(getattr(exc, "t", float("nan")))
        res.message = f"{type(exc).__name__}: {exc}"
        res.wall_time = time.perf_counter() - start
        return res
    by_t = {st.t: st for st in traj.states}
    for t, ref in zip(plan.t_samples, ref_states):
        st = by_t[min(by_t, key=lambda s: abs(s - t))]
        res.distances[t] = weak_star_distance(density_of(st), ref, tests)
    res.initial_distance = res.distances.get(plan.t_samples[0], float("nan"))
    res.u_sup = float(np.max(np.abs(traj.u - np.interp(traj.t, ref_u_t, ref_u))))
    res.u_min = float(np.min(traj.u))
    res.laplace_sup = dict(sup_F)
    window = plan.window or (0.0, plan.t_end)
    if window[1] > window[0]:
        try:
            res.boundary = boundary_identification(traj, plan.fam, regime, window, plan.skip_fraction)
        except BDLSError as exc:
            res.message = f"boundary identification skipped: {exc}"
    res.trajectory = traj if keep else None
    res.wall_time = time.perf_counter() - start
    return res


def run_sweep(plan: SweepPlan, keep_trajectories: bool = False) -> ConvergenceReport:
    """Run BD at every ``eps`` and compare it with one fine LS reference.

    Failed runs (stiffness, out-of-regime) are kept as failure rows with
    their failure time.  Results are assembled in ``eps_list`` order
    whatever the completion order of the workers.
    """
    regime = classify_regime(plan.fam)
    ref_init = LSState.on_grid(plan.x_max, plan.reference_cells,
                               plan.initial.cell_averages(np.linspace(0.0, plan.x_max, plan.reference_cells + 1)),
                               plan.u_in)
    ref = ls_solve(plan.fam, regime, ref_init, plan.t_end, cfl=plan.cfl, sample_times=plan.t_samples)
    if ref.exited:
        raise ValidationError(f"LS reference left the regime at T={ref.exit_time:g}; shorten t_end")
    args = (ref.t, ref.u, ref.states, keep_trajectories)
    if plan.workers > 1 and len(plan.eps_list) > 1:
        with ProcessPoolExecutor(max_workers=plan.workers) as pool:
            futures = [pool.submit(_run_one, plan, eps, *args) for eps in plan.eps_list]
            results = [f.result() for f in futures]
    else:
        results = [_run_one(plan, eps, *args) for eps in plan.eps_list]
    report = ConvergenceReport(plan=plan, results=results, reference=ref)
    if plan.out_dir:
        report.write()
    return report


# --------------------------------------------------------------------------- #
# boundary identification

@dataclass
class BoundaryTable:
    """Measured against predicted small-cluster quantity over a window.

    Slow and compensated regimes compare ``eps**r_a c_2`` with
    ``d2_limit(u(t))`` sample by sample; the fast regime compares the
    window averages of ``eps**eta beta c_2`` and ``alpha u**2`` and stores
    the single relative error in ``summary``.
    """

    t: np.ndarray
    measured: np.ndarray
    predicted: np.ndarray
    rel_error: np.ndarray
    summary: float
    kind: str


def boundary_identification(traj: Trajectory, fam: RateFamily, regime, window: Tuple[float, float],
                            skip_fraction: float = DEFAULT_SKIP_FRACTION) -> BoundaryTable:
    t0, t1 = float(window[0]), float(window[1])
    if not t1 > t0:
        raise ValidationError("window must have positive length")
    if not 0.0 <= skip_fraction < 1.0:
        raise ValidationError("skip_fraction must lie in [0, 1)")
    start = t0 + skip_fraction * (t1 - t0)
    sel = (traj.t >= start - 1e-12) & (traj.t <= t1 + 1e-12)
    if np.count_nonzero(sel) < 2:
        raise ValidationError("window holds fewer than two samples after the transient skip")
    t = traj.t[sel]
    u = traj.u[sel]
    if regime.kind is Regime.FAST and fam.beta > 0.0:
        meas = fam.beta * traj.traces["eps_eta_c2"][sel]
        pred = fam.alpha * u * u
        avg_m = np.trapezoid(meas, t) / (t[-1] - t[0])
        avg_p = np.trapezoid(pred, t) / (t[-1] - t[0])
        err = abs(avg_m - avg_p) / avg_p
        return BoundaryTable(t, meas, pred, np.abs(meas / pred - 1.0), float(err), "window_average")
    if "eps_ra_c2" not in traj.traces:
        raise ValidationError("trajectory does not carry the eps**r_a c_2 trace")
    meas = traj.traces["eps_ra_c2"][sel]
    pred = np.array([d2_limit(regime, fam, float(x)) for x in u])
    rel = np.abs(meas / pred - 1.0)
    return BoundaryTable(t, meas, pred, rel, float(np.median(rel)), "pointwise_median")


# --------------------------------------------------------------------------- #
# sign scan of the entropy lemma

X_GRID_POINTS = 101


def _expm1_minus_x(x):
    """``exp(x) - 1 - x`` without cancellation for small ``x``."""
    x = np.asarray(x, dtype=float)
    # Horner form of x**2/2! + x**3/3! + ... up to x**13 (|x| < 0.1)
    acc = np.ones_like(x)
    for k in range(13, 2, -1):
        acc = 1.0 + acc * x / k
    series = 0.5 * x * x * acc
    return np.where(np.abs(x) < 0.1, series, np.expm1(x) - x)


def sign_expression(i, x, r: float, delta: float):
    """``i**r ((i+1/2+x)**(r d) - (i-1/2+x)**(r d)) - d (i**r - (i-1)**r) (i-1/2+x)**(r d)``.

    With ``y = i - 1/2 + x`` this is ``y**(r d) i**r [expm1(A) + d expm1(B)]``,
    ``A = r d log1p(1/y)``, ``B = r log1p(-1/i)``.  The first-order parts
    cancel, so ``A + d B = r d log1p(-(1/2 + x) / (y i))`` is taken in closed
    form and only the second-order remainders are added.
    """
    i = np.asarray(i, dtype=float)
    x = np.asarray(x, dtype=float)
    y = i - 0.5 + x
    A = r * delta * np.log1p(1.0 / y)
    B = r * np.log1p(-1.0 / i)
    first = r * delta * np.log1p(-(0.5 + x) / (y * i))
    return y ** (r * delta) * i ** r * (first + _expm1_minus_x(A) + delta * _expm1_minus_x(B))


def check_sign_params(r: float, delta: float):
    if not 0.0 < r < 1.0:
        raise DomainError("r must lie in (0, 1)")
    if not 0.0 < delta < 1.0 / r - 1.0:
        raise DomainError(f"delta={delta} outside (0, 1/r - 1) = (0, {1.0 / r - 1.0:g})")


@dataclass
class SignScanResult:
    r: float
    delta: float
    i_scan_max: int
    I0: int
    max_value: float


def sign_scan(r: float, delta: float, i_scan_max: int, chunk: int = 8192) -> SignScanResult:
    """Smallest ``I_0`` with the expression ``<= 0`` on ``[I_0, i_scan_max] x`` grid."""
    check_sign_params(r, delta)
    if i_scan_max < 2:
        raise DomainError("i_scan_max must be >= 2")
    x = np.linspace(0.0, 1.0, X_GRID_POINTS)
    last_pos = 1
    for lo in range(2, i_scan_max + 1, chunk):
        i = np.arange(lo, min(lo + chunk, i_scan_max + 1))
        worst = sign_expression(i[:, None], x[None, :], r, delta).max(axis=1)
        pos = np.flatnonzero(worst > 0.0)
        if pos.size:
            last_pos = int(i[pos[-1]])
    I0 = last_pos + 1
    if I0 > i_scan_max:
        raise BDLSError(f"no I_0 <= {i_scan_max} found for r={r}, delta={delta}")
    tail = np.arange(I0, min(I0 + chunk, i_scan_max + 1))
    mx = float(sign_expression(tail[:, None], x[None, :], r, delta).max())
    return SignScanResult(r, delta, i_scan_max, I0, mx)


def lemma65_check(r: float, delta: float, i_scan_max: int) -> int:
    return sign_scan(r, delta, i_scan_max).I0


# --------------------------------------------------------------------------- #
# entropy monitor

@dataclass
class EntropySeries:
    t: np.ndarray
    values: np.ndarray
    C: float
    late_slope: float

    def bounded(self, C_max: float = 10.0) -> bool:
        return bool(self.C <= C_max)


def entropy_monitor(states: Sequence[BDState], delta: float, r_a: float,
                    fam: Optional[RateFamily] = None) -> EntropySeries:
    """Entropy series over snapshots.

    ``C = max_t E(t) / (E(0) + 1)`` and the least-squares slope over the
    second half of the samples are reported.
    """
    if fam is not None and not fam.equal_exponents:
        raise ValidationError("the entropy monitor needs r_a = r_b")
    check_entropy_delta(delta, r_a)
    t = np.array([s.t for s in states], dtype=float)
    E = np.array([entropy_functional(density_of(s), delta, r_a) for s in states])
    C = float(np.max(E) / (E[0] + 1.0)) if E.size else 0.0
    half = E.size // 2
    if E.size - half >= 2 and t[-1] > t[half]:
        slope = float(np.polyfit(t[half:], E[half:], 1)[0])
    else:
        slope = 0.0
    return EntropySeries(t=t, values=E, C=C, late_slope=slope)


def write_entropy(path, series: EntropySeries):
    write_csv(path, ("t", "entropy"), zip(series.t, series.values))


def write_sign_scan(path, results: Sequence[SignScanResult]):
    write_csv(path, ("r", "delta", "i_scan_max", "I0", "max_value_from_I0"),
              [(x.r, x.delta, x.i_scan_max, x.I0, x.max_value) for x in results])


def write_meta(path, text: str, fam: RateFamily, extras: Optional[dict] = None):
    reg = classify_regime(fam)
    lines = ["# " + SUBSEQUENCE_NOTE, f"regime = {reg.label}", f"rho = {reg.rho!r}"]
    if fam.zero_tail_fragmentation:
        lines.append("note = b_bar = 0 with beta > 0: configuration outside the theory")
    for k, v in (extras or {}).items():
        lines.append(f"{k} = {v}")
    lines.append("")
    lines.append(text)
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
