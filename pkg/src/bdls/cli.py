"""Command line entry point ``bdls``.

Exit codes: 0 success, 2 validation error, 3 stiffness error, 4 regime exit
of the LS solver (the exit time is printed).
"""
from __future__ import annotations

import argparse
import csv
import os
import sys
from typing import List, Optional

import numpy as np

from . import harness
from .bd_system import BDState, IntegratorConfig, default_i_max, integrate
from .config import RunConfig
from .errors import BDLSError, DomainError, OutOfRegimeError, StiffnessError, ValidationError
from .initial import InitialProfile
from .ls_solver import LSState, ls_solve
from .qssa import nucleation_rate, small_cluster_profile
from .rates import RateFamily, Regime, classify_regime
from .scaling import MONITOR_COLUMNS, monitor_rows, write_csv

EXIT_OK, EXIT_VALIDATION, EXIT_STIFF, EXIT_REGIME = 0, 2, 3, 4
RATE_KEYS = ("alpha", "beta", "a_bar", "b_bar", "r_a", "r_b", "eta")


def _rates(cfg: RunConfig) -> RateFamily:
    return RateFamily(**cfg.require_section("rates", RATE_KEYS))


def _read_table(path):
    with open(path) as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if rows and not _is_number(rows[0][0]):
        rows = rows[1:]
    data = np.array([[float(v) for v in r[:2]] for r in rows])
    return data[:, 0], data[:, 1]


def _is_number(s):
    try:
        float(s)
        return True
    except ValueError:
        return False


def _initial(cfg: RunConfig) -> InitialProfile:
    kind = cfg.get("initial", "kind")
    kw = {k: cfg.get("initial", k) for k in ("amplitude", "exponent", "center", "width", "cutoff", "upper")}
    if kind == "tabulated":
        x, f = _read_table(cfg.require("initial", "table"))
        kw.update(x_table=x, f_table=f)
    return InitialProfile(kind=kind, **kw)


def _integrator(cfg: RunConfig) -> IntegratorConfig:
    kw = {k: cfg.get("bd", k) for k in ("rtol", "atol", "dt_init", "dt_min", "t_end")}
    if cfg.has("bd", "dt_max"):
        kw["dt_max"] = cfg.get("bd", "dt_max")
    return IntegratorConfig(**kw)


def _echo(cfg: RunConfig, out: str, sections):
    text = cfg.resolved(sections).to_text()
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "config.resolved"), "w", newline="\n") as fh:
        fh.write(text)
    print(text)
    return text


def _times(t_end, n):
    return np.linspace(0.0, t_end, max(int(n), 2)) if t_end > 0.0 else np.array([0.0])


# --------------------------------------------------------------------------- #

def cmd_bd_run(cfg: RunConfig, out: str) -> int:
    fam = _rates(cfg)
    init = _initial(cfg)
    u_in = cfg.require("initial", "u_in")
    eps = cfg.require("bd", "eps")
    if not 0.0 < eps < 1.0:
        raise ValidationError("bd.eps must lie in (0, 1)")
    x_max = cfg.get("bd", "x_max")
    i_max = cfg.get("bd", "i_max") or default_i_max(x_max, eps)
    icfg = _integrator(cfg)
    if u_in < 0.0:
        raise ValidationError("initial.u_in must be nonnegative")
    _echo(cfg, out, ("rates", "initial", "bd", "output"))
    s0 = BDState(t=0.0, eps=eps, u=u_in, c=init.sample_bd(eps, i_max))
    watch = cfg.get("bd", "watch")
    times = _times(icfg.t_end, cfg.get("bd", "samples"))
    if cfg.has("bd", "u_fixed"):
        s0 = BDState(t=0.0, eps=eps, u=cfg.get("bd", "u_fixed"), c=s0.c)
    traj = integrate(fam, s0, icfg, sample_times=times, watch=watch, frozen_u=cfg.has("bd", "u_fixed"))
    cols = traj.columns()
    names = list(cols)
    write_csv(os.path.join(out, "trajectory.csv"), names, zip(*[cols[k] for k in names]))
    r_a = fam.r_a
    rows = monitor_rows(traj.states, r_a)
    write_csv(os.path.join(out, "monitor.csv"), MONITOR_COLUMNS, rows)
    if cfg.get("bd", "snapshots"):
        for k, st in enumerate(traj.states):
            write_csv(os.path.join(out, f"clusters_{k:04d}.csv"), ("i", "c_i"), zip(st.sizes, st.c))
    drift = abs(traj.mass[-1] - traj.mass[0]) / max(traj.mass[0], 1e-300)
    print(f"bd-run: {traj.n_steps} steps, {traj.n_rejected} rejected, relative mass drift {drift:.3e}")
    return EXIT_OK


def cmd_ls_run(cfg: RunConfig, out: str) -> int:
    fam = _rates(cfg)
    init = _initial(cfg)
    u_in = cfg.require("initial", "u_in")
    regime = classify_regime(fam)
    x_max, cells = cfg.get("ls", "x_max"), cfg.get("ls", "cells")
    t_end, cfl = cfg.get("ls", "t_end"), cfg.get("ls", "cfl")
    if cells < 1:
        raise ValidationError("ls.cells must be >= 1")
    _echo(cfg, out, ("rates", "initial", "ls", "output"))
    edges = np.linspace(0.0, x_max, cells + 1)
    st = LSState.on_grid(x_max, cells, init.cell_averages(edges), u_in)
    times = _times(t_end, cfg.get("ls", "samples"))
    traj = ls_solve(fam, regime, st, t_end, cfl=cfl, sample_times=times, dt_cap=cfg.get("ls", "dt_cap"))
    write_csv(os.path.join(out, "ls_trace.csv"), ("t", "u", "mass_residual", "N_of_u"),
              zip(traj.t, traj.u, traj.mass_residual, traj.N))
    for k, s in enumerate(traj.states):
        write_csv(os.path.join(out, f"ls_snapshot_{k:04d}.csv"), ("x", "f"), zip(s.centers, s.f))
    if traj.exited:
        print(f"ls-run: regime exit at T={traj.exit_time!r}")
        return EXIT_REGIME
    print(f"ls-run: reached t={traj.final.t!r}, u={traj.final.u!r}")
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, out: str) -> int:
    fam = _rates(cfg)
    init = _initial(cfg)
    u_in = cfg.require("initial", "u_in")
    eps_list = tuple(cfg.require("sweep", "eps_list"))
    t_samples = tuple(cfg.get("sweep", "t_samples"))
    window = None
    if cfg.has("sweep", "window_start") or cfg.has("sweep", "window_end"):
        window = (cfg.get("sweep", "window_start", 0.0), cfg.get("sweep", "window_end", max(t_samples)))
    icfg = _integrator(cfg)
    plan = harness.SweepPlan(
        eps_list=eps_list, fam=fam, initial=init, u_in=u_in, x_max=cfg.get("bd", "x_max"),
        t_samples=t_samples, ls_cells=cfg.get("sweep", "ls_cells"), cfl=cfg.get("ls", "cfl"),
        i_max_factor=cfg.get("sweep", "i_max_factor"), n_test=cfg.get("sweep", "n_test"),
        z_grid=tuple(cfg.get("sweep", "z_grid")), n_dense=cfg.get("sweep", "n_dense"),
        integrator=icfg, workers=cfg.get("sweep", "workers"), window=window,
        skip_fraction=cfg.get("sweep", "skip_fraction"), out_dir=out,
    )
    text = _echo(cfg, out, ("rates", "initial", "bd", "ls", "sweep", "output"))
    report = harness.run_sweep(plan, keep_trajectories=cfg.has("sweep", "delta"))
    if cfg.has("sweep", "delta"):
        delta = cfg.get("sweep", "delta")
        rows = []
        for r in report.successes:
            series = harness.entropy_monitor(r.trajectory.states, delta, fam.r_a)
            rows.extend((r.eps, t, v) for t, v in zip(series.t, series.values))
        write_csv(os.path.join(out, "entropy.csv"), ("eps", "t", "entropy"), rows)
    else:
        write_csv(os.path.join(out, "entropy.csv"), ("eps", "t", "entropy"), [])
    results = []
    if 0.0 < fam.r_a < 1.0 and cfg.has("sweep", "delta") and cfg.get("sweep", "delta") < 1.0 / fam.r_a - 1.0:
        results.append(harness.sign_scan(fam.r_a, cfg.get("sweep", "delta"), 10**5))
    harness.write_sign_scan(os.path.join(out, "lemma65.csv"), results)
    harness.write_meta(os.path.join(out, "meta"), text, fam,
                       {"launched": report.launched, "successes": len(report.successes),
                        "failures": len(report.failures), "ls_reference_cells": plan.reference_cells})
    for r in report.results:
        status = "ok" if r.ok else f"FAILED at t={r.failure_time!r}: {r.message}"
        print(f"eps={r.eps!r}: {status}")
    return EXIT_OK


def cmd_qssa(cfg: RunConfig, out: Optional[str], u: Optional[float], n: int) -> int:
    fam = _rates(cfg)
    regime = classify_regime(fam)
    u = cfg.require("initial", "u_in") if u is None else u
    prof = small_cluster_profile(regime, fam, u, n)
    N = nucleation_rate(regime, fam, u)
    H_i = np.append(prof.H_i, np.nan)
    lines = [f"# regime = {regime.label}, rho = {regime.rho!r}, u = {u!r}", f"# N(u) = {N!r}"]
    if regime.kind is Regime.FAST and fam.beta > 0.0:
        lines.append(f"# Gamma_2 density = {float(prof.d[0])!r}")
    lines.append("i,d_i,H_i")
    lines += [f"{i},{float(d)!r},{float(h)!r}" for i, d, h in zip(prof.sizes, prof.d, H_i)]
    text = "\n".join(lines) + "\n"
    print(text, end="")
    if out:
        os.makedirs(out, exist_ok=True)
        with open(os.path.join(out, "qssa.csv"), "w", newline="\n") as fh:
            fh.write(text)
    return EXIT_OK


def cmd_check_lemma(r: float, delta: float, i_max: int, out: Optional[str]) -> int:
    res = harness.sign_scan(r, delta, i_max)
    print(f"I_0 = {res.I0} (r={r!r}, delta={delta!r}, scanned up to {i_max})")
    if out:
        os.makedirs(out, exist_ok=True)
        harness.write_sign_scan(os.path.join(out, "lemma65.csv"), [res])
    return EXIT_OK


# --------------------------------------------------------------------------- #

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bdls", description="Becker-Doring / Lifshitz-Slyozov experiments")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, need_config=True):
        sp.add_argument("--config", required=need_config, help="run configuration file")
        sp.add_argument("--out", help="output directory (overrides [output] dir)")
        sp.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override a configuration value")

    for name in ("bd-run", "ls-run", "sweep"):
        common(sub.add_parser(name))
    q = sub.add_parser("qssa")
    common(q)
    q.add_argument("--u", type=float, help="monomer level (default: initial.u_in)")
    q.add_argument("--n", type=int, default=12, help="largest cluster size in the table")
    c = sub.add_parser("check-lemma")
    c.add_argument("--r", type=float, required=True)
    c.add_argument("--delta", type=float, required=True)
    c.add_argument("--i-max", type=int, default=10**5)
    c.add_argument("--out")
    return p


def _load(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    for item in args.set:
        cfg.set_override(item)
    return cfg


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "check-lemma":
            return cmd_check_lemma(args.r, args.delta, args.i_max, args.out)
        cfg = _load(args)
        out = args.out or cfg.get("output", "dir")
        if args.command == "bd-run":
            return cmd_bd_run(cfg, out)
        if args.command == "ls-run":
            return cmd_ls_run(cfg, out)
        if args.command == "sweep":
            return cmd_sweep(cfg, out)
        return cmd_qssa(cfg, args.out, args.u, args.n)
    except StiffnessError as exc:
        print(f"stiffness error: {exc}", file=sys.stderr)
        return EXIT_STIFF
    except (ValidationError, DomainError, OutOfRegimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except BDLSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
