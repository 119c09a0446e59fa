"""Dormand-Prince 5(4) embedded pair with positivity-guarding rejection.

Only the single-step kernel lives here; drivers (sampling, observers) are in
:mod:`bdls.bd_system`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import StiffnessError, ValidationError

# Dormand & Prince (1980), FSAL
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4

_SAFETY = 0.9
_GROW_MAX = 5.0
_SHRINK_MIN = 0.2
_MAX_REJECTS = 200


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances and step limits for the adaptive integrator."""

    rtol: float = 1e-8
    atol: float = 1e-12
    dt_init: float = 1e-4
    dt_min: float = 1e-12
    t_end: float = 1.0
    dt_max: float = float("inf")

    def __post_init__(self):
        if not (0.0 < self.rtol < 1.0 and 0.0 < self.atol < 1.0):
            raise ValidationError("rtol and atol must lie in (0, 1)")
        if not (self.dt_init > 0.0 and self.dt_min > 0.0):
            raise ValidationError("dt_init and dt_min must be positive")
        if self.dt_min > self.dt_init:
            raise ValidationError("dt_min must not exceed dt_init")
        if self.t_end < 0.0:
            raise ValidationError("t_end must be nonnegative")
        if not self.dt_max > 0.0:
            raise ValidationError("dt_max must be positive")


def dopri_step(f, t, y, dt, k1, cfg: IntegratorConfig):
    """Take one accepted step starting with trial size ``dt``.

    Parameters
    ----------
    f : callable
        ``f(t, y) -> dy``.
    k1 : ndarray
        ``f(t, y)`` (first-same-as-last reuse).

    Returns
    -------
    t_new, y_new, k_new, dt_used, dt_next, n_rejected
    """
    n_rej = 0
    bad = -1
    while True:
        if dt < cfg.dt_min:
            comp = bad
            raise StiffnessError(
                f"step size {dt:.3e} fell below dt_min={cfg.dt_min:.3e} at t={t:.6g} "
                f"(component {comp})", t=t, component=comp,
            )
        ks = [k1]
        for s in range(1, 7):
            acc = y.copy()
            for coef, k in zip(_A[s], ks):
                if coef != 0.0:
                    acc += (dt * coef) * k
            if s == 6:
                y_new = acc
            ks.append(f(t + _C[s] * dt, acc))
        err = np.zeros_like(y)
        for coef, k in zip(_E, ks):
            if coef != 0.0:
                err += (dt * coef) * k
        scale = cfg.atol + cfg.rtol * np.maximum(np.abs(y), np.abs(y_new))
        ratio = np.abs(err) / scale
        worst = int(np.argmax(ratio))
        err_norm = float(ratio[worst])
        if not np.isfinite(err_norm):
            bad = worst
            dt *= 0.5
            n_rej += 1
            continue
        if err_norm > 1.0:
            bad = worst
            dt *= max(_SHRINK_MIN, _SAFETY * err_norm ** -0.2)
            n_rej += 1
            continue
        neg = np.flatnonzero(y_new < 0.0)
        if neg.size:
            bad = int(neg[np.argmin(y_new[neg])])
            dt *= 0.5
            n_rej += 1
            continue
        if err_norm == 0.0:
            grow = _GROW_MAX
        else:
            grow = min(_GROW_MAX, _SAFETY * err_norm ** -0.2)
        if n_rej:
            grow = min(grow, 1.0)
        return t + dt, y_new, ks[6], dt, dt * grow, n_rej
