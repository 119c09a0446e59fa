"""Initial size distributions shared by the BD and LS solvers.

BD clusters are sampled at the cell centres, ``c_i = f_in(i eps)``; the LS
grid receives exact cell averages so both sides see the same measure.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import quad
from scipy.special import erf

from .errors import ValidationError

KINDS = ("zero", "power_law", "gaussian", "tabulated")


@dataclass(frozen=True)
class InitialProfile:
    """Initial density ``f_in(x)``.

    Parameters
    ----------
    kind : {"zero", "power_law", "gaussian", "tabulated"}
        ``power_law`` is ``amplitude * x**(-exponent)`` on ``(0, upper)``.
        ``gaussian`` is a bump of standard deviation ``width`` truncated at
        ``cutoff`` widths from ``center`` (and at ``x = 0``).
        ``tabulated`` interpolates ``(x_table, f_table)`` linearly, zero outside.
    """

    kind: str = "zero"
    amplitude: float = 1.0
    exponent: float = 0.5
    center: float = 1.0
    width: float = 0.3
    cutoff: float = 6.0
    upper: float = 1.0
    x_table: Optional[np.ndarray] = field(default=None, compare=False)
    f_table: Optional[np.ndarray] = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown initial kind {self.kind!r}; expected one of {KINDS}")
        if self.amplitude < 0.0:
            raise ValidationError("initial amplitude must be nonnegative")
        if self.kind == "power_law" and not 0.0 <= self.exponent < 1.0:
            raise ValidationError("power-law exponent must lie in [0, 1) for integrability")
        if self.kind == "power_law" and not self.upper > 0.0:
            raise ValidationError("power-law upper end must be positive")
        if self.kind == "gaussian" and not (self.width > 0.0 and self.cutoff > 0.0):
            raise ValidationError("gaussian width and cutoff must be positive")
        if self.kind == "tabulated":
            if self.x_table is None or self.f_table is None:
                raise ValidationError("tabulated profile needs x_table and f_table")
            x = np.asarray(self.x_table, dtype=float)
            f = np.asarray(self.f_table, dtype=float)
            if x.shape != f.shape or x.ndim != 1 or x.size < 2:
                raise ValidationError("x_table and f_table must be 1-d arrays of equal length >= 2")
            if np.any(np.diff(x) <= 0.0) or x[0] < 0.0:
                raise ValidationError("x_table must be increasing and nonnegative")
            if np.any(f < 0.0):
                raise ValidationError("f_table must be nonnegative")
            object.__setattr__(self, "x_table", x)
            object.__setattr__(self, "f_table", f)

    # ------------------------------------------------------------------ #
    def _support(self):
        if self.kind == "gaussian":
            return max(0.0, self.center - self.cutoff * self.width), self.center + self.cutoff * self.width
        if self.kind == "power_law":
            return 0.0, self.upper
        if self.kind == "tabulated":
            return float(self.x_table[0]), float(self.x_table[-1])
        return 0.0, 0.0

    def density(self, x):
        """Pointwise ``f_in(x)``."""
        x = np.asarray(x, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(x)
        if self.kind == "tabulated":
            return np.interp(x, self.x_table, self.f_table, left=0.0, right=0.0)
        lo, hi = self._support()
        inside = (x > lo) & (x < hi) if self.kind == "power_law" else (x >= lo) & (x <= hi)
        if self.kind == "power_law":
            with np.errstate(divide="ignore"):
                val = self.amplitude * np.where(inside, x, 1.0) ** (-self.exponent)
        else:
            val = self.amplitude * np.exp(-0.5 * ((x - self.center) / self.width) ** 2)
        return np.where(inside, val, 0.0)

    def cumulative(self, x):
        """``int_0^x f_in``, exact for every kind."""
        x = np.asarray(x, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(x)
        lo, hi = self._support()
        xc = np.clip(x, lo, hi)
        if self.kind == "power_law":
            p = 1.0 - self.exponent
            return self.amplitude * xc ** p / p
        if self.kind == "gaussian":
            s = self.width * np.sqrt(2.0)
            g = lambda y: 0.5 * self.amplitude * self.width * np.sqrt(2.0 * np.pi) * erf((y - self.center) / s)
            return g(xc) - g(lo)
        # piecewise-linear interpolant: trapezoid sums plus a partial segment
        xt, ft = self.x_table, self.f_table
        seg = 0.5 * (ft[1:] + ft[:-1]) * np.diff(xt)
        cum = np.concatenate(([0.0], np.cumsum(seg)))
        k = np.clip(np.searchsorted(xt, xc, side="right") - 1, 0, xt.size - 2)
        f_at = np.interp(xc, xt, ft)
        return cum[k] + 0.5 * (ft[k] + f_at) * (xc - xt[k])

    def cell_averages(self, edges) -> np.ndarray:
        """Exact averages over the cells ``[edges[j], edges[j+1])``."""
        edges = np.asarray(edges, dtype=float)
        F = self.cumulative(edges)
        return np.diff(F) / np.diff(edges)

    def sample_bd(self, eps: float, i_max: int) -> np.ndarray:
        """``c_i = f_in(i eps)`` for ``i = 2..i_max``."""
        i = np.arange(2, i_max + 1, dtype=float)
        return self.density(eps * i)

    def first_moment(self) -> float:
        """``int x f_in dx`` by exact or high-order quadrature."""
        if self.kind == "zero":
            return 0.0
        if self.kind == "power_law":
            return self.amplitude * self.upper ** (2.0 - self.exponent) / (2.0 - self.exponent)
        lo, hi = self._support()
        if self.kind == "tabulated":
            # exact for piecewise-linear f: integrate x*f segment by segment
            xt, ft = self.x_table, self.f_table
            x0, x1, f0, f1 = xt[:-1], xt[1:], ft[:-1], ft[1:]
            h = x1 - x0
            return float(np.sum(h * (f0 * (2 * x0 + x1) + f1 * (x0 + 2 * x1)) / 6.0))
        val, _ = quad(lambda y: y * float(self.density(y)), lo, hi, epsabs=0.0, epsrel=1e-13, limit=200)
        return val
