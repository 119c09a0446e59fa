"""Continuous-size views of a BD state and the diagnostics built on them.

Everything here integrates piecewise-constant densities exactly (or with a
declared quadrature tolerance), so the same functions apply to the stepped
BD density and to the LS finite-volume grid.  Anything exposing ``edges``
and ``heights`` (cells ``[edges[k], edges[k+1])``) is accepted as a density.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
from scipy.integrate import quad

from .bd_system import BDState
from .errors import DomainError, ValidationError

DEFAULT_Z_GRID = (0.05, 0.1, 0.2, 0.4)
MONITOR_COLUMNS = ("t", "z", "F_eps", "moment_1", "moment_x", "moment_phi", "entropy")


@dataclass(frozen=True)
class SteppedDensity:
    """``f(x) = c_i`` on ``[(i - 1/2) eps, (i + 1/2) eps)`` for ``i = 2..I_max``."""

    eps: float
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1:
            raise ValidationError("values must be 1-d")
        if np.any(v < 0.0):
            raise ValidationError("stepped density heights must be nonnegative")
        object.__setattr__(self, "values", v)

    @property
    def i_max(self) -> int:
        return self.values.size + 1

    @property
    def edges(self) -> np.ndarray:
        return self.eps * (np.arange(2, self.i_max + 2) - 0.5)

    @property
    def heights(self) -> np.ndarray:
        return self.values

    @property
    def centers(self) -> np.ndarray:
        return self.eps * np.arange(2, self.i_max + 1)

    def total(self) -> float:
        """``int f dx = eps * sum c_i``."""
        return self.eps * math.fsum(self.values)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        k = np.floor(x / self.eps + 0.5).astype(int) - 2
        ok = (k >= 0) & (k < self.values.size)
        return np.where(ok, self.values[np.clip(k, 0, self.values.size - 1)], 0.0)


def density_of(state: BDState) -> SteppedDensity:
    return SteppedDensity(eps=state.eps, values=state.c.copy())


def _cells(dens):
    return np.asarray(dens.edges, dtype=float), np.asarray(dens.heights, dtype=float)


# --------------------------------------------------------------------------- #
# test functions and the weak-* metric

@dataclass(frozen=True)
class TestFunctionFamily:
    """Hat functions ``phi_k(x) = max(0, 1 - |x - x_k| / w)``.

    ``sup phi_k = 1`` and ``sup |phi_k'| = 1/w``; weights ``2**-k`` follow the
    order of ``centers`` (k = 1, 2, ...).
    """

    __test__ = False  # not a pytest class

    centers: np.ndarray
    width: float

    def __post_init__(self):
        c = np.asarray(self.centers, dtype=float)
        if c.ndim != 1 or c.size == 0:
            raise ValidationError("need at least one hat centre")
        if not self.width > 0.0:
            raise ValidationError("hat width must be positive")
        object.__setattr__(self, "centers", c)

    @classmethod
    def default(cls, x_max: float, n_test: int = 16) -> "TestFunctionFamily":
        """``n_test`` hats of half-width ``x_max/8``; the first is centred at
        ``x = 0`` and the last ends at ``x_max``."""
        w = x_max / 8.0
        centers = np.linspace(0.0, x_max - w, n_test)
        return cls(centers=centers, width=w)

    @property
    def n_test(self) -> int:
        return self.centers.size

    @property
    def weights(self) -> np.ndarray:
        k = np.arange(1, self.n_test + 1)
        return 2.0 ** (-k) / (1.0 + 1.0 / self.width)

    def evaluate(self, k: int, x):
        """``phi_k(x)``; every hat is cut off at ``x < 0`` (sizes are nonnegative)."""
        x = np.asarray(x, dtype=float)
        y = np.maximum(0.0, 1.0 - np.abs(x - self.centers[k]) / self.width)
        return np.where(x >= 0.0, y, 0.0)

    def antiderivative(self, x):
        """``int_0^x phi_k`` for every hat (0 for ``x <= 0``); shape ``(n_test, len(x))``."""
        x = np.maximum(np.atleast_1d(np.asarray(x, dtype=float)), 0.0)

        def G(y):
            s = np.clip((y[None, :] - self.centers[:, None]) / self.width, -1.0, 1.0)
            return np.where(s <= 0.0, 0.5 * (s + 1.0) ** 2, 1.0 - 0.5 * (1.0 - s) ** 2)

        return self.width * (G(x) - G(np.zeros(1)))

    def integrals(self, dens) -> np.ndarray:
        """``int phi_k f dx`` for every hat, exact for piecewise-constant ``f``."""
        edges, h = _cells(dens)
        A = self.antiderivative(edges)
        return (A[:, 1:] - A[:, :-1]) @ h


def weak_star_distance(d1, d2, fam: TestFunctionFamily) -> float:
    """``sum_k 2**-k / (|phi_k|_inf + |phi_k'|_inf) |int phi_k d1 - int phi_k d2|``."""
    diff = np.abs(fam.integrals(d1) - fam.integrals(d2))
    return float(np.sum(fam.weights * diff))


# --------------------------------------------------------------------------- #
# moments, Laplace transform, entropy

@dataclass(frozen=True)
class MomentFunction:
    """A weight ``Phi(x)`` with optional closed-form antiderivative.

    Without an antiderivative, cell integrals use adaptive quadrature at
    ``1e-12`` relative tolerance.  Membership in the admissible class
    (convex, ``Phi(0) = 0``, concave derivative, superlinear) is declared by
    the caller; :meth:`check_on_grid` gives a numerical sanity check.
    """

    func: Callable
    antiderivative: Optional[Callable] = None
    name: str = "custom"

    @classmethod
    def default(cls) -> "MomentFunction":
        return cls(func=lambda x: np.asarray(x, dtype=float) ** 1.5,
                   antiderivative=lambda x: 0.4 * np.asarray(x, dtype=float) ** 2.5,
                   name="x^1.5")

    @classmethod
    def power(cls, p: float) -> "MomentFunction":
        return cls(func=lambda x: np.asarray(x, dtype=float) ** p,
                   antiderivative=lambda x: np.asarray(x, dtype=float) ** (p + 1) / (p + 1),
                   name=f"x^{p:g}")

    def cell_integrals(self, edges) -> np.ndarray:
        edges = np.asarray(edges, dtype=float)
        if self.antiderivative is not None:
            return np.diff(self.antiderivative(edges))
        out = np.empty(edges.size - 1)
        for k in range(out.size):
            out[k], _ = quad(lambda y: float(self.func(y)), edges[k], edges[k + 1],
                             epsabs=0.0, epsrel=1e-12, limit=100)
        return out

    def check_on_grid(self, x_max: float = 10.0, n: int = 2001) -> bool:
        """Numerical check of ``Phi(0)=0``, convexity, ``Phi' >= 0`` concave, superlinearity."""
        x = np.linspace(0.0, x_max, n)
        y = np.asarray(self.func(x), dtype=float)
        d1 = np.diff(y)
        d2 = np.diff(d1)
        d3 = np.diff(d2)
        tol = 1e-12 * max(1.0, float(np.max(np.abs(y))))
        return bool(abs(y[0]) <= tol and np.all(d1 >= -tol) and np.all(d2 >= -tol)
                    and np.all(d3[1:] <= tol) and y[-1] / x[-1] > y[n // 2] / x[n // 2])


def moment(dens, phi: MomentFunction) -> float:
    """``sum c_i int_{cell} Phi dx`` for a stepped or FV density."""
    edges, h = _cells(dens)
    return math.fsum(h * phi.cell_integrals(edges))


def laplace(state: BDState, z: float, r: float) -> float:
    """Discrete Laplace transform ``sum_{j>=2} eps**r c_j exp(-j z)``."""
    if not 0.0 < z < 1.0:
        raise DomainError("z must lie in (0, 1)")
    j = state.sizes
    return math.fsum(state.eps**r * state.c * np.exp(-j * z))


def rescaled_small_cluster(state: BDState, i: int, r: float) -> float:
    """``eps**r c_i``."""
    if not 2 <= i <= state.i_max:
        raise DomainError(f"cluster index {i} outside 2..{state.i_max}")
    return float(state.eps**r * state.c[i - 2])


def _entropy_weight_primitive(x, p):
    """``int_0^x min(1, y**p) dy`` for ``x >= 0``."""
    x = np.asarray(x, dtype=float)
    low = np.minimum(x, 1.0)
    return low ** (p + 1.0) / (p + 1.0) + np.maximum(x - 1.0, 0.0)


def check_entropy_delta(delta: float, r_a: float):
    upper = math.inf if r_a == 0.0 else 1.0 / r_a - 1.0
    if not 0.0 < delta < upper:
        raise DomainError(f"delta={delta} outside (0, 1/r_a - 1) = (0, {upper:g})")


def entropy_functional(dens, delta: float, r_a: float) -> float:
    """``sum_i c_i**(1+delta) int_{cell} min(1, x**(r_a delta)) dx``."""
    check_entropy_delta(delta, r_a)
    edges, h = _cells(dens)
    w = np.diff(_entropy_weight_primitive(np.maximum(edges, 0.0), r_a * delta))
    return math.fsum(h ** (1.0 + delta) * w)


# --------------------------------------------------------------------------- #
# monitor table

def monitor_rows(states: Iterable[BDState], r: float, z_grid: Sequence[float] = DEFAULT_Z_GRID,
                 phi: Optional[MomentFunction] = None, delta: Optional[float] = None, r_a: float = 0.0):
    """One row per ``(t, z)`` with the columns of :data:`MONITOR_COLUMNS`.

    ``entropy`` is NaN when ``delta`` is not given.
    """
    phi = phi or MomentFunction.default()
    one, ident = MomentFunction.power(0.0), MomentFunction.power(1.0)
    rows = []
    for st in states:
        dens = density_of(st)
        m1, mx, mp = moment(dens, one), moment(dens, ident), moment(dens, phi)
        ent = entropy_functional(dens, delta, r_a) if delta is not None else float("nan")
        for z in z_grid:
            rows.append((st.t, z, laplace(st, z, r), m1, mx, mp, ent))
    return rows


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
