"""Kinetic rate families and nucleation-regime classification.

A :class:`RateFamily` carries the first aggregation / fragmentation rates
(``alpha``, ``beta``), the near-zero power-law asymptotics of the continuum
rates ``a(x) ~ a_bar x**r_a`` and ``b(x) ~ b_bar x**r_b``, and the exponent
``eta`` scaling the first fragmentation ``eps**eta * beta``.

Two modes are supported:

``ExactPowerLaw``
    ``a_i = a_bar (eps i)**r_a`` for ``i >= 2`` and ``b_i = b_bar (eps i)**r_b``
    for ``i >= 3``, exactly.
``Tabulated``
    user callbacks ``a(x)`` and ``b(x)`` sampled at the cell centres ``eps i``.
    The asymptotics still have to be declared; they are spot-checked close to
    the origin.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, ValidationError

# exponent comparisons (eta vs r_a, r_a vs r_b) are done with this slack
EXPONENT_TOL = 1e-12

_SPOT_POINTS = (1e-6, 1e-8)
_SPOT_TOL = 0.05


class RateMode(str, enum.Enum):
    EXACT_POWER_LAW = "ExactPowerLaw"
    TABULATED = "Tabulated"


class Regime(str, enum.Enum):
    SLOW = "Slow"
    COMPENSATED = "Compensated"
    FAST = "Fast"


def _same(x: float, y: float) -> bool:
    return abs(x - y) <= EXPONENT_TOL * max(1.0, abs(x), abs(y))


@dataclass(frozen=True)
class RateFamily:
    """Kinetic coefficients of the rescaled Becker-Doring system.

    Parameters
    ----------
    alpha, beta : float
        First aggregation and first fragmentation rates.  ``beta = 0`` is
        accepted only together with ``b_bar = 0`` (pure aggregation).
    a_bar, b_bar : float
        Prefactors of the near-zero power laws.
    r_a, r_b : float
        Exponents, ``0 <= r_a < 1`` and ``r_b >= r_a``.
    eta : float
        Exponent of the first fragmentation, ``eta >= 0``.
    a_func, b_func : callable, optional
        Continuum rates for the ``Tabulated`` mode.  Both or neither.
    """

    alpha: float
    beta: float
    a_bar: float
    b_bar: float
    r_a: float
    r_b: float
    eta: float
    a_func: Optional[Callable] = field(default=None, compare=False, repr=False)
    b_func: Optional[Callable] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        for name in ("alpha", "beta", "a_bar", "b_bar", "r_a", "r_b", "eta"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ValidationError(f"rate parameter {name!r} must be a finite number, got {value!r}")
            object.__setattr__(self, name, float(value))
        if not 0.0 <= self.r_a < 1.0:
            raise ValidationError(
                f"r_a={self.r_a} outside [0, 1): characteristics at x=0 are outgoing, "
                "the theory already exists for that case and no boundary condition is needed"
            )
        if self.r_b < self.r_a and not _same(self.r_a, self.r_b):
            raise ValidationError(
                f"r_b={self.r_b} < r_a={self.r_a}: characteristics at x=0 are outgoing, "
                "the theory already exists for that case and no boundary condition is needed"
            )
        if self.alpha <= 0.0:
            raise ValidationError("alpha must be positive")
        if self.a_bar <= 0.0:
            raise ValidationError("a_bar must be positive")
        if self.b_bar < 0.0:
            raise ValidationError("b_bar must be nonnegative")
        if self.beta < 0.0:
            raise ValidationError("beta must be positive")
        if self.beta == 0.0 and self.b_bar != 0.0:
            raise ValidationError("beta = 0 is only allowed for pure aggregation (b_bar = 0)")
        if self.eta < 0.0:
            raise ValidationError("eta must be nonnegative")
        if (self.a_func is None) != (self.b_func is None):
            raise ValidationError("Tabulated mode needs both a_func and b_func")
        if self.a_func is not None:
            self._spot_check()

    def _spot_check(self):
        for x in _SPOT_POINTS:
            ratio = float(self.a_func(x)) / (self.a_bar * x**self.r_a)
            if abs(ratio - 1.0) > _SPOT_TOL:
                raise ValidationError(
                    f"a(x) does not behave like a_bar*x**r_a near 0 (ratio {ratio:.4g} at x={x:g})"
                )
            if self.b_bar > 0.0:
                ratio = float(self.b_func(x)) / (self.b_bar * x**self.r_b)
                if abs(ratio - 1.0) > _SPOT_TOL:
                    raise ValidationError(
                        f"b(x) does not behave like b_bar*x**r_b near 0 (ratio {ratio:.4g} at x={x:g})"
                    )

    @property
    def mode(self) -> RateMode:
        return RateMode.EXACT_POWER_LAW if self.a_func is None else RateMode.TABULATED

    @property
    def pure_aggregation(self) -> bool:
        return self.beta == 0.0 and self.b_bar == 0.0

    @property
    def zero_tail_fragmentation(self) -> bool:
        """``b_bar = 0`` with ``beta > 0``: a configuration the theory does not discuss."""
        return self.b_bar == 0.0 and self.beta > 0.0

    @property
    def equal_exponents(self) -> bool:
        return _same(self.r_a, self.r_b)

    def a(self, x):
        """Continuum aggregation rate ``a(x)``."""
        x = np.asarray(x, dtype=float)
        if self.a_func is not None:
            return np.asarray(self.a_func(x), dtype=float)
        return self.a_bar * x**self.r_a

    def b(self, x):
        """Continuum fragmentation rate ``b(x)``."""
        x = np.asarray(x, dtype=float)
        if self.b_func is not None:
            return np.asarray(self.b_func(x), dtype=float)
        if self.b_bar == 0.0:
            return np.zeros_like(x)
        return self.b_bar * x**self.r_b

    def with_params(self, **changes) -> "RateFamily":
        params = {k: getattr(self, k) for k in ("alpha", "beta", "a_bar", "b_bar", "r_a", "r_b", "eta")}
        params.update(changes)
        return RateFamily(**params, a_func=self.a_func, b_func=self.b_func)

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("alpha", "beta", "a_bar", "b_bar", "r_a", "r_b", "eta")}


@dataclass(frozen=True)
class NucleationRegime:
    kind: Regime
    rho: float
    equal_exponents: bool

    @property
    def label(self) -> str:
        if self.kind is Regime.COMPENSATED:
            return "Compensated(r_a=r_b)" if self.equal_exponents else "Compensated(r_a<r_b)"
        return self.kind.value


def discrete_rates(fam: RateFamily, eps: float, i):
    """Return ``(a_i, b_i)`` for cluster index ``i`` (scalar or array, ``i >= 2``).

    ``b_2`` is reported as 0: the first fragmentation is the separate channel
    ``eps**eta * beta``.
    """
    if eps <= 0.0:
        raise DomainError("eps must be positive")
    idx = np.asarray(i)
    if np.any(idx < 2):
        raise DomainError("cluster index must be >= 2")
    x = eps * idx.astype(float)
    a_i = fam.a(x)
    b_i = np.where(idx >= 3, fam.b(x), 0.0)
    if np.ndim(idx) == 0:
        return float(a_i), float(b_i)
    return a_i, b_i


def rate_arrays(fam: RateFamily, eps: float, i_max: int):
    """``a_i`` for ``i = 2..i_max`` and ``b_i`` for ``i = 2..i_max`` (``b_2 = 0``)."""
    idx = np.arange(2, i_max + 1)
    return discrete_rates(fam, eps, idx)


def compute_rho(fam: RateFamily) -> float:
    if fam.equal_exponents:
        return fam.b_bar / fam.a_bar
    return 0.0


def classify_regime(fam: RateFamily) -> NucleationRegime:
    if _same(fam.eta, fam.r_a):
        kind = Regime.COMPENSATED
    elif fam.eta > fam.r_a:
        kind = Regime.SLOW
    else:
        kind = Regime.FAST
    return NucleationRegime(kind=kind, rho=compute_rho(fam), equal_exponents=fam.equal_exponents)


def continuum_velocity(fam: RateFamily, x, u):
    """Characteristic speed ``a(x) u - b(x)`` of the limit transport equation."""
    return fam.a(x) * u - fam.b(x)


# --------------------------------------------------------------------------- #
# dimensional <-> dimensionless map

REL_TOL_SCALES = 1e-12


@dataclass(frozen=True)
class PhysicalScales:
    """Characteristic values and physical rates of the original BD model.

    The physical rates are ``a_1 = a1``, ``b_2 = b2`` and the power laws
    ``a_i = a_coef * i**r_a`` (``i >= 2``), ``b_i = b_coef * i**r_b``
    (``i >= 3``); ``mass`` is ``sum_i i c_i``.
    """

    T: float
    C1: float
    C: float
    A: float
    B: float
    A1: float
    B2: float
    Mc: float
    a1: float
    b2: float
    a_coef: float
    b_coef: float
    r_a: float
    r_b: float
    mass: float


def _check_relation(name, lhs, rhs):
    if not math.isclose(lhs, rhs, rel_tol=REL_TOL_SCALES, abs_tol=0.0):
        raise ValidationError(f"scale relation {name} violated: {lhs!r} != {rhs!r}")


def nondimensionalize(phys: PhysicalScales):
    """Map physical scales and rates to ``(fam, eps, m)``.

    ``eps`` is inferred from ``C/C1 = eps**2`` and ``eta`` from
    ``B2 = eps**eta * B``; the remaining relations are checked to a relative
    precision of 1e-12.
    """
    for name in ("T", "C1", "C", "A", "B", "A1", "B2", "Mc"):
        if not getattr(phys, name) > 0.0:
            raise ValidationError(f"characteristic value {name} must be positive")
    eps = math.sqrt(phys.C / phys.C1)
    if not eps < 1.0:
        raise ValidationError("C/C1 must be < 1 (eps < 1)")
    _check_relation("A*C1*T = 1/eps", phys.A * phys.C1 * phys.T, 1.0 / eps)
    _check_relation("B*T = 1/eps", phys.B * phys.T, 1.0 / eps)
    _check_relation("Mc/C1 = 1", phys.Mc / phys.C1, 1.0)
    _check_relation("A1 = eps**2 * A", phys.A1, eps**2 * phys.A)
    eta = math.log(phys.B2 / phys.B) / math.log(eps)
    if eta < 0.0 and eta < -REL_TOL_SCALES:
        raise ValidationError("B2/B gives a negative eta")
    eta = max(eta, 0.0)
    fam = RateFamily(
        alpha=phys.a1 / phys.A1,
        beta=phys.b2 / phys.B2,
        a_bar=phys.a_coef / (phys.A * eps**phys.r_a),
        b_bar=phys.b_coef / (phys.B * eps**phys.r_b),
        r_a=phys.r_a,
        r_b=phys.r_b,
        eta=eta,
    )
    return fam, eps, phys.mass / phys.Mc


def redimensionalize(fam: RateFamily, eps: float, m: float, T: float = 1.0, C1: float = 1.0) -> PhysicalScales:
    """Inverse of :func:`nondimensionalize` for a free choice of ``T`` and ``C1``."""
    A = 1.0 / (eps * C1 * T)
    B = 1.0 / (eps * T)
    A1 = eps**2 * A
    B2 = eps**fam.eta * B
    return PhysicalScales(
        T=T, C1=C1, C=eps**2 * C1, A=A, B=B, A1=A1, B2=B2, Mc=C1,
        a1=fam.alpha * A1,
        b2=fam.beta * B2,
        a_coef=fam.a_bar * A * eps**fam.r_a,
        b_coef=fam.b_bar * B * eps**fam.r_b,
        r_a=fam.r_a, r_b=fam.r_b,
        mass=m * C1,
    )
