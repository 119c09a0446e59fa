"""Quasi-steady-state closures for the small clusters.

At a frozen monomer level ``u`` the rescaled small-cluster variables
``d_i = eps**r_a c_i`` relax to a profile carrying a size-independent flux
``H``.  That flux is the nucleation rate ``N(u)`` fed into the transport
equation at ``x = 0``:

=====================  ==============================================
regime                 ``N(u)``
=====================  ==============================================
slow  (eta > r_a)      ``alpha u**2``
compensated, r_a<r_b   ``alpha u**2 * u / (u + beta / (a_bar 2**eta))``
compensated, r_a=r_b   ``alpha u**2 (a_bar u - b_bar) / (a_bar u - b_bar + beta / 2**eta)``
fast  (eta < r_a)      ``0``
=====================  ==============================================

With pure aggregation (``beta = b_bar = 0``) every regime reduces to
``alpha u**2``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, OutOfRegimeError
from .rates import NucleationRegime, RateFamily, Regime

DEFAULT_PROFILE_SIZE = 200


@dataclass(frozen=True)
class QssaProfile:
    """Bounded flux-carrying profile at monomer level ``u``.

    ``d[k]`` is ``d_{k+2}``; ``H_i[k]`` is the limit flux ``H_{k+1}``
    (so ``H_i[0]`` is ``H_1``).
    """

    u: float
    d: np.ndarray
    H: float
    H_i: np.ndarray
    regime: NucleationRegime

    @property
    def sizes(self):
        return np.arange(2, self.d.size + 2)

    @property
    def flux_residual(self) -> float:
        return float(np.max(np.abs(self.H_i - self.H)))


@dataclass(frozen=True)
class QChain:
    """Detailed-balance coefficients; ``Q[k]`` is ``Q_{k+1}`` so ``Q[0] = Q_1 = 1``."""

    Q: np.ndarray

    def detailed_balance(self, u: float) -> np.ndarray:
        """``d_i = Q_i u**i`` for ``i = 2..n``."""
        i = np.arange(2, self.Q.size + 1)
        return self.Q[1:] * u ** i


def _effective(regime: NucleationRegime, fam: RateFamily):
    """Regime used for the closure; pure aggregation behaves as the slow case."""
    if fam.beta == 0.0:
        return Regime.SLOW
    return regime.kind


def _require_above_rho(regime: NucleationRegime, fam: RateFamily, u: float):
    if u < 0.0:
        raise DomainError("u must be nonnegative")
    if regime.equal_exponents and not fam.a_bar * u - fam.b_bar > 0.0:
        raise OutOfRegimeError(
            f"u={u:g} <= rho={regime.rho:g}: the boundary closure is only defined above the threshold"
        )


def nucleation_rate(regime: NucleationRegime, fam: RateFamily, u: float) -> float:
    """Boundary inflow ``N(u)`` of the limit transport equation."""
    kind = _effective(regime, fam)
    if kind is Regime.SLOW:
        if u < 0.0:
            raise DomainError("u must be nonnegative")
        return fam.alpha * u * u
    if kind is Regime.FAST:
        if u < 0.0:
            raise DomainError("u must be nonnegative")
        return 0.0
    two_eta = 2.0 ** fam.eta
    if not regime.equal_exponents:
        if u < 0.0:
            raise DomainError("u must be nonnegative")
        if u == 0.0:
            return 0.0
        return fam.alpha * u * u * u / (u + fam.beta / (fam.a_bar * two_eta))
    _require_above_rho(regime, fam, u)
    gap = fam.a_bar * u - fam.b_bar
    return fam.alpha * u * u * gap / (gap + fam.beta / two_eta)


def d2_limit(regime: NucleationRegime, fam: RateFamily, u: float) -> float:
    """Limit of ``eps**r_a c_2`` (slow, compensated) or the density of the
    time-averaged limit of ``eps**eta c_2`` (fast: ``alpha u**2 / beta``)."""
    kind = _effective(regime, fam)
    if kind is Regime.FAST:
        if u < 0.0:
            raise DomainError("u must be nonnegative")
        return fam.alpha * u * u / fam.beta
    if kind is Regime.SLOW:
        # H_1 = alpha u**2 with no return flux from size 2
        two_r = 2.0 ** fam.r_a
        if regime.equal_exponents:
            _require_above_rho(regime, fam, u)
            return fam.alpha * u * u / (two_r * (fam.a_bar * u - fam.b_bar))
        if u <= 0.0:
            raise OutOfRegimeError("u must be positive")
        return fam.alpha * u / (fam.a_bar * two_r)
    two_eta = 2.0 ** fam.eta
    if regime.equal_exponents:
        _require_above_rho(regime, fam, u)
        return fam.alpha * u * u / (two_eta * (fam.a_bar * u - fam.b_bar) + fam.beta)
    if u < 0.0:
        raise DomainError("u must be nonnegative")
    return fam.alpha * u * u / (fam.a_bar * two_eta * u + fam.beta)


def limit_fluxes(regime: NucleationRegime, fam: RateFamily, u: float, d: np.ndarray) -> np.ndarray:
    """Limit fluxes ``H_1 .. H_{n-1}`` for a profile ``d = (d_2..d_n)``."""
    d = np.asarray(d, dtype=float)
    i = np.arange(2, d.size + 1)          # H_i for i = 2..n-1 needs d_{i+1}
    kind = _effective(regime, fam)
    H = np.empty(d.size)
    growth_d = d[:-1]
    if kind is Regime.SLOW:
        H[0] = fam.alpha * u * u
    else:
        H[0] = fam.alpha * u * u - fam.beta * d[0]
    if kind is Regime.FAST:
        # d_2 is the eps**eta scaled density here; eps**r_a c_2 itself vanishes
        growth_d = np.concatenate(([0.0], d[1:-1]))
    H[1:] = fam.a_bar * i ** fam.r_a * u * growth_d
    if regime.equal_exponents:
        H[1:] -= fam.b_bar * (i + 1) ** fam.r_a * d[1:]
    return H


def small_cluster_profile(regime: NucleationRegime, fam: RateFamily, u: float,
                          i_max_profile: int = DEFAULT_PROFILE_SIZE) -> QssaProfile:
    """Unique bounded solution of ``H_i = H`` for ``i = 2..i_max_profile``.

    In the fast regime ``d_i = 0`` for ``i >= 3`` and ``d_2`` holds the
    time-averaged density ``alpha u**2 / beta``.
    """
    if i_max_profile < 3:
        raise DomainError("i_max_profile must be >= 3")
    if not u > regime.rho:
        raise OutOfRegimeError(f"u={u:g} must exceed rho={regime.rho:g}")
    i = np.arange(2, i_max_profile + 1, dtype=float)
    kind = _effective(regime, fam)
    if kind is Regime.FAST:
        d = np.zeros(i.size)
        d[0] = d2_limit(regime, fam, u)
        H = 0.0
    else:
        H = nucleation_rate(regime, fam, u)
        if regime.equal_exponents:
            d = H / ((fam.a_bar * u - fam.b_bar) * i ** fam.r_a)
        else:
            d = H / (fam.a_bar * i ** fam.r_a * u)
    H_i = limit_fluxes(regime, fam, u, d)
    return QssaProfile(u=float(u), d=d, H=float(H), H_i=H_i, regime=regime)


def penrose_profile(fam: RateFamily, u: float, H: float, i_max_profile: int) -> np.ndarray:
    """General solution of ``H_i = H`` (``r_a = r_b``, compensated) for a given ``H``.

    Only the selected ``H`` of :func:`nucleation_rate` keeps ``d_i e^{-iz}``
    bounded; any other value grows like ``(a_bar u / b_bar)**i``.
    """
    r = fam.r_a
    two_r = 2.0 ** r
    gap = fam.a_bar * u - fam.b_bar
    i = np.arange(2, i_max_profile + 1, dtype=float)
    ratio = fam.a_bar * u / fam.b_bar
    lead = fam.alpha * u * u / fam.beta * two_r / i ** r
    s = H / (fam.alpha * u * u)
    bracket = 1.0 - s * (1.0 + fam.beta / (two_r * gap))
    tail = s * fam.beta / two_r / gap
    return lead * (ratio ** (i - 2) * bracket + tail)


def q_chain(fam: RateFamily, i_max_profile: int = DEFAULT_PROFILE_SIZE) -> QChain:
    """``Q_1 = 1`` and ``Q_i = (alpha/beta) prod_{k=2}^{i-1} a_bar k**r_a / (b_bar (k+1)**r_a)``."""
    if fam.b_bar <= 0.0 or fam.beta <= 0.0:
        raise DomainError("the Q chain needs b_bar > 0 and beta > 0")
    Q = np.empty(i_max_profile)
    Q[0] = 1.0
    Q[1] = fam.alpha / fam.beta
    for n in range(3, i_max_profile + 1):
        k = n - 1
        Q[n - 1] = Q[n - 2] * (fam.a_bar * k ** fam.r_a) / (fam.b_bar * (k + 1) ** fam.r_a)
    return QChain(Q=Q)
