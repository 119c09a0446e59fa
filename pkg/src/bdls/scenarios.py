"""Reference scenarios used by the acceptance suite, the notebooks and the CLI defaults.

Slow and compensated scenarios start from a power law whose amplitude
matches the quasi-steady boundary layer ``f ~ N(u_in) / v(x)`` near zero, so
the small clusters are close to equilibrium already at ``t = 0`` and the
finite-``eps`` lag is small.  The fast scenario has no boundary layer
(``N = 0``) and starts from a Gaussian bump.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .bd_system import BDState
from .initial import InitialProfile
from .ls_solver import LSState
from .qssa import nucleation_rate
from .rates import NucleationRegime, RateFamily, classify_regime


@dataclass(frozen=True)
class Scenario:
    name: str
    fam: RateFamily
    initial: InitialProfile
    u_in: float
    x_max: float
    t_end: float = 1.0

    @property
    def regime(self) -> NucleationRegime:
        return classify_regime(self.fam)

    def i_max(self, eps: float, factor: float = 2.0) -> int:
        """``I_max = factor * x_max / eps`` (the acceptance truncation)."""
        return int(round(factor * self.x_max / eps))

    def bd_state(self, eps: float, i_max: Optional[int] = None) -> BDState:
        n = self.i_max(eps) if i_max is None else i_max
        return BDState(t=0.0, eps=eps, u=self.u_in, c=self.initial.sample_bd(eps, n))

    def ls_state(self, cells: int) -> LSState:
        edges = np.linspace(0.0, self.x_max, cells + 1)
        return LSState.on_grid(self.x_max, cells, self.initial.cell_averages(edges), self.u_in)


def boundary_layer_amplitude(fam: RateFamily, u: float) -> float:
    """``K`` with ``f(x) = K x**-r_a`` carrying the flux ``N(u)`` near ``x = 0``."""
    reg = classify_regime(fam)
    N = nucleation_rate(reg, fam, u)
    speed = fam.a_bar * u - (fam.b_bar if fam.equal_exponents else 0.0)
    return N / speed


def _layer_start(fam, u_in, upper=3.0):
    return InitialProfile("power_law", amplitude=boundary_layer_amplitude(fam, u_in),
                          exponent=fam.r_a, upper=upper)


def slow() -> Scenario:
    fam = RateFamily(alpha=0.1, beta=1.0, a_bar=1.0, b_bar=0.5, r_a=0.5, r_b=0.5, eta=3.0)
    return Scenario("slow", fam, _layer_start(fam, 1.0), u_in=1.0, x_max=5.0)


def compensated_equal() -> Scenario:
    """Standard scenario: ``r_a = r_b = eta = 0.5``."""
    fam = RateFamily(alpha=0.05, beta=1.0, a_bar=1.0, b_bar=0.5, r_a=0.5, r_b=0.5, eta=0.5)
    return Scenario("compensated_equal", fam, _layer_start(fam, 1.0), u_in=1.0, x_max=5.0)


def compensated_unequal() -> Scenario:
    fam = RateFamily(alpha=0.2, beta=1.0, a_bar=1.0, b_bar=1e-4, r_a=0.0, r_b=1.0, eta=0.0)
    return Scenario("compensated_unequal", fam, _layer_start(fam, 1.0), u_in=1.0, x_max=5.0)


def fast() -> Scenario:
    fam = RateFamily(alpha=1.0, beta=10.0, a_bar=1.0, b_bar=0.5, r_a=0.5, r_b=0.5, eta=0.0)
    init = InitialProfile("gaussian", amplitude=1.0, center=1.0, width=0.3)
    return Scenario("fast", fam, init, u_in=1.5, x_max=4.0)


def translation() -> Scenario:
    """``a = 1``, ``b = 0``: with frozen ``u`` and no inflow the LS solution is a shift."""
    fam = RateFamily(alpha=1.0, beta=1.0, a_bar=1.0, b_bar=0.0, r_a=0.0, r_b=0.0, eta=1.0)
    init = InitialProfile("gaussian", amplitude=1.0, center=1.0, width=0.3)
    return Scenario("translation", fam, init, u_in=1.0, x_max=4.0)


ALL = {s.name: s for s in (slow(), compensated_equal(), compensated_unequal(), fast(), translation())}
