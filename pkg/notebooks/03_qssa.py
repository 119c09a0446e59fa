"""
Quasi-steady small clusters
===========================

With the monomer frozen, the rescaled small clusters ``eps**r_a c_i`` relax
to a profile carrying a constant flux ``H``; its first step is the
nucleation rate seen by the continuum equation.  The relaxed BD state is
compared with the closed forms.
"""

# %%
import numpy as np

from bdls import scenarios
from bdls.bd_system import BDState, IntegratorConfig, integrate_constant_monomer
from bdls.qssa import nucleation_rate, small_cluster_profile

eps = 0.01
for sc in (scenarios.slow(), scenarios.compensated_equal(), scenarios.compensated_unequal()):
    reg = sc.regime
    u = 1.5 * reg.rho + 0.5
    prof = small_cluster_profile(reg, sc.fam, u, 10)
    traj = integrate_constant_monomer(sc.fam, BDState(0.0, eps, u, np.zeros(999)), u,
                                      IntegratorConfig(t_end=5.0, rtol=1e-10, atol=1e-14))
    measured = eps ** sc.fam.r_a * traj.final.c[:9]
    print(f"{sc.name:20s} N(u)={nucleation_rate(reg, sc.fam, u):.6f} H={prof.H:.6f} "
          f"max rel err={np.max(np.abs(measured / prof.d - 1)):.1e}")

# %%
# the fast regime has no inflow; de-nucleation balances aggregation on average
sc = scenarios.fast()
print("fast N(u=1.5) =", nucleation_rate(sc.regime, sc.fam, 1.5))
