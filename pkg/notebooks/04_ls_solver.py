"""
Lifshitz-Slyozov finite volumes
===============================

Upwind fluxes with the nucleation rate injected through ``x = 0``; the
monomer is recovered from the conserved mass each step.  A frozen-monomer
translation has an exact solution by characteristics, which gives the order.
"""

# %%
import numpy as np

from bdls import scenarios
from bdls.ls_solver import ls_solve

sc = scenarios.translation()
errs = []
for J in (100, 200, 400, 800):
    traj = ls_solve(sc.fam, sc.regime, sc.ls_state(J), 1.0, cfl=0.5, frozen_u=True, inflow=lambda u: 0.0)
    edges = np.linspace(0, sc.x_max, J + 1)
    exact = sc.initial.cell_averages(edges - sc.u_in)
    errs.append(float(np.sum(np.abs(traj.final.f - exact)) * sc.x_max / J))
print("L1 errors", errs)
print("orders", np.log2(np.array(errs[:-1]) / errs[1:]))

# %%
# coupled run in the slow regime: mass books balance to roundoff
sc = scenarios.slow()
traj = ls_solve(sc.fam, sc.regime, sc.ls_state(800), 1.0, sample_times=[0, 0.5, 1.0])
for s in traj.states:
    print(f"t={s.t:.2f} u={s.u:.6f} mass residual={s.mass_residual:.1e}")
