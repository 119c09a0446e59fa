"""
BD to LS convergence sweep
==========================

Three BD runs at decreasing ``eps`` against one fine LS reference.  The
weak-* distance and the monomer deviation should shrink with ``eps``, while
the small-cluster Laplace transform stays bounded.
"""

# %%
import numpy as np

from bdls import scenarios
from bdls.harness import SweepPlan, run_sweep

sc = scenarios.slow()
plan = SweepPlan(eps_list=(0.1, 0.05, 0.025), fam=sc.fam, initial=sc.initial, u_in=sc.u_in,
                 x_max=sc.x_max, t_samples=(0.0, 0.25, 0.5, 1.0), ls_cells=1600, z_grid=(0.1, 0.2, 0.4))
rep = run_sweep(plan)

# %%
print("weak-* distance, rows eps, columns t")
print(np.round(rep.distance_matrix(), 5))
print("sup |u_eps - u_LS|", rep.u_sup())

# %%
L = rep.laplace_matrix()
print("sup_t F(t, z), rows eps, columns z")
print(np.round(L, 4))
print("growth per halving", np.round(L[1:] / L[:-1] - 1, 4))
