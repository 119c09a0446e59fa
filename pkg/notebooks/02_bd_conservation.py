"""
Becker-Doring run and mass conservation
=======================================

The truncated system keeps a reflecting wall at the largest cluster, so the
mass ``u + sum eps**2 i c_i`` is an exact invariant of the ODE and only the
integrator error shows up in the drift.
"""

# %%
import numpy as np

from bdls import scenarios
from bdls.bd_system import IntegratorConfig, integrate

sc = scenarios.compensated_equal()
eps = 0.05
state = sc.bd_state(eps)
print("I_max =", state.i_max, " u(0) =", state.u)

# %%
traj = integrate(sc.fam, state, IntegratorConfig(t_end=1.0), sample_times=np.linspace(0, 1, 11))
drift = np.max(np.abs(traj.mass - traj.mass[0])) / traj.mass[0]
print("steps", traj.n_steps, "rejected", traj.n_rejected)
print("relative mass drift", drift)

# %%
# the monomer is consumed by nucleation and growth
for t, u in zip(traj.t, traj.u):
    print(f"t={t:4.2f}  u={u:.6f}")
