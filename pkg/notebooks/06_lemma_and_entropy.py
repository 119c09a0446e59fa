"""
Sign lemma and entropy
======================

The entropy weight ``x**(r delta)`` decays along the dynamics once a
discrete sign condition holds past some ``I_0``.  The scan finds ``I_0`` per
``(r, delta)``; a long compensated run then shows the entropy staying
bounded.
"""

# %%
from dataclasses import replace

import numpy as np

from bdls import scenarios
from bdls.bd_system import IntegratorConfig, integrate
from bdls.harness import entropy_monitor, sign_scan

for r in (0.1, 0.5, 0.9):
    for frac in (0.25, 0.9):
        res = sign_scan(r, frac * (1 / r - 1), 100_000)
        print(f"r={r} delta={res.delta:.4f} I_0={res.I0} max from I_0={res.max_value:.2e}")

# %%
sc = replace(scenarios.compensated_equal(), x_max=8.0)
traj = integrate(sc.fam, sc.bd_state(0.02), IntegratorConfig(t_end=10.0), sample_times=np.linspace(0, 10, 41))
series = entropy_monitor(traj.states, 0.5, sc.fam.r_a, sc.fam)
print("entropy every 2.5 time units", np.round(series.values[::10], 5))
print("C =", series.C, " late slope =", series.late_slope)
