"""
Rate families and nucleation regimes
====================================

Power-law rates ``a(x) = a_bar x**r_a`` and ``b(x) = b_bar x**r_b`` plus the
de-nucleation exponent ``eta`` fix everything downstream: the threshold
``rho`` and which nucleation rate the boundary sees.
"""

# %%
from bdls.rates import RateFamily, classify_regime

families = {
    "slow":        RateFamily(alpha=0.1, beta=1.0, a_bar=1.0, b_bar=0.5, r_a=0.5, r_b=0.5, eta=3.0),
    "compensated": RateFamily(alpha=0.05, beta=1.0, a_bar=1.0, b_bar=0.5, r_a=0.5, r_b=0.5, eta=0.5),
    "unequal":     RateFamily(alpha=0.2, beta=1.0, a_bar=1.0, b_bar=1e-4, r_a=0.0, r_b=1.0, eta=0.0),
    "fast":        RateFamily(alpha=1.0, beta=10.0, a_bar=1.0, b_bar=0.5, r_a=0.5, r_b=0.5, eta=0.0),
}

# %%
# eta against r_a picks the regime; rho is b_bar/a_bar only when the exponents agree
for name, fam in families.items():
    reg = classify_regime(fam)
    print(f"{name:12s} regime={reg.label:24s} rho={reg.rho:g}")

# %%
# the characteristic at x = 0 points inward only for u > rho
from bdls.rates import continuum_velocity

fam = families["compensated"]
for u in (0.4, 0.5, 0.6):
    print(f"u={u}  velocity near 0: {continuum_velocity(fam, 1e-6, u):+.2e}")
