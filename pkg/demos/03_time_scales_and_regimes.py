"""
Driven time scales and their regimes
====================================

How a periodic drive near the ``N``-th resonance stretches the classical
period and shortens the revival time, and the linear relations between the
two in the weak- and strong-nonlinearity regimes.
"""

import numpy as np

from qrevival import (DriveParams, PowerLawSystem, ResonanceContext, classify_regime, powerlaw_interdependence,
                      powerlaw_spectrum, strong_regime, time_scales, weak_regime)
from qrevival.revival import identity_residuals

# %%
# A quartic well close to (but not on) the N = 1 resonance.
system = PowerLawSystem(V0=4139.95487303247, k_exp=4.0, mass=400.0)
spectrum = powerlaw_spectrum(system, 10)
print(f"omega = {spectrum.omega:.6f}, zeta = {spectrum.zeta:.3e}")

print(f"\n{'lambda':>8} {'regime':>12} {'delta':>8} {'mu':>8} {'q':>8} {'Tl_cl':>10} {'Tl_Q':>10}")
for lam in np.linspace(0.0, 0.2, 5):
    ctx = ResonanceContext(N=1, lam=lam, V=0.1, spectrum=spectrum)
    ts = time_scales(ctx)
    regime = classify_regime(spectrum.zeta, ts.mu, ts.q, ts.beta)
    print(f"{lam:8.3f} {regime:>12} {ts.delta:8.3f} {ts.mu:8.4f} {ts.q:8.4f} {ts.Tl_cl:10.4f} {ts.Tl_Q:10.2f}")

# %%
# With the regime's modification factors substituted (M_cl = -alpha,
# M_Q = 3 alpha for weak; M_cl = M_Q = -beta for strong) the relations hold
# identically.  The general closed form only satisfies them approximately.
ctx = ResonanceContext(N=1, lam=0.05, V=0.1, spectrum=spectrum)
ts = time_scales(ctx)
w, s = weak_regime(ctx, ts), strong_regime(ctx, ts)
print(f"\nweak: identity {w.residual:+.1e}, closed form {w.general_residual:+.2e}")
print(f"strong: identity {s.residual:+.1e}, closed form {s.general_residual:+.2e}")

# %%
# The same holds over random admissible parameter draws.
weak, strong = identity_residuals(np.random.default_rng(1), 1000)
print(f"1000 draws: max |weak| {np.max(np.abs(weak)):.1e}, max |strong| {np.max(np.abs(strong)):.1e}")

# %%
# For power-law wells the relations become linear laws with slope
# C_k = (2/delta) (k+2)/(k-2) (r+1/2).
for regime in ("weak", "strong"):
    rep = powerlaw_interdependence(system, 10, ts.delta, regime, DriveParams(lam=0.05, V=0.1))
    print(f"{regime}: C_k = {rep.C_k:.4f}, residual {rep.residual:+.1e}")
