"""
Levels of power-law wells
=========================

Semiclassical levels of ``V0 |z/a|**k`` against a direct diagonalisation,
and the two time scales they imply: the classical period ``2 pi / omega``
and the revival time ``4 pi / (hbar zeta)``.
"""

import numpy as np

from qrevival import (PowerLawSystem, powerlaw_energy, powerlaw_numeric_spectrum, powerlaw_omega, powerlaw_zeta,
                      timescale_j, unmodulated_times)

# %%
# Semiclassical against numerical levels.  The linear well (k = 1) is the
# worst case (its cusp at z = 0 spoils the low levels); the agreement improves
# with n for every exponent.
for k in (1.0, 4.0, 100.0):
    system = PowerLawSystem(V0=1.0, k_exp=k)
    numeric = powerlaw_numeric_spectrum(system, 21, method="fourier", n_points=2048)
    n = np.arange(21)
    gap = (powerlaw_energy(system, n) - numeric.levels) / numeric.levels
    print(f"k={k:5g}  rel gap at n=0: {gap[0]:+.2e}  n=10: {gap[10]:+.2e}  n=20: {gap[20]:+.2e}")

# %%
# Time scales at r = 10.  A harmonic well has zeta = 0, hence no revival;
# the square-well limit (k -> inf) has T0_Q / T0_cl = 2 (r + 1/2).
print()
for k in (1.0, 2.0, 4.0, 100.0):
    system = PowerLawSystem(V0=1.0, k_exp=k)
    T0_cl, T0_Q = unmodulated_times(system, 10)
    print(f"k={k:5g}  omega={powerlaw_omega(system, 10):.5f}  zeta={powerlaw_zeta(system, 10):+.3e}  "
          f"T0_cl={T0_cl:.5f}  T0_Q={T0_Q}")

# %%
# The same time scales follow from finite differences of any smooth E(n):
# ``T_j = 2 pi / omega_j`` with ``omega_j = E^(j)(n0) / (j! hbar)``.  For the
# quartic well this reproduces the closed form, and j = 3 gives the
# super-revival time.
system = PowerLawSystem(V0=1.0, k_exp=4.0)
energy = lambda n: powerlaw_energy(system, n)  # noqa: E731
for j in (1, 2, 3):
    print(f"T_{j} = {timescale_j(energy, 10 * system.hbar, j, system.hbar)}")
print("closed form:", unmodulated_times(system, 10))
