"""
Mathieu characteristic values of fractional order
=================================================

``a_nu(q)`` for real order ``nu`` from two independent solvers, and the
quasi-energies of a driven nonlinear resonance that are built from it.
"""

import numpy as np

from qrevival import (ResonanceContext, SpectrumModel, characteristic_grid, characteristic_value,
                      floquet_coefficients, mathieu_q, nu_of_k, quasi_energy)

# %%
# A small table.  At q = 0 the value is nu**2; integer orders split into the
# even (a_m) and odd (b_m) branches once q != 0.
nus = np.array([0.0, 0.5, 1.0, 1.5, 2.0])
qs = np.array([0.0, 1.0, 5.0])
table = characteristic_grid(nus, qs)
print("nu \\ q " + "".join(f"{q:>12g}" for q in qs))
for nu, row in zip(nus, table):
    print(f"{nu:6g} " + "".join(f"{a:12.7f}" for a in row))
print("b_1(1) =", characteristic_value(1, 1.0, branch="odd"))

# %%
# Tridiagonal eigenproblem against the continued-fraction root: they agree to
# about machine precision.
for nu, q in [(0.3, 0.7), (2.7, 4.0), (5.25, 12.0)]:
    a_t = characteristic_value(nu, q)
    a_c = characteristic_value(nu, q, method="contfrac")
    print(f"nu={nu:5g} q={q:5g}  a={a_t:.12f}  backend diff={a_t - a_c:+.1e}")

# %%
# Small-q behaviour for non-integer order: a = nu**2 + q**2 / (2 (nu**2 - 1)) + ...
nu = 0.4
for q in (0.01, 0.05, 0.2):
    print(f"q={q:5g}  a - nu^2 = {characteristic_value(nu, q) - nu ** 2:.6e}  "
          f"leading term = {q ** 2 / (2 * (nu ** 2 - 1)):.6e}")

# %%
# Quasi-energies of a resonance.  The spectrum here is a generic nonlinear
# one (omega, zeta) near the N = 1 resonance; V is the coupling matrix element.
spectrum = SpectrumModel(energy=lambda n: 1.013 * n + 0.01 * n ** 2, r=20.0, omega=1.013,
                         zeta=0.02)
ctx = ResonanceContext(N=1, lam=0.002, V=1.0, spectrum=spectrum)
print(f"\nq = {mathieu_q(ctx):.3f}, nu(k=0) = {nu_of_k(ctx, 0):.3f}")
for k in (-4, -2, 0, 2, 4):
    level = quasi_energy(ctx, k)
    weights = {m: abs(c) ** 2 for m, c in floquet_coefficients(level, ctx).items() if abs(c) ** 2 > 1e-3}
    print(f"k={k:+d}  E={level.energy:.8f}  dominant |m>: {sorted(weights, key=weights.get)[-3:]}")
