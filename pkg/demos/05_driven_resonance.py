"""
Driven quartic well at the first resonance
==========================================

Propagate a packet under ``lam z sin(t)`` and compare the measured periods
with the predicted driven time scales.  The classical period is measured in
the frame rotating with the drive, the revival in the lab frame.  Takes
about half a minute.
"""

from qrevival import (DriveParams, PowerLawSystem, ResonanceContext, RotatingFrame, coupling_matrix_element,
                      detect_times, evolve, init_packet, powerlaw_grid, time_scales)

# V0 chosen so that mu = 0.1 on the N = 1 resonance at r = 10
system = PowerLawSystem(V0=4139.95487303247, k_exp=4.0, mass=400.0)
r, lam = 10, 0.05

grid, basis = powerlaw_grid(system, 40, 1024, dt=0.005)
V = coupling_matrix_element(basis, r, 1)
ts = time_scales(ResonanceContext(N=1, lam=lam, V=V, spectrum=basis.model(r)))
print(f"V = {V:.4f}, q = {ts.q:.3f}, mu = {ts.mu:.3f}, delta = {ts.delta:.3f}")
print(f"predicted Tl_cl = {ts.Tl_cl:.4f}, Tl_Q = {ts.Tl_Q:.3f}  (undriven T0_Q = {ts.T0_Q:.3f})")

# %%
state = init_packet(basis, r, 1.0, grid)
drive = DriveParams(lam=lam, N=1, V=V)
lab = detect_times(evolve(state, drive, 1.2 * ts.Tl_Q, 2))
rot = detect_times(evolve(state, drive, 1.2 * ts.Tl_Q, 2, frame=RotatingFrame(basis, r, 1)))
print(f"measured T_cl (rotating) = {rot.T_cl_est:.4f} ({(rot.T_cl_est - ts.Tl_cl) / ts.Tl_cl:+.2%})")
print(f"measured T_Q (lab)       = {lab.T_Q_est:.3f} ({(lab.T_Q_est - ts.Tl_Q) / ts.Tl_Q:+.2%})")
