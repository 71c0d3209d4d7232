"""Recurrence times of periodically driven one-dimensional quantum systems.

Modules
-------
spectra
    Closed-form power-law levels, ``omega``/``zeta`` at a mean quantum
    number, and a numerical eigensolver.
mathieu
    Mathieu characteristic values of fractional order (tridiagonal and
    continued-fraction backends) and the quasi-energies of a driven
    nonlinear resonance.
revival
    Classical periods, revival times and their modification by the drive.
propagate
    Split-operator wave packet propagation and autocorrelation analysis.
cli
    ``qrevival`` command-line front end.
"""

__version__ = "0.1.0"

from ._unbounded import UNBOUNDED, Unbounded, is_unbounded, rate
from .mathieu import (MathieuConvergenceError, MathieuParams, QuasiEnergyLevel, ResonanceContext,
                      VanishingNonlinearityError, characteristic_grid, characteristic_value, floquet_coefficients,
                      mathieu_params, mathieu_q, mathieu_solution, nu_of_k, quasi_energy, quasi_energy_value)
from .propagate import (AutocorrelationSeries, Grid, GridTooSmallError, InstabilityError, RevivalEstimate,
                        RotatingFrame, WavePacketState, coupling_matrix_element, detect_times, energy_expectation,
                        evolve, grid_basis, init_packet, max_stable_dt, packet_weights, powerlaw_grid)
from .revival import (DriveParams, PerturbationBreakdownError, RegimeReport, ResonanceSingularityError, TimeScales,
                      classify_regime, delta, driven_times, mod_factors, mu, powerlaw_C, powerlaw_interdependence,
                      strong_beta, strong_regime, time_scales, timescale_j, weak_alpha, weak_regime)
from .spectra import (ConvergenceError, NumericSpectrum, PowerLawSystem, SpectrumModel, numeric_spectrum,
                      powerlaw_energy, powerlaw_numeric_spectrum, powerlaw_omega, powerlaw_spectrum, powerlaw_zeta,
                      unmodulated_times)
