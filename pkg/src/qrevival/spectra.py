"""Energy spectra of one-dimensional wells.

Two backends live here:

* closed-form (WKB-type) levels of the power-law well ``V0 |z/a|**k`` together
  with the frequency ``omega = E'(r)/hbar`` and nonlinearity
  ``zeta = E''(r)/hbar**2`` at a mean quantum number ``r``;
* a numerical eigensolver for an arbitrary potential on a grid, used as an
  independent check on the closed forms and as the eigenbasis for wave
  packet propagation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import linalg
from scipy.interpolate import CubicSpline
from scipy.special import gammaln

from ._unbounded import UNBOUNDED, Time

# |k - 2| below this is treated as the harmonic oscillator
HARMONIC_TOL = 1e-9


class ConvergenceError(RuntimeError):
    """Numerical eigenvalues moved by more than the tolerance under grid refinement."""


@dataclass(frozen=True)
class PowerLawSystem:
    """Undriven particle in the well ``V0 * |z / a| ** k_exp``."""

    V0: float = 1.0
    a: float = 1.0
    k_exp: float = 2.0
    mass: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("V0", "a", "mass", "hbar", "k_exp"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ValueError(f"PowerLawSystem.{name} must be positive and finite, got {value!r}")

    @property
    def is_harmonic(self) -> bool:
        return abs(self.k_exp - 2.0) < HARMONIC_TOL

    def potential(self, z, cap: Optional[float] = None):
        v = self.V0 * np.abs(np.asarray(z, dtype=float) / self.a) ** self.k_exp
        if cap is not None:
            v = np.minimum(v, cap)
        return v

    def turning_point(self, energy: float) -> float:
        return self.a * (energy / self.V0) ** (1.0 / self.k_exp)


@dataclass(frozen=True)
class SpectrumModel:
    """Energy function plus its first two derivatives at the mean quantum number ``r``.

    ``omega = E'(r)/hbar`` and ``zeta = E''(r)/hbar**2``.
    """

    energy: Callable[[float], float]
    r: float
    omega: float
    zeta: float
    hbar: float = 1.0

    @property
    def E_r(self) -> float:
        return float(self.energy(self.r))


def _check_domain(sys: PowerLawSystem):
    k = sys.k_exp
    if not k > 0:
        raise ValueError(f"power-law exponent must be positive, got {k!r}")


def _check_r(r):
    if not r > 0:
        raise ValueError(f"mean quantum number r must be positive, got {r!r}")


def powerlaw_energy(sys: PowerLawSystem, n):
    """WKB level ``E_n`` of the power-law well; ``n`` may be real and/or an array."""
    _check_domain(sys)
    n = np.asarray(n, dtype=float)
    if np.any(n < 0):
        raise ValueError("quantum number must be non-negative")
    k = sys.k_exp
    # Gamma ratio in log form so very large k stays finite
    log_ratio = gammaln(1 / k + 1.5) - gammaln(1 / k + 1) - gammaln(1.5)
    base = ((n + 0.5) * np.pi * sys.hbar / (2 * sys.a * np.sqrt(2 * sys.mass))
            * sys.V0 ** (1 / k) * np.exp(log_ratio))
    out = base ** (2 * k / (k + 2))
    return float(out) if out.ndim == 0 else out


def powerlaw_omega(sys: PowerLawSystem, r: float) -> float:
    _check_domain(sys)
    _check_r(r)
    k = sys.k_exp
    return (2 * k / (k + 2)) * powerlaw_energy(sys, r) / ((r + 0.5) * sys.hbar)


def powerlaw_zeta(sys: PowerLawSystem, r: float) -> float:
    _check_domain(sys)
    _check_r(r)
    if sys.is_harmonic:
        return 0.0
    k = sys.k_exp
    return (2 * k * (k - 2) / (k + 2) ** 2) * powerlaw_energy(sys, r) / ((r + 0.5) ** 2 * sys.hbar ** 2)


def powerlaw_spectrum(sys: PowerLawSystem, r: float) -> SpectrumModel:
    return SpectrumModel(
        energy=lambda n: powerlaw_energy(sys, n),
        r=r,
        omega=powerlaw_omega(sys, r),
        zeta=powerlaw_zeta(sys, r),
        hbar=sys.hbar,
    )


def unmodulated_times(sys: PowerLawSystem, r: float) -> tuple[float, Time]:
    """Classical period and quantum revival time of the undriven well.

    The revival time of the harmonic case is ``UNBOUNDED``.
    """
    _check_domain(sys)
    _check_r(r)
    k = sys.k_exp
    E_r = powerlaw_energy(sys, r)
    T0_cl = (2 * np.pi * sys.hbar / E_r) * ((k + 2) / (2 * k)) * (r + 0.5)
    if sys.is_harmonic:
        return T0_cl, UNBOUNDED
    T0_Q = (4 * np.pi * sys.hbar / E_r) * ((k + 2) ** 2 / (2 * k * (k - 2))) * (r + 0.5) ** 2
    return T0_cl, T0_Q


# --------------------------------------------------------------------------
# numerical backend


@dataclass
class NumericSpectrum:
    """Lowest eigenpairs of ``p**2/2m + V`` on a grid.

    ``vectors[:, n]`` is normalised so that ``sum(|v|**2) * dz == 1``.
    """

    levels: np.ndarray
    z: np.ndarray
    vectors: np.ndarray
    hbar: float
    method: str
    refinement_shift: float = 0.0
    mass: float = 1.0
    potential: Optional[np.ndarray] = field(default=None, repr=False)
    _spline: CubicSpline = field(init=False, repr=False)

    def __post_init__(self):
        n = np.arange(len(self.levels))
        self._spline = CubicSpline(n, self.levels)

    @property
    def dz(self) -> float:
        return float(self.z[1] - self.z[0])

    def energy(self, n):
        """Level energy; non-integer ``n`` is interpolated with a cubic spline."""
        n = np.asarray(n, dtype=float)
        if np.any(n < 0) or np.any(n > len(self.levels) - 1):
            raise ValueError("quantum number outside the computed range")
        out = np.where(n == np.round(n), self.levels[np.clip(np.round(n).astype(int), 0, len(self.levels) - 1)],
                       self._spline(n))
        return float(out) if out.ndim == 0 else out

    def model(self, r: float) -> SpectrumModel:
        """Spectrum model at ``r`` with derivatives by unit-step central differences."""
        if not (1 <= r <= len(self.levels) - 2):
            raise ValueError(f"r={r} needs levels r-1 and r+1 to be computed")
        e_minus, e_0, e_plus = self.energy(r - 1), self.energy(r), self.energy(r + 1)
        return SpectrumModel(
            energy=self.energy,
            r=r,
            omega=(e_plus - e_minus) / (2 * self.hbar),
            zeta=(e_plus - 2 * e_0 + e_minus) / self.hbar ** 2,
            hbar=self.hbar,
        )


def _fd_levels(potential, z_min, z_max, n_points, mass, hbar, n_levels):
    # interior points of a hard-wall box; psi vanishes at z_min and z_max
    z = np.linspace(z_min, z_max, n_points + 2)[1:-1]
    dz = z[1] - z[0]
    t = hbar ** 2 / (2 * mass * dz ** 2)
    diag = 2 * t + np.asarray(potential(z), dtype=float)
    off = np.full(n_points - 1, -t)
    w, v = linalg.eigh_tridiagonal(diag, off, select="i", select_range=(0, n_levels - 1))
    return z, w, v / np.sqrt(dz)


def fourier_hamiltonian(z, potential_values, mass, hbar):
    """Dense Fourier-grid Hamiltonian on a periodic grid.

    The kinetic part is exactly the operator applied by an FFT split-step
    propagator on the same grid.
    """
    n = len(z)
    dz = z[1] - z[0]
    p = 2 * np.pi * hbar * np.fft.fftfreq(n, d=dz)
    column = np.fft.ifft(p ** 2 / (2 * mass)).real
    h = linalg.circulant(column)
    h[np.diag_indices(n)] += potential_values
    return h


def _fourier_levels(potential, z_min, z_max, n_points, mass, hbar, n_levels):
    z = z_min + (z_max - z_min) * np.arange(n_points) / n_points
    dz = z[1] - z[0]
    h = fourier_hamiltonian(z, np.asarray(potential(z), dtype=float), mass, hbar)
    w, v = linalg.eigh(h, subset_by_index=(0, n_levels - 1), driver="evr")
    return z, w, v / np.sqrt(dz)


def numeric_spectrum(potential: Callable, z_range: tuple[float, float], mass: float, hbar: float,
                     n_levels: int, *, n_points: int = 4096, method: str = "fd",
                     rtol: float = 1e-4) -> NumericSpectrum:
    """Diagonalise ``H0 = p**2/2m + V(z)`` on a grid.

    Parameters
    ----------
    potential : callable
        ``V(z)`` evaluated on arrays.
    z_range : (z_min, z_max)
        Box.  ``"fd"`` puts hard walls at both ends; ``"fourier"`` treats the
        box as periodic (only sensible when ``V`` confines well inside it).
    n_levels : int
        Number of lowest levels returned.
    method : {"fd", "fourier"}
        ``"fd"`` is the three-point Laplacian.  The grid is refined once by a
        factor two and the two results are Richardson-extrapolated.
        ``"fourier"`` is the spectrally accurate Fourier-grid Hamiltonian,
        checked against a grid with half as many points.
    rtol : float
        Largest relative eigenvalue shift tolerated between the two grids.

    Raises
    ------
    ConvergenceError
        If the refinement check moves any level by more than ``rtol``.
    """
    z_min, z_max = z_range
    if not z_max > z_min:
        raise ValueError("z_range must be increasing")
    if n_levels < 1:
        raise ValueError("n_levels must be positive")

    if method == "fd":
        _, coarse, _ = _fd_levels(potential, z_min, z_max, n_points, mass, hbar, n_levels)
        z, fine, vectors = _fd_levels(potential, z_min, z_max, 2 * n_points + 1, mass, hbar, n_levels)
        levels = (4 * fine - coarse) / 3
        shift = np.max(np.abs(fine - coarse) / np.maximum(np.abs(fine), np.finfo(float).tiny))
    elif method == "fourier":
        z, levels, vectors = _fourier_levels(potential, z_min, z_max, n_points, mass, hbar, n_levels)
        _, coarse, _ = _fourier_levels(potential, z_min, z_max, n_points // 2, mass, hbar, n_levels)
        shift = np.max(np.abs(levels - coarse) / np.maximum(np.abs(levels), np.finfo(float).tiny))
    else:
        raise ValueError(f"unknown method {method!r}")

    if shift > rtol:
        raise ConvergenceError(
            f"levels shifted by a relative {shift:.3g} (> {rtol:g}) under grid refinement; "
            f"use more points or a larger box")
    # fix the sign convention: first lobe from the left is positive
    for j in range(vectors.shape[1]):
        col = vectors[:, j]
        idx = np.argmax(np.abs(col) > 1e-3 * np.max(np.abs(col)))
        if col[idx] < 0:
            vectors[:, j] = -col
    return NumericSpectrum(levels=np.asarray(levels), z=z, vectors=vectors, hbar=hbar,
                           method=method, refinement_shift=float(shift), mass=mass,
                           potential=np.asarray(potential(z), dtype=float))


def powerlaw_box(sys: PowerLawSystem, n_levels: int, fill: float = 0.7) -> tuple[float, float]:
    """Symmetric box whose edge puts the top level's WKB turning point at ``fill``."""
    z_t = sys.turning_point(powerlaw_energy(sys, n_levels))
    half = z_t / fill
    return -half, half


def powerlaw_numeric_spectrum(sys: PowerLawSystem, n_levels: int, *, n_points: int = 4096,
                              method: str = "fd", rtol: float = 1e-4,
                              z_range: Optional[tuple[float, float]] = None,
                              cap_factor: float = 1e5) -> NumericSpectrum:
    """Numerical levels of the power-law well.

    The potential is clipped at ``cap_factor`` times the top WKB level, which
    keeps the matrix well conditioned for steep wells (large ``k_exp``) while
    acting as a hard wall.
    """
    if z_range is None:
        z_range = powerlaw_box(sys, n_levels)
    cap = cap_factor * powerlaw_energy(sys, n_levels)
    return numeric_spectrum(lambda z: sys.potential(z, cap=cap), z_range, sys.mass, sys.hbar,
                            n_levels, n_points=n_points, method=method, rtol=rtol)
