"""Split-operator wave packet propagation and autocorrelation analysis.

This is the numerical oracle for the revival-time formulas: a packet built
from eigenstates of ``H0 = p**2/2m + V1(z)`` is evolved under
``H0 + lam * coupling(z) * sin t`` and the classical period and revival time
are read off its autocorrelation ``|<psi(0)|psi(t)>|**2``.

The kinetic operator is applied with FFTs, so the grid is periodic; the
confining potential must vanish the wave function well before the box
edges.  Leakage to the edges is treated as a configuration error.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy.signal import find_peaks

from .revival import DriveParams
from .spectra import NumericSpectrum, PowerLawSystem, numeric_spectrum, powerlaw_energy

NORM_TOL = 1e-8
EDGE_POINTS = 4


class GridTooSmallError(ValueError):
    """The packet has non-negligible amplitude at the box edge."""


class InstabilityError(RuntimeError):
    """Norm drift or edge leakage during propagation."""


@dataclass(frozen=True)
class Grid:
    z_min: float
    z_max: float
    n_points: int
    dt: float

    def __post_init__(self):
        n = self.n_points
        if n < 256 or n & (n - 1):
            raise ValueError(f"n_points must be a power of two >= 256, got {n}")
        if not self.z_max > self.z_min:
            raise ValueError("z_max must exceed z_min")
        if not self.dt > 0:
            raise ValueError("dt must be positive")

    @property
    def dz(self) -> float:
        return (self.z_max - self.z_min) / self.n_points

    @property
    def z(self) -> np.ndarray:
        return self.z_min + self.dz * np.arange(self.n_points)

    @property
    def p(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.n_points, d=self.dz)


@dataclass
class WavePacketState:
    grid: Grid
    psi: np.ndarray
    t: float
    potential: np.ndarray
    mass: float = 1.0
    hbar: float = 1.0

    def norm(self) -> float:
        return float(np.sum(np.abs(self.psi) ** 2) * self.grid.dz)

    def copy(self) -> "WavePacketState":
        return replace(self, psi=self.psi.copy())


@dataclass
class AutocorrelationSeries:
    """Autocorrelation ``A(t) = <psi(0)|psi(t)>`` sampled at ``times``."""

    times: np.ndarray
    amplitude: np.ndarray
    frame: str = "lab"
    final_state: Optional[WavePacketState] = field(default=None, repr=False)
    norms: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def values(self) -> np.ndarray:
        return np.clip(np.abs(self.amplitude) ** 2, 0.0, 1.0)


@dataclass
class RevivalEstimate:
    T_cl_est: Optional[float]
    T_Q_est: Optional[float]
    confidence: float
    cl_peaks: list = field(default_factory=list)


@dataclass
class RotatingFrame:
    """Frame rotating at ``1/N`` per quantum: ``C_n = <n|psi> exp(i (n - r) t / N)``."""

    basis: NumericSpectrum
    r: float
    N: int = 1


# --------------------------------------------------------------------------
# eigenbasis and initial packet


def grid_basis(grid: Grid, potential: Callable, mass: float, hbar: float, n_levels: int,
               *, rtol: float = 1e-4) -> NumericSpectrum:
    """Eigenstates of H0 on the propagation grid (Fourier-grid Hamiltonian).

    A single one of these states is stationary under the split-operator
    propagator up to the splitting error, which a finite-difference basis
    would not be.
    """
    return numeric_spectrum(potential, (grid.z_min, grid.z_max), mass, hbar, n_levels,
                            n_points=grid.n_points, method="fourier", rtol=rtol)


def max_stable_dt(basis: NumericSpectrum, steps_per_period: int = 20) -> float:
    """Largest step resolving the fastest retained eigenfrequency and the drive period."""
    e_max = float(np.max(np.abs(basis.levels)))
    return min(2 * np.pi * basis.hbar / (steps_per_period * e_max), 2 * np.pi / steps_per_period)


def powerlaw_grid(sys: PowerLawSystem, n_levels: int, n_points: int = 2048, *, dt: Optional[float] = None,
                  extent: float = 1.6, cap_factor: float = 5.0) -> tuple[Grid, NumericSpectrum]:
    """Propagation grid and eigenbasis for a power-law well.

    The box spans ``extent`` times the classical turning point of the highest
    retained level.  The potential is capped at ``cap_factor`` times that
    level's energy: an uncapped steep wall puts splitting errors at the
    Nyquist momentum, which then wrap around the periodic box.
    """
    e_top = powerlaw_energy(sys, n_levels)
    half = extent * sys.turning_point(e_top)
    cap = cap_factor * e_top
    coarse = Grid(-half, half, n_points, 1.0)
    basis = grid_basis(coarse, lambda z: sys.potential(z, cap=cap), sys.mass, sys.hbar, n_levels)
    step = max_stable_dt(basis) if dt is None else dt
    return replace(coarse, dt=step), basis


def packet_weights(n_levels: int, n0: float, width: float) -> np.ndarray:
    """Real amplitudes ``c_n`` with ``|c_n|**2`` Gaussian in ``n`` (std ``width``)."""
    n = np.arange(n_levels)
    if width == 0:
        c = (n == int(round(n0))).astype(float)
    else:
        c = np.exp(-((n - n0) ** 2) / (4 * width ** 2))
    return c / np.linalg.norm(c)


def init_packet(basis: NumericSpectrum, n0: float, width: float, grid: Grid) -> WavePacketState:
    """Gaussian superposition of the basis states centred on level ``n0``."""
    if len(basis.z) != grid.n_points or not np.allclose(basis.z, grid.z):
        raise ValueError("basis was computed on a different grid")
    if not 0 <= n0 <= len(basis.levels) - 1:
        raise ValueError("n0 outside the basis")
    c = packet_weights(len(basis.levels), n0, width)
    if c[-1] ** 2 > 1e-14:
        raise ValueError(f"basis of {len(basis.levels)} levels truncates the packet; compute more levels")
    psi = (basis.vectors @ c).astype(complex)
    edge = max(np.max(np.abs(psi[:EDGE_POINTS])), np.max(np.abs(psi[-EDGE_POINTS:])))
    if edge > 1e-8 * np.max(np.abs(psi)):
        raise GridTooSmallError(f"packet amplitude {edge:.3g} at the box edge; enlarge the grid")
    return WavePacketState(grid=grid, psi=psi, t=0.0, potential=basis.potential,
                           mass=basis.mass, hbar=basis.hbar)


def coupling_matrix_element(basis: NumericSpectrum, r: float, N: int, coupling: Callable = lambda z: z) -> float:
    """``|<r+N| coupling(z) |r>|`` from the numerical eigenstates (``r`` rounded)."""
    n = int(round(r))
    if n + N >= len(basis.levels):
        raise ValueError("basis does not contain level r + N")
    v = basis.vectors
    return float(abs(np.sum(v[:, n + N] * coupling(basis.z) * v[:, n]) * basis.dz))


# --------------------------------------------------------------------------
# propagation


def energy_expectation(state: WavePacketState) -> float:
    """``<H0>`` with the same FFT kinetic operator the propagator uses."""
    g = state.grid
    phi = np.fft.fft(state.psi)
    kinetic = np.sum((state.hbar * g.p) ** 2 / (2 * state.mass) * np.abs(phi) ** 2) / g.n_points
    potential = np.sum(state.potential * np.abs(state.psi) ** 2)
    return float((kinetic + potential) * g.dz / state.norm())


def evolve(state: WavePacketState, drive: Optional[DriveParams], t_end: float, sample_every: int = 1,
           *, frame: Optional[RotatingFrame] = None, reference: Optional[np.ndarray] = None,
           edge_tol: float = 1e-6) -> AutocorrelationSeries:
    """Strang split-step evolution from ``state.t`` to ``t_end``.

    Each step is a half kinetic step, the full potential step with the drive
    evaluated at the step midpoint, and another half kinetic step.  Runs
    backwards in time when ``t_end < state.t``.  Consecutive half kinetic
    steps between samples are fused.

    The autocorrelation against ``reference`` (default: the initial wave
    function) is recorded every ``sample_every`` steps; with ``frame`` it is
    taken in the rotating frame instead.  The input state is not modified;
    the final state is attached to the returned series.  ``edge_tol`` bounds
    the probability in the outermost grid points.
    """
    if sample_every < 1:
        raise ValueError("sample_every must be >= 1")
    g = state.grid
    span = t_end - state.t
    n_steps = int(round(abs(span) / g.dt))
    dt = np.copysign(g.dt, span) if n_steps else g.dt
    hbar, z = state.hbar, g.z
    lam = drive.lam if drive is not None else 0.0
    coupling = drive.coupling(z) if lam else None

    kin = (hbar * g.p) ** 2 / (2 * state.mass)
    half_kick = np.exp(-0.5j * kin * dt / hbar)
    full_kick = half_kick * half_kick
    static_phase = np.exp(-1j * state.potential * dt / hbar)

    psi = state.psi.copy()
    psi0 = psi.copy() if reference is None else np.asarray(reference, dtype=complex)
    dz = g.dz

    if frame is not None:
        c0 = frame.basis.vectors.T @ psi0 * dz
        keep = np.nonzero(np.abs(c0) > 1e-14)[0]
        proj = frame.basis.vectors[:, keep].T * dz
        c0 = c0[keep]
        offsets = (keep - frame.r) / frame.N

        def amp(psi_, t_):
            return np.sum(np.conj(c0) * (proj @ psi_) * np.exp(1j * offsets * t_))
    else:
        def amp(psi_, t_):
            return np.vdot(psi0, psi_) * dz

    t = state.t
    times, amps, norms = [t], [amp(psi, t)], [state.norm()]
    done = 0
    while done < n_steps:
        block = min(sample_every, n_steps - done)
        psi = np.fft.ifft(half_kick * np.fft.fft(psi))
        for i in range(block):
            t_mid = t + (done + i + 0.5) * dt
            if lam:
                psi *= static_phase * np.exp(-1j * lam * np.sin(t_mid) * coupling * dt / hbar)
            else:
                psi *= static_phase
            if i < block - 1:
                psi = np.fft.ifft(full_kick * np.fft.fft(psi))
        psi = np.fft.ifft(half_kick * np.fft.fft(psi))
        done += block
        t_now = state.t + done * dt
        nrm = float(np.sum(np.abs(psi) ** 2) * dz)
        if abs(nrm - norms[0]) > NORM_TOL:
            raise InstabilityError(f"norm drifted to {nrm!r} at t={t_now:g}")
        edge = (np.sum(np.abs(psi[:EDGE_POINTS]) ** 2) + np.sum(np.abs(psi[-EDGE_POINTS:]) ** 2)) * dz
        if edge > edge_tol:
            raise InstabilityError(f"wave function reached the box edge (probability {edge:.3g}) "
                                   f"at t={t_now:g}")
        times.append(t_now)
        amps.append(amp(psi, t_now))
        norms.append(nrm)

    final = replace(state, psi=psi, t=state.t + n_steps * dt)
    return AutocorrelationSeries(times=np.array(times), amplitude=np.array(amps),
                                 frame="lab" if frame is None else "rotating",
                                 final_state=final, norms=np.array(norms))


# --------------------------------------------------------------------------
# time-scale extraction


def _refine_peak(t, v, i):
    """Quadratic interpolation of a discrete maximum."""
    if 0 < i < len(v) - 1:
        y0, y1, y2 = v[i - 1], v[i], v[i + 1]
        denom = y0 - 2 * y1 + y2
        if denom < 0:
            shift = 0.5 * (y0 - y2) / denom
            return t[i] + shift * (t[1] - t[0]), y1 - 0.25 * (y0 - y2) * shift
    return t[i], v[i]


def detect_times(series: AutocorrelationSeries, *, prominence: float = 0.5, max_peaks: int = 5,
                 revival_threshold: float = 0.7, collapse_level: Optional[float] = None,
                 late_start: float = 0.5, min_prominence: float = 0.02) -> RevivalEstimate:
    """Classical period and revival time from ``|A(t)|**2``.

    Classical period: mean spacing of the early peaks, starting from the
    ``t = 0`` maximum.  Peaks are taken in order while their prominence is at
    least ``prominence`` times their height and their spacing stays within
    25% of the running estimate.

    Revival time: in the late part of the series (``t >= late_start * t_max``,
    which excludes the half revival when the series ends before twice the
    revival time), the maximum of the envelope through the major peaks,
    located by a parabola through the logarithms of the top peak and its
    neighbours.  It is reported only if the envelope exceeds
    ``revival_threshold`` and collapsed below ``collapse_level`` (default
    half the threshold) earlier.
    """
    t = np.asarray(series.times, dtype=float)
    v = series.values
    if collapse_level is None:
        collapse_level = 0.5 * revival_threshold
    peaks, props = find_peaks(v, prominence=min_prominence)
    proms = props["prominences"]
    major = [i for i, p in zip(peaks, proms) if p >= prominence * v[i]]

    cl_times = [t[0]]
    period = None
    for i in major:
        tp, _ = _refine_peak(t, v, i)
        gap = tp - cl_times[-1]
        if period is not None and abs(gap - period) > 0.25 * period:
            break
        cl_times.append(tp)
        period = (cl_times[-1] - cl_times[0]) / (len(cl_times) - 1)
        if len(cl_times) > max_peaks:
            break
    T_cl = period

    T_Q, confidence = None, 0.0
    t_late = t[0] + late_start * (t[-1] - t[0])
    late = [i for i in major if t[i] >= t_late]
    if late:
        heights = np.array([v[i] for i in late])
        j = int(np.argmax(heights))
        top = late[j]
        earlier = v[(t > (cl_times[1] if len(cl_times) > 1 else t[0])) & (t < t[top])]
        collapsed = earlier.size > 0 and np.min(earlier) < collapse_level
        # the envelope itself must have collapsed, not just the fast oscillation
        env_before = [v[i] for i in major if t[0] < t[i] < t[top]]
        collapsed = collapsed and (not env_before or min(env_before) < collapse_level)
        if heights[j] >= revival_threshold and collapsed:
            confidence = float(heights[j])
            pts = [_refine_peak(t, v, late[jj]) for jj in (j - 1, j, j + 1) if 0 <= jj < len(late)]
            T_Q = pts[1][0] if len(pts) == 3 else _refine_peak(t, v, top)[0]
            if len(pts) == 3 and all(h > 0 for _, h in pts):
                x = np.array([p[0] for p in pts])
                y = np.log([p[1] for p in pts])
                a2, a1, _ = np.polyfit(x - x[1], y, 2)
                if a2 < 0:
                    vertex = x[1] - a1 / (2 * a2)
                    if x[0] <= vertex <= x[2]:
                        T_Q = float(vertex)
    return RevivalEstimate(T_cl_est=T_cl, T_Q_est=T_Q, confidence=confidence, cl_peaks=cl_times[1:])
