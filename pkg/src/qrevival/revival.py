"""Classical periods and quantum revival times of a driven nonlinear resonance.

Given the undriven frequency ``omega`` and nonlinearity ``zeta`` at the
packet's mean quantum number, the drive ``lam * V(z) * sin t`` near the
``N``-th resonance modifies the classical period and the revival time as

    Tl_cl = (1 - M_cl) * T0_cl * delta
    Tl_Q  = (1 - M_Q) * T0_Q

with ``delta = (1 - 1/(N omega))**-1``.  ``T0_Q`` is ``UNBOUNDED`` for a
linear spectrum; arithmetic involving it goes through rates (``1/T``).

Sign convention note: the modification factors are taken from their
explicit closed forms (``M_cl <= 0 <= M_Q`` for ``|mu| < 1``).  The asymptotic
weak-nonlinearity relation is quoted elsewhere as ``M_Q = -3 M_cl = -3 alpha``
with ``alpha > 0``, which contradicts those signs.  ``weak_regime`` uses
``M_cl = -alpha``, ``M_Q = +3 alpha``: the substitution that agrees with the
closed forms and makes the weak relation an exact identity.
"""

from __future__ import annotations

import math

import numpy as np
from dataclasses import dataclass, field
from typing import Callable, Optional

from ._unbounded import UNBOUNDED, Time, rate
from .mathieu import ResonanceContext, mathieu_q, nu_of_k
from .spectra import PowerLawSystem, unmodulated_times

EPS = 1e-9


class ResonanceSingularityError(ArithmeticError):
    """``omega == 1/N``: the resonance factor delta diverges."""


class PerturbationBreakdownError(ArithmeticError):
    """``|mu| == 1``: the perturbative modification factors diverge."""


class DerivativeInstabilityError(ArithmeticError):
    """Finite-difference derivative estimates at ``h`` and ``h/2`` disagree."""


@dataclass
class DriveParams:
    """Drive ``lam * coupling(z) * sin(t)`` near the ``N``-th resonance.

    ``V`` is the scalar resonant matrix element of ``coupling``; ``None``
    means it has not been estimated yet.
    """

    lam: float = 0.0
    N: int = 1
    V: Optional[float] = None
    coupling: Callable = field(default=lambda z: z, repr=False)

    def __post_init__(self):
        if not self.lam >= 0:
            raise ValueError(f"modulation strength must be non-negative, got {self.lam!r}")
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"resonance order N must be a positive integer, got {self.N!r}")
        self.N = int(self.N)


@dataclass
class TimeScales:
    delta: float
    mu: float
    M_cl: float
    M_Q: float
    T0_cl: float
    T0_Q: Time
    Tl_cl: float
    Tl_Q: Time
    alpha: float
    beta: Optional[float]
    q: Optional[float] = None
    nu0: Optional[float] = None


@dataclass
class RegimeReport:
    regime: str
    residual: float
    C_k: Optional[float] = None
    factor: Optional[float] = None
    general_residual: Optional[float] = None


# --------------------------------------------------------------------------
# elementary factors


def delta(omega: float, N: int, *, eps: float = EPS) -> float:
    """Resonance factor ``(1 - 1/(N omega))**-1``."""
    omega_N = 1.0 / N
    if abs(omega - omega_N) <= eps * max(abs(omega), omega_N):
        raise ResonanceSingularityError(f"omega={omega!r} sits on the N={N} resonance; delta diverges")
    return 1.0 / (1.0 - omega_N / omega)


def mu(N: int, hbar: float, zeta: float, delta: float, omega: float) -> float:
    if omega == 0:
        raise ValueError("omega must be non-zero")
    return N ** 2 * hbar * zeta * delta / (2 * omega)


def mod_factors(lam, V, zeta, delta, omega, mu, *, eps: float = EPS) -> tuple[float, float]:
    """Modification factors ``(M_cl, M_Q)`` of the classical period and revival time."""
    s = (lam * V * zeta * delta ** 2 / omega ** 2) ** 2
    if s == 0:
        return 0.0, 0.0
    one_minus = 1 - mu * mu
    if abs(one_minus) < eps:
        raise PerturbationBreakdownError(f"|mu|={abs(mu)!r} is 1; modification factors diverge")
    M_cl = -0.5 * s / one_minus ** 2
    M_Q = 0.5 * s * (3 + mu * mu) / one_minus ** 3
    return M_cl, M_Q


def driven_times(T0_cl: float, T0_Q: Time, delta: float, M_cl: float, M_Q: float) -> tuple[float, Time]:
    Tl_cl = (1 - M_cl) * T0_cl * delta
    Tl_Q = UNBOUNDED if T0_Q is UNBOUNDED else (1 - M_Q) * T0_Q
    return Tl_cl, Tl_Q


def weak_alpha(lam, V, zeta, omega) -> float:
    return 0.5 * (lam * V * zeta / omega ** 2) ** 2


def strong_beta(lam, V, N, zeta, hbar) -> Optional[float]:
    if zeta == 0:
        return 0.0 if lam * V == 0 else None
    return 0.5 * (4 * lam * V / (N ** 2 * zeta * hbar ** 2)) ** 2


def time_scales(ctx: ResonanceContext) -> TimeScales:
    """All time scales for one resonance context.

    With no drive (``lam == 0``) there is no resonance and ``delta`` is 1.
    """
    sp = ctx.spectrum
    omega, zeta, hbar, N = sp.omega, sp.zeta, sp.hbar, ctx.N
    V = 0.0 if ctx.V is None else ctx.V
    d = 1.0 if ctx.lam == 0 else delta(omega, N)
    m = mu(N, hbar, zeta, d, omega)
    M_cl, M_Q = mod_factors(ctx.lam, V, zeta, d, omega, m)
    T0_cl = 2 * math.pi / omega
    T0_Q = UNBOUNDED if zeta == 0 else 4 * math.pi / (hbar * zeta)
    Tl_cl, Tl_Q = driven_times(T0_cl, T0_Q, d, M_cl, M_Q)
    q = nu0 = None
    if zeta != 0:
        q = mathieu_q(ctx) if ctx.V is not None else None
        nu0 = nu_of_k(ctx, 0)
    return TimeScales(delta=d, mu=m, M_cl=M_cl, M_Q=M_Q, T0_cl=T0_cl, T0_Q=T0_Q, Tl_cl=Tl_cl, Tl_Q=Tl_Q,
                      alpha=weak_alpha(ctx.lam, V, zeta, omega), beta=strong_beta(ctx.lam, V, N, zeta, hbar),
                      q=q, nu0=nu0)


# --------------------------------------------------------------------------
# time scales from an arbitrary spectrum


_STENCILS = {
    1: ((-1, -0.5), (1, 0.5)),
    2: ((-1, 1.0), (0, -2.0), (1, 1.0)),
    3: ((-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)),
}


def _central_derivative(f, x, j, h):
    return sum(w * f(x + o * h) for o, w in _STENCILS[j]) / h ** j


def timescale_j(energy: Callable[[float], float], I0: float, j: int, hbar: float, *,
                h: Optional[float] = None, rtol: float = 1e-3) -> Time:
    """``2 pi / omega_j`` with ``omega_j = E^(j)(n0) / (j! hbar)`` at ``n0 = I0/hbar``.

    ``j = 1`` gives the classical period, ``j = 2`` the revival time and
    ``j = 3`` the super-revival time.  The derivative is a central difference
    at ``h`` and ``h/2``, Richardson-combined.  A derivative that is zero up
    to round-off gives ``UNBOUNDED``.
    """
    if j not in _STENCILS:
        raise ValueError("j must be 1, 2 or 3")
    n0 = I0 / hbar
    if h is None:
        h = (1e-3 if j == 1 else 1e-2) * max(1.0, abs(n0))
    d_h = _central_derivative(energy, n0, j, h)
    d_h2 = _central_derivative(energy, n0, j, h / 2)
    # round-off floor of the (h/2) stencil
    scale = max(abs(energy(n0 + o * h / 2)) for o, _ in _STENCILS[j])
    noise = 64 * 2.2e-16 * scale * sum(abs(w) for _, w in _STENCILS[j]) / (h / 2) ** j
    if abs(d_h) <= noise and abs(d_h2) <= noise:
        return UNBOUNDED
    if abs(d_h - d_h2) > rtol * max(abs(d_h), abs(d_h2)) + noise:
        raise DerivativeInstabilityError(
            f"order-{j} derivative estimates {d_h!r} (h={h:g}) and {d_h2!r} (h={h / 2:g}) disagree")
    deriv = (4 * d_h2 - d_h) / 3
    omega_j = deriv / (math.factorial(j) * hbar)
    return 2 * math.pi / omega_j


# --------------------------------------------------------------------------
# regimes


def classify_regime(zeta, mu_value, q, beta, *, weak_mu=0.1, weak_q=1.0, strong_q=1.0, strong_beta_max=0.1):
    """Label a parameter point ``vanishing``, ``weak``, ``strong`` or ``intermediate``."""
    if zeta == 0:
        return "vanishing"
    q_abs = abs(q) if q is not None else 0.0
    if abs(mu_value) < weak_mu and q_abs < weak_q:
        return "weak"
    if q_abs >= strong_q and beta is not None and abs(beta) < strong_beta_max:
        return "strong"
    return "intermediate"


def _weak_residual(T0_cl, T0_Q, Tl_cl, Tl_Q, d):
    lhs = 3 * Tl_cl * T0_Q + d * T0_cl * Tl_Q
    rhs = 4 * d * T0_Q * T0_cl
    return (lhs - rhs) / abs(rhs)


def _strong_residual(T0_cl, T0_Q, Tl_cl, Tl_Q, d):
    return (Tl_cl * T0_Q - d * T0_cl * Tl_Q) / abs(Tl_cl * T0_Q)


def _weak_rate_residual(T0_cl, T0_Q, Tl_cl, Tl_Q, d):
    # weak relation divided by T0_Q * Tl_Q; unbounded times contribute zero rates
    lhs = 3 * Tl_cl * rate(Tl_Q) + d * T0_cl * rate(T0_Q)
    rhs = 4 * d * T0_cl * rate(Tl_Q)
    scale = max(abs(lhs), abs(rhs))
    return 0.0 if scale == 0 else (lhs - rhs) / scale


def weak_regime(ctx: ResonanceContext, times: TimeScales) -> RegimeReport:
    """Residual of ``3 Tl_cl T0_Q + delta T0_cl Tl_Q = 4 delta T0_Q T0_cl``.

    ``residual`` substitutes ``M_cl = -alpha``, ``M_Q = 3 alpha`` (exact
    identity); ``general_residual`` uses the closed-form time scales in
    ``times``.
    """
    sp = ctx.spectrum
    a = weak_alpha(ctx.lam, ctx.V or 0.0, sp.zeta, sp.omega)
    d, T0_cl, T0_Q = times.delta, times.T0_cl, times.T0_Q
    Tl_cl, Tl_Q = driven_times(T0_cl, T0_Q, d, -a, 3 * a)
    if T0_Q is UNBOUNDED:
        return RegimeReport("vanishing", _weak_rate_residual(T0_cl, T0_Q, Tl_cl, Tl_Q, d), factor=a,
                            general_residual=_weak_rate_residual(T0_cl, T0_Q, times.Tl_cl, times.Tl_Q, d))
    return RegimeReport("weak", _weak_residual(T0_cl, T0_Q, Tl_cl, Tl_Q, d), factor=a,
                        general_residual=_weak_residual(T0_cl, T0_Q, times.Tl_cl, times.Tl_Q, d))


def strong_regime(ctx: ResonanceContext, times: TimeScales) -> RegimeReport:
    """Residual of ``Tl_cl T0_Q - delta T0_cl Tl_Q = 0`` with ``M_cl = M_Q = -beta``."""
    if times.T0_Q is UNBOUNDED:
        raise ValueError("the strong-nonlinearity relation needs a finite revival time")
    sp = ctx.spectrum
    b = strong_beta(ctx.lam, ctx.V or 0.0, ctx.N, sp.zeta, sp.hbar)
    d, T0_cl, T0_Q = times.delta, times.T0_cl, times.T0_Q
    Tl_cl, Tl_Q = driven_times(T0_cl, T0_Q, d, -b, -b)
    return RegimeReport("strong", _strong_residual(T0_cl, T0_Q, Tl_cl, Tl_Q, d), factor=b,
                        general_residual=_strong_residual(T0_cl, T0_Q, times.Tl_cl, times.Tl_Q, d))


def powerlaw_C(sys: PowerLawSystem, r: float, delta: float) -> float:
    k = sys.k_exp
    if sys.is_harmonic:
        raise ValueError("C_k is undefined for the harmonic well (k = 2)")
    return (2 / delta) * ((k + 2) / (k - 2)) * (r + 0.5)


def powerlaw_interdependence(sys: PowerLawSystem, r: float, delta: float, regime: str,
                             drive: Optional[DriveParams] = None) -> RegimeReport:
    """Check the linear law between ``Tl_Q`` and ``Tl_cl`` for a power-law well.

    weak: ``Tl_Q = -3 C_k Tl_cl + 4 T0_Q``; strong: ``Tl_Q = C_k Tl_cl``.
    The residual is normalised by ``|Tl_Q|``.
    """
    from .spectra import powerlaw_omega, powerlaw_zeta

    C = powerlaw_C(sys, r, delta)
    T0_cl, T0_Q = unmodulated_times(sys, r)
    lam = drive.lam if drive else 0.0
    V = (drive.V or 0.0) if drive else 0.0
    N = drive.N if drive else 1
    omega, zeta = powerlaw_omega(sys, r), powerlaw_zeta(sys, r)
    if regime == "weak":
        a = weak_alpha(lam, V, zeta, omega)
        Tl_cl, Tl_Q = driven_times(T0_cl, T0_Q, delta, -a, 3 * a)
        predicted = -3 * C * Tl_cl + 4 * T0_Q
        factor = a
    elif regime == "strong":
        b = strong_beta(lam, V, N, zeta, sys.hbar)
        Tl_cl, Tl_Q = driven_times(T0_cl, T0_Q, delta, -b, -b)
        predicted = C * Tl_cl
        factor = b
    else:
        raise ValueError("regime must be 'weak' or 'strong'")
    return RegimeReport(regime, (Tl_Q - predicted) / abs(Tl_Q), C_k=C, factor=factor)


# --------------------------------------------------------------------------
# randomized identity harness


def random_context(rng, *, margin: float = 0.05, mu_max: float = 0.9) -> ResonanceContext:
    """A random admissible resonance of a power-law well.

    Exponent ``k`` in ``(0, 10]`` away from 2, drive off the singular
    resonance by a relative ``margin``, and ``|mu| < mu_max``.
    """
    from .spectra import powerlaw_spectrum

    while True:
        k = float(rng.uniform(0.1, 10.0))
        if abs(k - 2) < margin:
            continue
        system = PowerLawSystem(V0=float(10 ** rng.uniform(-1, 1)), a=float(10 ** rng.uniform(-0.5, 0.5)),
                                k_exp=k, mass=float(10 ** rng.uniform(-0.5, 0.5)),
                                hbar=float(rng.uniform(0.1, 2.0)))
        sp = powerlaw_spectrum(system, float(rng.uniform(1.0, 50.0)))
        N = int(rng.integers(1, 4))
        if abs(sp.omega * N - 1) < margin:
            continue
        d = 1.0 / (1.0 - 1.0 / (N * sp.omega))
        if abs(mu(N, sp.hbar, sp.zeta, d, sp.omega)) >= mu_max:
            continue
        return ResonanceContext(N=N, lam=float(rng.uniform(0.0, 0.5)), V=float(rng.uniform(0.01, 2.0)),
                                spectrum=sp)


def identity_residuals(rng, draws: int) -> tuple[np.ndarray, np.ndarray]:
    """Weak and strong relation residuals over ``draws`` random admissible contexts."""
    weak = np.empty(draws)
    strong = np.empty(draws)
    for i in range(draws):
        ctx = random_context(rng)
        ts = time_scales(ctx)
        weak[i] = weak_regime(ctx, ts).residual
        strong[i] = strong_regime(ctx, ts).residual
    return weak, strong
