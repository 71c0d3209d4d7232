"""Mathieu characteristic values of real (fractional) order and nonlinear-resonance quasi-energies.

The characteristic value ``a_nu(q)`` is the ``a`` for which

    y'' + (a - 2 q cos 2z) y = 0

has a Floquet solution ``exp(i nu z) * P(z)`` with ``P`` pi-periodic.  In the
basis ``exp(i (nu + 2n) z)`` the equation is the symmetric tridiagonal
recurrence

    (nu + 2n)**2 c_n + q (c_{n-1} + c_{n+1}) = a c_n

and ``a_nu(q)`` is the eigenvalue continuously connected to ``nu**2`` at q = 0.
For integer orders the q = 0 level is doubly degenerate; the recurrence is
then split into its even (cosine-type, default) and odd (sine-type) parts.

Two solvers are provided and agree to round-off: a truncated tridiagonal
eigenproblem (LAPACK) and the continued-fraction characteristic function
evaluated by backward recurrence and rooted with Brent's method.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import linalg, optimize

from .spectra import SpectrumModel

MAX_NU = 50.0
MAX_Q = 1e4
M_START = 20
M_CAP = 2 ** 12
CONV_TOL = 1e-12
INTEGER_TOL = 1e-12


class MathieuConvergenceError(RuntimeError):
    def __init__(self, message, last_two=None):
        super().__init__(message)
        self.last_two = last_two


class VanishingNonlinearityError(ValueError):
    """The spectrum has zeta == 0, so the Mathieu reduction does not exist."""


@dataclass(frozen=True)
class MathieuParams:
    nu: float
    q: float
    a_char: float


def _integer_order(nu):
    m = round(nu)
    return int(m) if abs(nu - m) < INTEGER_TOL else None


def _check_args(nu, q, branch, max_nu, max_q):
    if not (np.isfinite(nu) and np.isfinite(q)):
        raise ValueError("nu and q must be finite")
    if abs(nu) > max_nu:
        raise ValueError(f"|nu|={abs(nu)} exceeds the configured maximum {max_nu}")
    if abs(q) > max_q:
        raise ValueError(f"|q|={abs(q)} exceeds the configured maximum {max_q}")
    if branch not in ("even", "odd"):
        raise ValueError("branch must be 'even' or 'odd'")
    m = _integer_order(nu)
    if branch == "odd" and m == 0:
        raise ValueError("order 0 has no odd (sine-type) solution")


# --------------------------------------------------------------------------
# tridiagonal backend


def _chain_matrix(nu, q, M, branch):
    """Diagonal, off-diagonal, basis exponents and target index of the truncated recurrence.

    Works on |nu|; the exponents are returned for |nu|.
    """
    nu = abs(nu)
    m = _integer_order(nu)
    if m is None:
        lo = -M - int(math.floor(nu))
        n = np.arange(lo, M + 1)
        s = nu + 2.0 * n
        diag = s ** 2
        off = np.full(len(s) - 1, float(q))
        target = int(np.count_nonzero(diag < nu * nu))
        return diag, off, s, target
    start = m % 2
    if start == 0 and branch == "odd":
        start = 2
    s = np.arange(start, m + 2 * M + 1, 2, dtype=float)
    diag = s ** 2
    off = np.full(len(s) - 1, float(q))
    if s[0] == 0:
        off[0] = math.sqrt(2.0) * q
    elif s[0] == 1:
        diag[0] += q if branch == "even" else -q
    target = int(np.searchsorted(s, m))
    return diag, off, s, target


def _tridiagonal_solve(nu, q, M, branch, vectors=False):
    diag, off, s, target = _chain_matrix(nu, q, M, branch)
    if vectors:
        w, v = linalg.eigh_tridiagonal(diag, off, select="i", select_range=(target, target))
        return w[0], v[:, 0], s
    w = linalg.eigh_tridiagonal(diag, off, select="i", select_range=(target, target), eigvals_only=True)
    return w[0], None, s


def _adaptive(solve, nu, q, branch):
    M = max(M_START, int(math.ceil(abs(nu))) + M_START // 2)
    history = [solve(nu, q, M, branch)]
    while True:
        M *= 2
        if M > M_CAP:
            raise MathieuConvergenceError(
                f"characteristic value for nu={nu}, q={q} did not converge by cutoff {M_CAP}; "
                f"last two iterates {history[-2][0]!r}, {history[-1][0]!r}",
                last_two=(history[-2][0], history[-1][0]))
        current = solve(nu, q, M, branch)
        if abs(current[0] - history[-1][0]) <= CONV_TOL * max(1.0, abs(current[0])):
            return current
        history.append(current)


def characteristic_value(nu: float, q: float, *, branch: str = "even", method: str = "tridiagonal",
                         max_nu: float = MAX_NU, max_q: float = MAX_Q) -> float:
    """Characteristic value ``a_nu(q)`` on the branch through ``nu**2``.

    Parameters
    ----------
    nu : float
        Real order.  ``a`` is even in ``nu``.
    q : float
        Mathieu parameter (any sign).
    branch : {"even", "odd"}
        Only used for integer ``nu``: the cosine-type (``a_m``) or sine-type
        (``b_m``) solution.
    method : {"tridiagonal", "contfrac"}
        Solver backend.

    Examples
    --------
    >>> characteristic_value(0.3, 0.0)
    0.09
    >>> round(characteristic_value(1, 1.0), 8)
    1.85910807
    """
    _check_args(nu, q, branch, max_nu, max_q)
    if q == 0:
        return float(nu) * float(nu)
    if method == "tridiagonal":
        return float(_adaptive(lambda *a: _tridiagonal_solve(*a)[:1], nu, q, branch)[0])
    if method == "contfrac":
        return float(_adaptive(lambda *a: (_contfrac_root(*a),), nu, q, branch)[0])
    raise ValueError(f"unknown method {method!r}")


def mathieu_params(nu, q, **kwargs) -> MathieuParams:
    return MathieuParams(nu=nu, q=q, a_char=characteristic_value(nu, q, **kwargs))


def mathieu_solution(nu: float, q: float, *, branch: str = "even",
                     max_nu: float = MAX_NU, max_q: float = MAX_Q):
    """Characteristic value and normalised Fourier coefficients of the Floquet solution.

    Returns ``(a, coeffs)`` where ``coeffs[n]`` multiplies ``exp(i (nu + 2n) z)``.
    The coefficients are real, the largest one positive, and
    ``sum(|c_n|**2) == 1``.  Negligible entries (below 1e-300) are dropped.
    """
    _check_args(nu, q, branch, max_nu, max_q)
    if q == 0:
        a, vec, s = float(nu) * float(nu), np.array([1.0]), np.array([abs(nu)])
    else:
        a, vec, s = _adaptive(lambda *x: _tridiagonal_solve(*x, vectors=True), nu, q, branch)

    full: dict[float, float] = {}
    if _integer_order(nu) is None or q == 0:
        for sj, cj in zip(s, vec):
            full[sj] = cj
    else:
        sign = 1.0 if branch == "even" else -1.0
        for sj, cj in zip(s, vec):
            if sj == 0:
                full[0.0] = cj
            else:
                full[sj] = cj / math.sqrt(2.0)
                full[-sj] = sign * cj / math.sqrt(2.0)
    if nu < 0:
        # solution for -nu is the mirror image of the one for |nu|
        full = {-sj: cj for sj, cj in full.items()}

    coeffs = {}
    for sj, cj in full.items():
        if abs(cj) < 1e-300:
            continue
        coeffs[int(round((sj - nu) / 2))] = complex(cj)
    norm = math.sqrt(sum(abs(c) ** 2 for c in coeffs.values()))
    biggest = max(coeffs.values(), key=abs)
    phase = biggest / abs(biggest)
    coeffs = {n: c / (norm * phase) for n, c in sorted(coeffs.items())}
    return float(a), coeffs


# --------------------------------------------------------------------------
# continued-fraction backend


def _cf_chain(nu, q, depth, branch):
    """Recurrence coefficients as plain Python lists: diagonal, couplings, target index."""
    nu = abs(nu)
    m = _integer_order(nu)
    d, e = [], []
    if m is None:
        lowest = -depth - int(math.floor(nu))
        for n in range(lowest, depth + 1):
            d.append((nu + 2 * n) ** 2)
        e = [q] * (len(d) - 1)
        target = -lowest
        return d, e, target
    start = m % 2
    if start == 0 and branch == "odd":
        start = 2
    s_values = list(range(start, m + 2 * depth + 1, 2))
    d = [float(s * s) for s in s_values]
    e = [q] * (len(d) - 1)
    if s_values[0] == 0:
        e[0] = math.sqrt(2.0) * q
    elif s_values[0] == 1:
        d[0] += q if branch == "even" else -q
    return d, e, s_values.index(m)


_TINY = 1e-300


def _cf_eval(a, d, e, t):
    """Characteristic function ``f(a)`` and the number of chain eigenvalues above ``a``.

    ``f(a) = a - d_t - e_{t}^2/(a - d_{t+1} - e_{t+1}^2/(...)) - e_{t-1}^2/(a - d_{t-1} - ...)``,
    both tails evaluated from their far ends.  The denominators are the
    pivots of ``a*I - A``; their negative count is the number of eigenvalues
    of the truncated chain exceeding ``a``.
    """
    above = 0
    top = len(d) - 1
    up = 0.0
    if t < top:
        D = a - d[top]
        if D == 0.0:
            D = _TINY
        above += D < 0
        for j in range(top - 1, t, -1):
            D = a - d[j] - e[j] * e[j] / D
            if D == 0.0:
                D = _TINY
            above += D < 0
        up = e[t] * e[t] / D
    down = 0.0
    if t > 0:
        D = a - d[0]
        if D == 0.0:
            D = _TINY
        above += D < 0
        for j in range(1, t):
            D = a - d[j] - e[j - 1] * e[j - 1] / D
            if D == 0.0:
                D = _TINY
            above += D < 0
        down = e[t - 1] * e[t - 1] / D
    f = a - d[t] - up - down
    above += f < 0
    return f, above


def _contfrac_root(nu, q, depth, branch):
    d, e, t = _cf_chain(nu, q, depth, branch)
    size = len(d)
    # rank of the wanted eigenvalue among all chain eigenvalues (ascending)
    rank = sum(1 for j in range(size) if d[j] < d[t] or (d[j] == d[t] and j < t))
    if _integer_order(abs(nu)) is not None:
        rank = t
    # eigenvalue ``rank`` is the root where the count of eigenvalues above a
    # drops from size - rank to size - rank - 1
    wanted_above = size - rank - 1
    spread = 4.0 * abs(q) + 1.0
    lo, hi = d[t] - spread, d[t] + spread
    while _cf_eval(lo, d, e, t)[1] <= wanted_above:
        lo -= spread
        spread *= 2
    while _cf_eval(hi, d, e, t)[1] > wanted_above:
        hi += spread
        spread *= 2
    # shrink until the bracket holds this eigenvalue alone and f changes sign
    # without a pole (f increases between poles, so one root implies none)
    for _ in range(200):
        f_lo, n_lo = _cf_eval(lo, d, e, t)
        f_hi, n_hi = _cf_eval(hi, d, e, t)
        if n_lo == wanted_above + 1 and n_hi == wanted_above and f_lo < 0 < f_hi:
            break
        mid = 0.5 * (lo + hi)
        if _cf_eval(mid, d, e, t)[1] > wanted_above:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 4 * np.finfo(float).eps * max(1.0, abs(mid)):
            return mid
    else:  # pragma: no cover - bisection always isolates within 200 halvings
        raise MathieuConvergenceError("continued-fraction root isolation failed")
    return optimize.brentq(lambda a: _cf_eval(a, d, e, t)[0], lo, hi,
                           xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


def characteristic_value_contfrac(nu, q, *, branch="even", max_nu=MAX_NU, max_q=MAX_Q):
    return characteristic_value(nu, q, branch=branch, method="contfrac", max_nu=max_nu, max_q=max_q)


def characteristic_value_tridiagonal(nu, q, *, branch="even", max_nu=MAX_NU, max_q=MAX_Q):
    return characteristic_value(nu, q, branch=branch, method="tridiagonal", max_nu=max_nu, max_q=max_q)


def characteristic_grid(nus, qs, *, method="tridiagonal", branch="even", threads=None):
    """``a_nu(q)`` on the outer product of ``nus`` and ``qs`` (rows: nu)."""
    jobs = [(nu, q) for nu in nus for q in qs]
    fn = lambda job: characteristic_value(job[0], job[1], method=method, branch=branch)  # noqa: E731
    if threads and threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(threads) as pool:
            values = list(pool.map(fn, jobs))
    else:
        values = [fn(job) for job in jobs]
    return np.array(values).reshape(len(nus), len(qs))


# --------------------------------------------------------------------------
# quasi-energies of a nonlinear resonance


@dataclass
class ResonanceContext:
    """Everything the Mathieu reduction of the ``N``-th resonance needs.

    ``V`` is the resonant matrix element of the coupling, supplied by the
    caller.  ``Hbar0`` (the mean unperturbed energy) defaults to ``E_r``,
    which defaults to the spectrum's energy at ``r``; it only shifts all
    quasi-energies by a constant.
    """

    N: int
    lam: float
    V: float
    spectrum: SpectrumModel
    Hbar0: Optional[float] = None
    E_r: Optional[float] = None

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"resonance order N must be a positive integer, got {self.N!r}")
        self.N = int(self.N)
        if not self.lam >= 0:
            raise ValueError(f"modulation strength must be non-negative, got {self.lam!r}")
        if self.E_r is None:
            self.E_r = self.spectrum.E_r
        if self.Hbar0 is None:
            self.Hbar0 = self.E_r

    @property
    def hbar(self):
        return self.spectrum.hbar

    @property
    def detuning(self):
        """``omega - 1/N``."""
        return self.spectrum.omega - 1.0 / self.N

    def _require_nonlinear(self):
        if self.spectrum.zeta == 0:
            raise VanishingNonlinearityError(
                "zeta = 0: a linear spectrum has no Mathieu reduction (no quantum revivals)")


@dataclass
class QuasiEnergyLevel:
    k_index: int
    nu: float
    a_char: float
    energy: float
    fourier_coeffs: dict = field(default_factory=dict)


def mathieu_q(ctx: ResonanceContext) -> float:
    ctx._require_nonlinear()
    return 4 * ctx.lam * ctx.V / (ctx.N ** 2 * ctx.spectrum.zeta * ctx.hbar ** 2)


def nu_of_k(ctx: ResonanceContext, k_index: float) -> float:
    """Order of the Mathieu solution belonging to quasi-energy index ``k``."""
    ctx._require_nonlinear()
    N, zeta, hbar = ctx.N, ctx.spectrum.zeta, ctx.hbar
    return 2 * k_index / N + 2 * ctx.detuning / (N * zeta * hbar)


def quasi_energy_value(ctx: ResonanceContext, k: float, *, branch: str = "even") -> float:
    """Quasi-energy as a smooth function of a real index ``k`` (for differentiation)."""
    nu = nu_of_k(ctx, k)
    a = characteristic_value(nu, mathieu_q(ctx), branch=branch)
    zeta, hbar, N = ctx.spectrum.zeta, ctx.hbar, ctx.N
    return hbar ** 2 * N ** 2 * zeta / 8 * a - ctx.detuning ** 2 / (2 * zeta) + ctx.Hbar0


def quasi_energy(ctx: ResonanceContext, k_index: int, *, branch: str = "even") -> QuasiEnergyLevel:
    """Quasi-energy level ``k`` (an even integer) with its Mathieu Fourier coefficients."""
    if int(k_index) != k_index or int(k_index) % 2:
        raise ValueError(f"quasi-energy index must be an even integer, got {k_index!r}")
    k_index = int(k_index)
    nu = nu_of_k(ctx, k_index)
    a, coeffs = mathieu_solution(nu, mathieu_q(ctx), branch=branch)
    zeta, hbar, N = ctx.spectrum.zeta, ctx.hbar, ctx.N
    energy = hbar ** 2 * N ** 2 * zeta / 8 * a - ctx.detuning ** 2 / (2 * zeta) + ctx.Hbar0
    return QuasiEnergyLevel(k_index=k_index, nu=nu, a_char=a, energy=energy, fourier_coeffs=coeffs)


def floquet_coefficients(level: QuasiEnergyLevel, ctx: ResonanceContext) -> dict[int, complex]:
    """Amplitudes ``C_m`` on the unperturbed states ``|m>``.

    With ``theta = 2z + pi/2`` the Mathieu term ``c_n exp(i(nu + 2n)z)`` of the
    Floquet function becomes a Fourier component ``exp(i(k + nN) theta / N)``
    (the detuning factor cancels the non-integer part of ``nu``), which
    projects onto ``m = round(r) + k + nN``.
    """
    center = int(round(ctx.spectrum.r))
    out = {}
    for n, c in level.fourier_coeffs.items():
        m = center + level.k_index + ctx.N * n
        out[m] = c * np.exp(-1j * (level.nu + 2 * n) * np.pi / 4)
    return dict(sorted(out.items()))
