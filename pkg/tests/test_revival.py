import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qrevival import (UNBOUNDED, DriveParams, PerturbationBreakdownError, PowerLawSystem, ResonanceContext,
                      ResonanceSingularityError, SpectrumModel, classify_regime, delta, driven_times, mod_factors,
                      mu, powerlaw_C, powerlaw_interdependence, powerlaw_spectrum, quasi_energy_value,
                      strong_beta, strong_regime, time_scales, timescale_j, unmodulated_times, weak_alpha,
                      weak_regime)
from qrevival.revival import DerivativeInstabilityError, identity_residuals, random_context


def spectrum(omega=1.3, zeta=0.02, hbar=1.0, r=10.0):
    return SpectrumModel(energy=lambda n: omega * hbar * n, r=r, omega=omega, zeta=zeta, hbar=hbar)


def ctx_for(omega=1.3, zeta=0.02, lam=0.01, V=1.0, N=1, hbar=1.0):
    return ResonanceContext(N=N, lam=lam, V=V, spectrum=spectrum(omega, zeta, hbar))


class TestElementaryFactors:
    def test_delta_hand_value(self):
        assert delta(2.0, 1) == 2.0

    def test_delta_far_off_resonance(self):
        assert delta(1e12, 1) == pytest.approx(1.0, abs=1e-11)

    def test_delta_singular(self):
        with pytest.raises(ResonanceSingularityError):
            delta(0.5, 2)
        with pytest.raises(ResonanceSingularityError):
            delta(1.0 + 1e-12, 1)
        assert delta(1.0 + 1e-6, 1) > 1e5

    def test_mu_hand_value(self):
        assert mu(1, 1.0, 0.2, 1.0, 1.0) == pytest.approx(0.1, rel=1e-15)

    def test_mu_zero_for_linear_spectrum(self):
        assert mu(2, 1.0, 0.0, 3.0, 1.0) == 0.0

    def test_mu_linear_in_delta(self):
        assert mu(1, 0.5, 0.2, 6.0, 1.3) == pytest.approx(3 * mu(1, 0.5, 0.2, 2.0, 1.3), rel=1e-15)

    def test_mu_rejects_zero_omega(self):
        with pytest.raises(ValueError):
            mu(1, 1.0, 0.1, 1.0, 0.0)

    def test_mod_factors_vanish(self):
        assert mod_factors(0.0, 1.0, 0.3, 2.0, 1.3, 0.2) == (0.0, 0.0)
        assert mod_factors(0.1, 1.0, 0.0, 2.0, 1.3, 0.0) == (0.0, 0.0)

    def test_mod_factors_hand_value(self):
        # lam V zeta delta^2 / omega^2 = 0.2 with mu = 0
        M_cl, M_Q = mod_factors(0.2, 1.0, 1.0, 1.0, 1.0, 0.0)
        assert M_cl == pytest.approx(-0.02, rel=1e-14)
        assert M_Q == pytest.approx(0.06, rel=1e-14)
        assert M_Q == pytest.approx(-3 * M_cl, rel=1e-14)

    def test_mod_factors_breakdown(self):
        with pytest.raises(PerturbationBreakdownError):
            mod_factors(0.1, 1.0, 0.1, 1.0, 1.0, 1.0)
        with pytest.raises(PerturbationBreakdownError):
            mod_factors(0.1, 1.0, 0.1, 1.0, 1.0, -1.0)
        # no drive, nothing to break down
        assert mod_factors(0.0, 1.0, 0.1, 1.0, 1.0, 1.0) == (0.0, 0.0)

    @given(st.floats(0, 1), st.floats(0.01, 2), st.floats(-1, 1), st.floats(0.5, 10), st.floats(0.2, 5),
           st.floats(-0.99, 0.99))
    def test_mod_factor_signs(self, lam, V, zeta, d, omega, m):
        M_cl, M_Q = mod_factors(lam, V, zeta, d, omega, m)
        assert M_cl <= 0 <= M_Q

    def test_driven_times_hand_value(self):
        Tl_cl, Tl_Q = driven_times(10.0, 50.0, 2.0, -0.02, 0.0)
        assert Tl_cl == pytest.approx(20.4, rel=1e-14)
        assert Tl_Q == 50.0

    def test_driven_times_identity(self):
        assert driven_times(3.0, 40.0, 1.0, 0.0, 0.0) == (3.0, 40.0)

    def test_unbounded_propagates(self):
        _, Tl_Q = driven_times(3.0, UNBOUNDED, 1.5, -0.1, 0.2)
        assert Tl_Q is UNBOUNDED

    def test_weak_example(self):
        # alpha = 0.01, T0_cl = 1, T0_Q = 100, delta = 1
        Tl_cl, Tl_Q = driven_times(1.0, 100.0, 1.0, -0.01, 0.03)
        assert Tl_Q == pytest.approx(97.0, rel=1e-14)
        assert Tl_cl == pytest.approx(1.01, rel=1e-14)

    def test_alpha_beta(self):
        assert weak_alpha(0.1, 2.0, 0.5, 1.0) == pytest.approx(0.5 * 0.1 ** 2, rel=1e-14)
        assert strong_beta(0.1, 1.0, 1, 0.5, 1.0) == pytest.approx(0.5 * 0.8 ** 2, rel=1e-14)
        assert strong_beta(0.1, 1.0, 1, 0.0, 1.0) is None
        assert strong_beta(0.0, 1.0, 1, 0.0, 1.0) == 0.0

    def test_beta_inverse_fourth_power_of_hbar(self):
        assert strong_beta(0.1, 1.0, 2, 0.3, 0.5) == pytest.approx(16 * strong_beta(0.1, 1.0, 2, 0.3, 1.0), rel=1e-14)


class TestTimeScales:
    @settings(max_examples=200)
    @given(st.floats(0.2, 5).filter(lambda w: abs(w - 1) > 1e-3), st.floats(-1, 1, allow_subnormal=False),
           st.floats(0.1, 2),
           st.integers(1, 4), st.floats(0.01, 3))
    def test_undriven_limit_exact(self, omega, zeta, hbar, N, V):
        ts = time_scales(ResonanceContext(N=N, lam=0.0, V=V, spectrum=spectrum(omega, zeta, hbar)))
        assert ts.delta == 1.0 and ts.M_cl == 0.0 and ts.M_Q == 0.0
        assert ts.Tl_cl == ts.T0_cl
        if zeta == 0:
            assert ts.T0_Q is UNBOUNDED and ts.Tl_Q is UNBOUNDED
        else:
            assert ts.Tl_Q == ts.T0_Q

    @settings(max_examples=200)
    @given(st.integers(0, 2 ** 32 - 1))
    def test_sign_structure(self, seed):
        ctx = random_context(np.random.default_rng(seed))
        ts = time_scales(ctx)
        assert abs(ts.mu) < 1
        # period stretch factor >= 1, revival factor <= 1
        assert ts.Tl_cl / (ts.T0_cl * ts.delta) >= 1
        assert ts.Tl_Q / ts.T0_Q <= 1

    def test_modification_scales_like_zeta_squared(self):
        # mu -> 0 as zeta -> 0, so M ~ zeta^2
        ratios = []
        for z in (1e-2, 1e-3, 1e-4):
            ts = time_scales(ctx_for(zeta=z, lam=0.05))
            ratios.append((ts.M_cl / z ** 2, ts.M_Q / z ** 2))
        ratios = np.array(ratios)
        np.testing.assert_allclose(ratios[1:, 0], ratios[0, 0], rtol=1e-3)
        np.testing.assert_allclose(ratios[1:, 1], ratios[0, 1], rtol=1e-3)

    def test_revival_unbounded_for_linear_spectrum(self):
        ts = time_scales(ctx_for(zeta=0.0, lam=0.05))
        assert ts.T0_Q is UNBOUNDED and ts.Tl_Q is UNBOUNDED and ts.q is None

    def test_reports_mathieu_parameters(self):
        ts = time_scales(ctx_for(omega=1.1, zeta=1.0, lam=0.1, V=1.0))
        assert ts.q == pytest.approx(0.4, rel=1e-14)
        assert ts.nu0 == pytest.approx(0.2, rel=1e-12)

    def test_singular_resonance(self):
        with pytest.raises(ResonanceSingularityError):
            time_scales(ctx_for(omega=1.0, lam=0.01))

    def test_drive_params_validation(self):
        with pytest.raises(ValueError):
            DriveParams(lam=-1.0)
        with pytest.raises(ValueError):
            DriveParams(N=0)
        assert DriveParams(N=2.0).N == 2


class TestTimescaleJ:
    def test_quadratic_energy(self):
        zeta, hbar = 0.03, 0.7
        T = timescale_j(lambda n: 0.5 * hbar ** 2 * zeta * n ** 2, 5 * hbar, 2, hbar)
        assert T == pytest.approx(4 * math.pi / (hbar * zeta), rel=1e-10)

    def test_linear_energy(self):
        omega, hbar = 1.7, 1.0
        f = lambda n: hbar * omega * n  # noqa: E731
        assert timescale_j(f, 10.0, 1, hbar) == pytest.approx(2 * math.pi / omega, rel=1e-10)
        assert timescale_j(f, 10.0, 2, hbar) is UNBOUNDED

    @settings(max_examples=100)
    @given(st.floats(0.5, 10).filter(lambda k: abs(k - 2) > 0.05), st.floats(2.0, 60.0))
    def test_reproduces_powerlaw_times(self, k, r):
        sys = PowerLawSystem(k_exp=k, V0=1.3, mass=0.8, hbar=0.9)
        sp = powerlaw_spectrum(sys, r)
        T0_cl, T0_Q = unmodulated_times(sys, r)
        assert timescale_j(sp.energy, r * sys.hbar, 1, sys.hbar) == pytest.approx(T0_cl, rel=1e-6)
        assert timescale_j(sp.energy, r * sys.hbar, 2, sys.hbar) == pytest.approx(T0_Q, rel=1e-6)

    def test_third_order(self):
        # E = c n^3: omega_3 = E'''/(3! hbar) = c
        T = timescale_j(lambda n: 0.2 * n ** 3, 4.0, 3, 1.0)
        assert T == pytest.approx(2 * math.pi / 0.2, rel=1e-8)

    def test_unstable_derivative(self):
        with pytest.raises(DerivativeInstabilityError):
            timescale_j(lambda n: np.sin(1e4 * n), 1.0, 1, 1.0)

    def test_bad_order(self):
        with pytest.raises(ValueError):
            timescale_j(lambda n: n, 1.0, 4, 1.0)

    @pytest.mark.parametrize("lam", [0.0005, 0.001, 0.003])
    def test_quasi_energy_consistency(self, lam):
        # N = 1: quasi-energy derivatives in k give the driven time scales
        ctx = ctx_for(omega=1.3, zeta=0.02, lam=lam)
        ts = time_scales(ctx)
        f = lambda k: quasi_energy_value(ctx, k)  # noqa: E731
        assert timescale_j(f, 0.0, 1, 1.0) == pytest.approx(ts.Tl_cl, rel=1e-8)
        assert timescale_j(f, 0.0, 2, 1.0) == pytest.approx(ts.Tl_Q, rel=1e-6)


class TestRegimes:
    def test_weak_identity_zero_alpha(self):
        ctx = ctx_for(lam=0.0)
        rep = weak_regime(ctx, time_scales(ctx))
        assert rep.regime == "weak" and rep.residual == 0.0 and rep.factor == 0.0

    def test_strong_identity_zero_beta(self):
        ctx = ctx_for(lam=0.0)
        rep = strong_regime(ctx, time_scales(ctx))
        assert rep.residual == 0.0 and rep.factor == 0.0

    @settings(max_examples=300)
    @given(st.integers(0, 2 ** 32 - 1))
    def test_identities_hold(self, seed):
        ctx = random_context(np.random.default_rng(seed))
        ts = time_scales(ctx)
        assert abs(weak_regime(ctx, ts).residual) < 1e-12
        assert abs(strong_regime(ctx, ts).residual) < 1e-12

    def test_identity_harness(self):
        weak, strong = identity_residuals(np.random.default_rng(0), 200)
        assert np.max(np.abs(weak)) < 1e-12 and np.max(np.abs(strong)) < 1e-12

    def test_vanishing_nonlinearity_uses_rates(self):
        ctx = ctx_for(zeta=0.0, lam=0.05)
        rep = weak_regime(ctx, time_scales(ctx))
        assert rep.regime == "vanishing" and rep.residual == 0.0
        with pytest.raises(ValueError):
            strong_regime(ctx, time_scales(ctx))

    def test_general_residual_reported(self):
        ctx = ctx_for(zeta=0.05, lam=0.02)
        rep = weak_regime(ctx, time_scales(ctx))
        assert rep.general_residual is not None and np.isfinite(rep.general_residual)

    def test_classify(self):
        assert classify_regime(0.0, 0.0, None, 0.0) == "vanishing"
        assert classify_regime(0.1, 0.05, 0.5, 0.1) == "weak"
        assert classify_regime(0.1, 0.5, 2.0, 0.05) == "strong"
        assert classify_regime(0.1, 0.5, 0.5, 0.5) == "intermediate"
        assert classify_regime(0.1, 0.15, 0.5, 0.1, weak_mu=0.2) == "weak"


class TestPowerLaw:
    def test_C_hand_value(self):
        assert powerlaw_C(PowerLawSystem(k_exp=4.0), 10, 1.0) == pytest.approx(63.0, rel=1e-15)

    def test_C_rejects_harmonic(self):
        with pytest.raises(ValueError):
            powerlaw_C(PowerLawSystem(k_exp=2.0), 10, 1.0)

    @given(st.floats(0.3, 20).filter(lambda k: abs(k - 2) > 0.05), st.floats(1, 50), st.floats(0.5, 5))
    def test_strong_ratio_exact(self, k, r, d):
        sys = PowerLawSystem(k_exp=k)
        rep = powerlaw_interdependence(sys, r, d, "strong", DriveParams(lam=0.01, V=0.5))
        assert abs(rep.residual) < 1e-12

    @given(st.floats(0.3, 20).filter(lambda k: abs(k - 2) > 0.05), st.floats(1, 50), st.floats(0.5, 5))
    def test_weak_relation_exact(self, k, r, d):
        sys = PowerLawSystem(k_exp=k)
        rep = powerlaw_interdependence(sys, r, d, "weak", DriveParams(lam=0.01, V=0.5))
        assert abs(rep.residual) < 1e-11

    def test_weak_undriven_is_ratio_law(self):
        sys = PowerLawSystem(k_exp=4.0)
        rep = powerlaw_interdependence(sys, 10, 1.0, "weak")
        T0_cl, T0_Q = unmodulated_times(sys, 10)
        assert rep.C_k * T0_cl == pytest.approx(T0_Q, rel=1e-14)
        assert abs(rep.residual) < 1e-14

    def test_unknown_regime(self):
        with pytest.raises(ValueError):
            powerlaw_interdependence(PowerLawSystem(k_exp=4.0), 10, 1.0, "medium")
