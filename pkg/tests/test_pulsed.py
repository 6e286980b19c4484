"""Pulsed readout: propagator, gain, covariance integrals, metrics."""

import numpy as np
import pytest
from scipy.integrate import dblquad, quad, solve_ivp
from scipy.linalg import expm

from tvmeter import (
    BathSpec,
    PulsedParams,
    Regime,
    measurement_gain,
    prepare_state_lyapunov,
    propagator,
    pulsed_covariances,
    pulsed_metrics,
    pulsed_state,
)
from tvmeter.pulsed import readout_drift

FIG9_BATH = BathSpec(n_m=1e7)


def fig9_params(g=0.6, alpha2=0.6, V0=None, kappa=1.0):
    if V0 is None:
        V0, _ = prepare_state_lyapunov(kappa, 1e-9 * kappa, 0.6 * kappa, 0.2, FIG9_BATH)
    return PulsedParams(
        kappa=kappa, gamma=1e-9 * kappa, omega_m=100.0 * kappa,
        g=g * kappa, alpha2=alpha2, V0=V0, bath=FIG9_BATH,
    )


class TestPropagator:
    def test_identity_at_zero(self):
        np.testing.assert_array_equal(propagator(fig9_params(), 0.0), np.eye(4))

    def test_against_matrix_exponential(self):
        rng = np.random.default_rng(42)
        for _ in range(100):
            kappa = rng.uniform(0.5, 5.0)
            p = PulsedParams(
                kappa=kappa,
                gamma=rng.uniform(1e-4, 0.3) * kappa,
                omega_m=rng.uniform(1.0, 100.0),
                g=rng.uniform(0.0, 1.0) * kappa,
                alpha2=rng.uniform(0.0, 1.0),
                V0=1.0,
                bath=BathSpec(),
            )
            t = rng.uniform(0.0, 10.0 / kappa)
            got = propagator(p, t)
            want = expm(readout_drift(p) * t)
            np.testing.assert_allclose(got, want, atol=1e-10, rtol=1e-10)

    def test_degenerate_rates_limit_form(self):
        p = PulsedParams(
            kappa=1.0, gamma=1.0, omega_m=10.0, g=0.4, alpha2=0.5,
            V0=1.0, bath=BathSpec(),
        )
        assert p.degenerate_rates
        got = propagator(p, 2.0)
        want = expm(readout_drift(p) * 2.0)
        np.testing.assert_allclose(got, want, atol=1e-10)

    def test_no_coupling_has_no_cross_terms(self):
        p = fig9_params(g=0.0)
        M = propagator(p, 3.0)
        assert M[1, 2] == M[3, 0] == 0.0


class TestGain:
    def test_unity_at_zero_duration(self):
        assert measurement_gain(fig9_params(), 0.0) == 1.0

    def test_gain_matches_quadrature(self):
        p = fig9_params()
        for ktau in (0.5, 5.0, 20.0):
            got = measurement_gain(p, ktau / p.kappa)
            c = p.alpha2 * p.g / (p.kappa - p.gamma)
            m23 = lambda s: c * (np.exp(-p.gamma * s / 2) - np.exp(-p.kappa * s / 2))
            integral, err = quad(lambda s: m23(s) ** 2, 0.0, ktau / p.kappa)
            assert got == pytest.approx(1.0 + p.kappa * integral, rel=1e-8)

    def test_nondecreasing_in_duration(self):
        p = fig9_params()
        taus = np.linspace(0.01, 30.0, 40) / p.kappa
        gains = [measurement_gain(p, t) for t in taus]
        assert all(b >= a for a, b in zip(gains, gains[1:]))

    def test_long_pulse_limit_finite(self):
        p = fig9_params()
        c = p.alpha2 * p.g / (p.kappa - p.gamma)
        limit = 1.0 + p.kappa * c**2 * (
            1 / p.gamma - 4 / (p.kappa + p.gamma) + 1 / p.kappa
        )
        assert measurement_gain(p, 1e12 / p.kappa) == pytest.approx(limit, rel=1e-9)

    def test_zero_coupling(self):
        assert measurement_gain(fig9_params(g=0.0), 5.0) == 1.0

    def test_filter_normalization_identity(self):
        # kappa * int M23^2 = G - 1 (matched filter, unit norm)
        p = fig9_params()
        for ktau in (1e-3, 1.0, 8.0):
            tau = ktau / p.kappa
            G = measurement_gain(p, tau)
            c = p.alpha2 * p.g / (p.kappa - p.gamma)
            m23 = lambda s: c * (np.exp(-p.gamma * s / 2) - np.exp(-p.kappa * s / 2))
            integral, _ = quad(lambda s: m23(s) ** 2, 0.0, tau)
            assert p.kappa * integral == pytest.approx(G - 1.0, rel=1e-8)


class TestPreparation:
    def test_no_coupling_returns_bath_variance(self):
        V0, V = prepare_state_lyapunov(1.0, 1e-9, 0.0, 0.2, FIG9_BATH)
        assert V0 == pytest.approx(FIG9_BATH.V_x, rel=1e-9)

    def test_cooling_limit_matches_broadened_line(self):
        kappa, gamma, g = 1.0, 1e-9, 0.1
        V0, _ = prepare_state_lyapunov(kappa, gamma, g, 0.0, FIG9_BATH)
        gm = gamma + g**2 / kappa
        want = (gamma * FIG9_BATH.V_x + g**2 / (2 * kappa)) / gm
        assert V0 == pytest.approx(want, rel=1e-2)

    def test_residual_of_lyapunov_equation(self):
        kappa, gamma, g, alpha = 1.0, 1e-9, 0.6, 0.2
        V0, V = prepare_state_lyapunov(kappa, gamma, g, alpha, FIG9_BATH)
        c_m, c_p = (alpha - 2) * g / 4, (alpha + 2) * g / 4
        A = np.array([
            [-kappa / 2, 0, 0, c_m],
            [0, -kappa / 2, c_p, 0],
            [0, c_m, -gamma / 2, 0],
            [c_p, 0, 0, -gamma / 2],
        ])
        H = np.diag([1.0, 1.0, np.sqrt(gamma), np.sqrt(gamma)])
        Vin = np.diag([0.5, 0.5, FIG9_BATH.V_x, FIG9_BATH.V_p])
        D = H @ Vin @ H.T
        res = A @ V + V @ A.T + D
        assert np.max(np.abs(res)) <= 1e-10 * np.max(np.abs(D))

    def test_squeezed_preparation_below_vacuum(self):
        V0, _ = prepare_state_lyapunov(1.0, 1e-9, 0.6, 0.2, FIG9_BATH)
        assert V0 < 0.5

    def test_x_variance_independent_of_x2_rate(self):
        a, b = (
            prepare_state_lyapunov(1.0, 1e-9, 0.6, 0.2, FIG9_BATH, x2_rate=r)[0]
            for r in (0.0, 5.0)
        )
        assert a == pytest.approx(b, rel=1e-12)


def _ode_covariances(p, tau, n_steps=4000):
    """Time-domain oracle: propagate the (Y, x, filtered-Y) covariance ODE."""
    Vx = p.bath.V_x
    c1 = p.alpha2 * p.g / (p.kappa - p.gamma)
    G1 = measurement_gain(p, tau) - 1.0
    Nf = np.sqrt(p.kappa / G1)

    def fout(t):
        return Nf * c1 * (np.exp(-p.gamma * t / 2) - np.exp(-p.kappa * t / 2))

    r = p.measurement_rate

    def rhs(t, y):
        VYY, VYx, Vxx, VFY, VFx, VFF = y
        f = fout(t)
        # dynamics: dY = (-k/2 Y + r x) dt + sqrt(k) Yin, dx = -g/2 x + sqrt(g) xin
        # filter: dF = f (sqrt(k) Y - Yin) dt
        dVYY = -p.kappa * VYY + 2 * r * VYx + p.kappa * 0.5
        dVYx = -(p.kappa + p.gamma) / 2 * VYx + r * Vxx
        dVxx = -p.gamma * Vxx + p.gamma * Vx
        dVFY = f * np.sqrt(p.kappa) * (VYY - 0.5) - p.kappa / 2 * VFY + r * VFx
        dVFx = f * np.sqrt(p.kappa) * VYx - p.gamma / 2 * VFx
        dVFF = 2 * f * np.sqrt(p.kappa) * VFY + 0.5 * f * f
        return [dVYY, dVYx, dVxx, dVFY, dVFx, dVFF]

    y0 = [0.5, 0.0, p.V0, 0.0, 0.0, 0.0]
    sol = solve_ivp(
        rhs, (0.0, tau), y0, rtol=1e-10, atol=1e-12, dense_output=False, method="DOP853"
    )
    VYY, VYx, Vxx, VFY, VFx, VFF = sol.y[:, -1]
    return Vxx, VFx, VFF


class TestPulsedCovariances:
    def test_short_pulse_limits(self):
        p = fig9_params()
        tau = 1e-4 / p.kappa
        V33, V32, V22 = pulsed_covariances(p, tau)
        assert V33 == pytest.approx(p.V0, abs=1e-5)
        assert abs(V32) < 1e-3
        assert V22 == pytest.approx(0.5, abs=1e-3)

    @pytest.mark.parametrize("ktau", [0.5, 2.0, 5.0, 10.0, 20.0])
    def test_against_time_domain_ode(self, ktau):
        p = fig9_params()
        tau = ktau / p.kappa
        got = pulsed_covariances(p, tau)
        want = _ode_covariances(p, tau)
        np.testing.assert_allclose(got, want, rtol=1e-2)

    def test_against_direct_quadrature(self):
        p = fig9_params()
        tau = 5.0 / p.kappa
        V33, V32, V22 = pulsed_covariances(p, tau)
        c1 = p.alpha2 * p.g / (p.kappa - p.gamma)
        G1 = measurement_gain(p, tau) - 1.0
        Nf = np.sqrt(p.kappa / G1)
        m23 = lambda t: c1 * (np.exp(-p.gamma * t / 2) - np.exp(-p.kappa * t / 2))
        m33 = lambda t: np.exp(-p.gamma * t / 2)
        fo = lambda t: Nf * m23(t)
        J2, _ = dblquad(
            lambda t, s: fo(t) * m33(tau - s) * m23(t - s),
            0.0, tau, lambda s: s, lambda s: tau,
        )
        want_32 = p.V0 * np.sqrt(G1) * m33(tau) + p.gamma * np.sqrt(p.kappa) * p.bath.V_x * J2
        assert V32 == pytest.approx(want_32, rel=1e-8)

    def test_gamma_heating_dominates_long_pulses(self):
        p = fig9_params()
        V33, _, _ = pulsed_covariances(p, 1e10 / p.kappa)
        # x has thermalized appreciably toward the bath by gamma * tau = 10
        assert V33 > 100 * p.V0


class TestPulsedMetrics:
    def test_short_pulse_figures(self):
        p = fig9_params()
        figs = pulsed_metrics(p, 1e-4 / p.kappa)
        assert figs.Ts == pytest.approx(1.0, abs=1e-3)
        assert figs.Tm == pytest.approx(0.0, abs=1e-3)
        assert figs.Vc == pytest.approx(p.V0, abs=1e-3)

    def test_qnd_window_exists(self):
        p = fig9_params(g=0.6, alpha2=0.6)
        assert p.V0 < 0.5
        regimes = [
            pulsed_metrics(p, ktau / p.kappa).regime
            for ktau in np.logspace(-1, 2, 30)
        ]
        assert Regime.QND in regimes

    def test_transfer_decays_for_long_pulses(self):
        p = fig9_params()
        early = pulsed_metrics(p, 5.0 / p.kappa)
        late = pulsed_metrics(p, 1e10 / p.kappa)
        assert late.Ts < 0.01 and late.Ts < early.Ts
        assert late.Tm < early.Tm

    def test_no_coupling(self):
        p = fig9_params(g=0.0)
        for ktau in (0.1, 5.0):
            assert pulsed_metrics(p, ktau / p.kappa).Tm == 0.0

    def test_flat_filter_less_efficient_for_initial_state(self):
        p = fig9_params()
        tau = 5.0 / p.kappa
        matched = pulsed_metrics(p, tau, pulse_shape="matched")
        flat = pulsed_metrics(p, tau, pulse_shape="flat")
        assert flat.Tm <= matched.Tm + 1e-12

    def test_state_bundle(self):
        p = fig9_params()
        st = pulsed_state(p, 2.0 / p.kappa)
        assert st.gain > 1.0
        assert st.M.shape == (4, 4)
        assert st.V22 > 0.5


class TestQuadratureCheck:
    def test_matches_closed_form_gain(self):
        from tvmeter import gain_quadrature_check

        p = fig9_params()
        for ktau in (0.5, 5.0):
            tau = ktau / p.kappa
            got = gain_quadrature_check(p, tau)
            assert got == pytest.approx(measurement_gain(p, tau) - 1.0, rel=1e-8)
