import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sljump.errors import DomainError
from sljump.ode_core import (EndpointData, PotentialFn, integrate_ivp,
                             integrate_phi, omega, phi_batch)


def rk4_fixed(qfun, h, lam, x_end, nstep):
    """Independent fixed-step classical RK4 oracle on (y, y')."""
    y = np.array([1.0, h])
    dx = x_end / nstep
    lam2 = lam * lam

    def f(x, y):
        return np.array([y[1], (qfun(x) - lam2) * y[0]])

    x = 0.0
    for _ in range(nstep):
        k1 = f(x, y)
        k2 = f(x + dx / 2, y + dx / 2 * k1)
        k3 = f(x + dx / 2, y + dx / 2 * k2)
        k4 = f(x + dx, y + dx * k3)
        y = y + dx / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        x += dx
    return y[0], y[1]


class TestPotentialFn:
    def test_zero_and_eval(self):
        q = PotentialFn.zero(0.5)
        assert q.length == 0.5
        assert q(0.3) == 0.0

    def test_linear_interpolation_is_deterministic(self):
        q = PotentialFn(np.array([0.0, 0.5, 1.0]), np.array([0.0, 1.0, 0.0]))
        assert q(0.25) == q(0.25) == 0.5

    def test_rejects_nonuniform_grid(self):
        with pytest.raises(DomainError):
            PotentialFn(np.array([0.0, 0.3, 1.0]), np.zeros(3))

    def test_rejects_grid_not_from_zero(self):
        with pytest.raises(DomainError):
            PotentialFn(np.array([0.1, 0.5, 1.0]), np.zeros(3))

    def test_rejects_nonfinite(self):
        with pytest.raises(DomainError):
            PotentialFn(np.array([0.0, 0.5, 1.0]), np.array([0.0, np.inf, 0.0]))

    def test_eval_outside_domain(self):
        q = PotentialFn.zero(0.5)
        with pytest.raises(DomainError):
            q(0.7)

    def test_cosine_modes(self):
        q = PotentialFn.from_cosine_modes([0.5, 0.4], 0.5)
        x = np.linspace(0, 0.5, 7)
        assert np.allclose(q(x), 0.5 + 0.4 * np.cos(2 * np.pi * x), atol=1e-9)


def test_endpoint_data_validation():
    EndpointData(h=1.0, length=0.5)
    with pytest.raises(DomainError):
        EndpointData(h=0.0, length=1.5)


def test_endpoint_data_from_problem():
    from sljump.forward_spectrum import ProblemSpec
    spec = ProblemSpec.free(d=0.25, a1=2.0, h1=0.3, h2=-0.1,
                            nodes_per_unit=64)
    assert spec.left_endpoint == EndpointData(h=0.3, length=0.25)
    assert spec.right_endpoint == EndpointData(h=-0.1, length=0.75)


class TestOmega:
    def test_free(self):
        assert omega(PotentialFn.zero(0.5), 0.0) == 0.0

    def test_constant(self):
        q = PotentialFn.from_callable(lambda x: 2.0, 0.5)
        assert omega(q, 1.0) == pytest.approx(1.5, abs=1e-14)

    def test_sine_against_antiderivative(self):
        # integral of sin(2 pi x) over [0, 1/2] is 1/pi
        q = PotentialFn.from_callable(lambda x: math.sin(2 * math.pi * x), 0.5)
        assert omega(q, 0.0) == pytest.approx(0.5 / math.pi, abs=1e-6)


class TestIntegratePhi:
    def test_free_closed_form(self):
        q = PotentialFn.zero(0.5)
        phi, dphi = integrate_phi(q, 0.0, 3.0, 0.5)
        assert phi == pytest.approx(math.cos(1.5), abs=1e-10)
        assert dphi == pytest.approx(-3.0 * math.sin(1.5), abs=1e-10)

    def test_constant_potential_closed_form(self):
        c = 2.0
        q = PotentialFn.from_callable(lambda x: c, 0.5)
        lam = 4.0
        w = math.sqrt(lam * lam - c)
        phi, dphi = integrate_phi(q, 0.0, lam, 0.5)
        assert phi == pytest.approx(math.cos(w * 0.5), abs=1e-9)
        assert dphi == pytest.approx(-w * math.sin(w * 0.5), abs=1e-9)

    def test_linear_potential_vs_fine_rk4(self):
        # independent oracle: classical RK4 at a 10x finer step than the
        # default adaptive resolution
        q = PotentialFn.from_callable(lambda x: x, 0.5)
        phi, dphi = integrate_phi(q, 1.0, 5.0, 0.5)
        ref = rk4_fixed(lambda x: np.interp(x, q.x, q.values), 1.0, 5.0, 0.5, 40000)
        assert phi == pytest.approx(ref[0], abs=1e-9)
        assert dphi == pytest.approx(ref[1], abs=1e-8)

    def test_partial_interval(self):
        q = PotentialFn.zero(0.5)
        phi, _ = integrate_phi(q, 0.0, 2.0, 0.25)
        assert phi == pytest.approx(math.cos(0.5), abs=1e-10)

    def test_x_end_zero(self):
        q = PotentialFn.zero(0.5)
        assert integrate_phi(q, 0.7, 3.0, 0.0) == (1.0, 0.7)

    def test_domain_errors(self):
        q = PotentialFn.zero(0.5)
        with pytest.raises(DomainError):
            integrate_phi(q, 0.0, 3.0, 0.7)
        with pytest.raises(DomainError):
            integrate_phi(q, 0.0, math.nan, 0.5)

    @given(lam=st.floats(0.1, 40.0), h=st.floats(-2.0, 2.0))
    def test_evenness(self, lam, h):
        q = PotentialFn.from_callable(lambda x: math.cos(3 * x), 0.5)
        assert integrate_phi(q, h, lam, 0.5) == integrate_phi(q, h, -lam, 0.5)

    def test_phase_mode_matches_cartesian(self):
        # lam * x_end = 60 crosses the phase-form threshold
        q = PotentialFn.from_callable(lambda x: 0.7 * math.cos(5 * x), 0.5)
        phi, dphi = integrate_phi(q, 0.3, 120.0, 0.5)
        bphi, bdphi = phi_batch(q, 0.3, np.array([120.0]), 0.5)
        assert phi == pytest.approx(bphi[0], abs=2e-8)
        assert dphi == pytest.approx(bdphi[0], abs=2e-8 * 120)

    def test_wronskian_constant(self):
        q = PotentialFn.from_callable(lambda x: math.sin(4 * x), 0.5)
        h, lam = 0.4, 7.0
        for x_end in (0.1, 0.3, 0.5):
            y1 = integrate_ivp(q, 1.0, h, lam, x_end)
            y2 = integrate_ivp(q, 0.0, 1.0, lam, x_end)
            wronskian = y1[0] * y2[1] - y1[1] * y2[0]
            assert wronskian == pytest.approx(1.0, abs=1e-7)

    def test_shift_covariance(self):
        q = PotentialFn.from_callable(lambda x: math.cos(2 * x), 0.5)
        c, lam = 1.5, 6.0
        shifted = integrate_phi(q.shifted(c), 0.2, lam, 0.5)
        base = integrate_phi(q, 0.2, math.sqrt(lam * lam - c), 0.5)
        assert shifted[0] == pytest.approx(base[0], abs=1e-9)
        assert shifted[1] == pytest.approx(base[1], abs=1e-8)

    def test_large_lam_asymptotic_form(self):
        q = PotentialFn.from_callable(lambda x: 0.8 * math.cos(2 * math.pi * x) + 0.3, 0.5)
        h = 0.4
        om = omega(q, h)
        lams = np.array([40.0, 80.0, 160.0, 320.0])
        phi, _ = phi_batch(q, h, lams, 0.5)
        rem = np.abs(phi - np.cos(lams * 0.5) - om * np.sin(lams * 0.5) / lams)
        assert np.all(rem * lams < 5.0 * (q.l2_norm() + abs(h) + 1.0))


class TestPhiBatch:
    def test_agrees_with_adaptive_route(self):
        q = PotentialFn.from_callable(
            lambda x: 0.6 * math.cos(2 * math.pi * x) - 0.2 * x, 0.5)
        lams = np.array([0.5, 2.0, 9.3, 31.0, 77.7, 205.0])
        phi, dphi = phi_batch(q, 0.25, lams, 0.5)
        for i, lam in enumerate(lams):
            p, dp = integrate_phi(q, 0.25, float(lam), 0.5)
            # the adaptive route carries ~rtol * phase absolute error
            tol = 1e-9 + 2e-10 * lam
            assert phi[i] == pytest.approx(p, abs=tol)
            assert dphi[i] == pytest.approx(dp, abs=tol * max(1.0, lam))

    def test_lambda_derivative_vs_central_difference(self):
        q = PotentialFn.from_callable(lambda x: 0.5 * math.sin(3 * x), 0.5)
        lams = np.array([2.0, 20.0, 90.0])
        _, _, dlam, ddlam = phi_batch(q, 0.1, lams, 0.5, derivative=True)
        e = 1e-6
        pp, dpp = phi_batch(q, 0.1, lams + e, 0.5)
        pm, dpm = phi_batch(q, 0.1, lams - e, 0.5)
        assert np.allclose(dlam, (pp - pm) / (2 * e), atol=1e-6)
        assert np.allclose(ddlam, (dpp - dpm) / (2 * e), atol=1e-4)

    def test_negative_lam_derivative_is_odd(self):
        q = PotentialFn.from_callable(lambda x: math.cos(x), 0.5)
        _, _, dpos, _ = phi_batch(q, 0.0, np.array([7.0]), 0.5, derivative=True)
        _, _, dneg, _ = phi_batch(q, 0.0, np.array([-7.0]), 0.5, derivative=True)
        assert dpos[0] == -dneg[0]

    def test_partial_x_end(self):
        q = PotentialFn.from_callable(lambda x: x * x, 0.5)
        x_end = 0.3137  # not a grid node
        phi, dphi = phi_batch(q, 0.5, np.array([11.0]), x_end)
        p, dp = integrate_phi(q, 0.5, 11.0, x_end)
        assert phi[0] == pytest.approx(p, abs=1e-8)
        assert dphi[0] == pytest.approx(dp, abs=1e-7)
