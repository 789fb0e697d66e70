import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from joinspace import extsmooth as es
from joinspace.extsmooth import INF

finite = st.floats(-20, 20, allow_nan=False)
width = st.floats(0, 15, allow_nan=False)


def quad_theta_prime(a, b, t):
    f = lambda r: es.theta(a, b, r + t) * 0.5 * math.exp(-abs(r))
    edges = [-80.0] + sorted({0.0, a - t, b - t}) + [80.0]
    return sum(quad(f, lo, hi, epsabs=1e-13, epsrel=1e-13, limit=200)[0] for lo, hi in zip(edges[:-1], edges[1:]))


class TestExtendedArithmetic:
    def test_inf_minus_inf_is_zero(self):
        assert es.ext_add(INF, -INF) == 0.0
        assert (es.ExtReal(INF) - es.ExtReal(INF)).value == 0.0

    def test_exp_of_minus_inf(self):
        assert es.ext_exp(-INF) == 0.0
        assert es.ext_exp(INF) == INF

    def test_inf_times_zero_rejected(self):
        with pytest.raises(es.DomainError):
            es.ext_mul(INF, 0.0)

    def test_interval_order(self):
        with pytest.raises(es.InvalidIntervalError):
            es.Interval(2, 1)
        assert es.Interval(-INF, INF).length == INF


class TestTheta:
    def test_clamp(self):
        assert es.theta(0, 6, -3) == 0 and es.theta(0, 6, 3) == 3 and es.theta(0, 6, 9) == 6

    def test_prime_known_value(self):
        # theta'(0, 6; 3) = 3 by symmetry
        assert es.theta_prime(0, 6, 3) == pytest.approx(3.0, abs=1e-15)

    def test_prime_ends(self):
        assert es.theta_prime(-1, 4, -INF) == -1 and es.theta_prime(-1, 4, INF) == 4

    def test_prime_full_line_is_identity(self):
        for t in (-5.0, 0.0, 2.5):
            assert es.theta_prime(-INF, INF, t) == t

    def test_prime_half_line(self):
        assert es.theta_prime(0, INF, 0) == pytest.approx(0.5)

    def test_degenerate_interval(self):
        assert es.theta_prime(2, 2, 7.0) == 2.0
        assert es.theta_prime_inv(2, 2, 2) == 0.0

    @settings(max_examples=200, deadline=None)
    @given(finite, width, st.floats(-30, 30, allow_nan=False))
    def test_prime_matches_quadrature(self, a, w, t):
        b = a + w
        assert es.theta_prime(a, b, t) == pytest.approx(quad_theta_prime(a, b, t), abs=1e-8)

    @settings(max_examples=200, deadline=None)
    @given(finite, width, st.floats(-30, 30, allow_nan=False))
    def test_derivative_matches_difference(self, a, w, t):
        b, h = a + w, 1e-6
        fd = (es.theta_prime(a, b, t + h) - es.theta_prime(a, b, t - h)) / (2 * h)
        assert es.theta_prime_deriv(a, b, t) == pytest.approx(fd, abs=1e-5)
        assert 0.0 <= es.theta_prime_deriv(a, b, t) <= 1.0

    @settings(max_examples=200, deadline=None)
    @given(finite, st.floats(0.01, 15), st.floats(0, 1), st.floats(0, 1))
    def test_lower_bound(self, a, w, u, v):
        b = a + w
        eps = u * 0.5 * (1 - math.exp(a - b))
        lo, hi = a + eps, b - eps
        s = lo + v * (hi - lo)
        t = es.theta_prime_inv(a, b, s)
        assert es.theta_prime_deriv(a, b, t) >= eps - 1e-12

    @settings(max_examples=200, deadline=None)
    @given(finite, st.floats(0.01, 15), st.floats(0.001, 0.999))
    def test_inverse_roundtrip(self, a, w, u):
        b = a + w
        s = a + u * w
        assert es.theta_prime(a, b, es.theta_prime_inv(a, b, s)) == pytest.approx(s, abs=1e-10)

    def test_inverse_endpoints(self):
        assert es.theta_prime_inv(0, 6, 0) == -INF and es.theta_prime_inv(0, 6, 6) == INF
        with pytest.raises(es.DomainError):
            es.theta_prime_inv(0, 6, 7)

    def test_array_agrees(self):
        ts = np.linspace(-10, 10, 101)
        arr = es.theta_prime_array(-1.0, 3.0, ts)
        assert np.allclose(arr, [es.theta_prime(-1.0, 3.0, t) for t in ts], atol=1e-15)


class TestOmega:
    def test_values(self):
        assert es.omega(0) == 0
        assert es.omega(INF) == INF
        assert es.omega(2.0) == pytest.approx(2.0 + 2 * math.exp(-1) - 2)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(0, 50))
    def test_inverse(self, v):
        assert es.omega(es.omega_inv(v)) == pytest.approx(v, abs=1e-10)

    def test_domain(self):
        with pytest.raises(es.DomainError):
            es.omega(-1)
