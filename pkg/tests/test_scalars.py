import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dpbai import scalars as sc
from dpbai.scalars import ScalarDomainError

LN2 = math.log(2.0)


class TestKl:
    def test_identity_is_zero(self):
        assert sc.kl(0.5, 0.5) == 0.0

    def test_hand_values(self):
        assert sc.kl(0.5, 0.25) == pytest.approx(0.5 * LN2 + 0.5 * math.log(2 / 3),
                                                 abs=1e-12)
        assert sc.kl(0.7, 0.5) == pytest.approx(
            0.7 * math.log(1.4) + 0.3 * math.log(0.6), abs=1e-12)

    def test_domain(self):
        for p, q in [(0.0, 0.5), (1.0, 0.5), (0.5, 0.0), (0.5, 1.0), (-0.1, 0.5)]:
            with pytest.raises(ScalarDomainError):
                sc.kl(p, q)

    @given(st.floats(0.01, 0.99), st.floats(0.01, 0.99))
    def test_nonnegative_and_complement_symmetric(self, p, q):
        v = sc.kl(p, q)
        assert v >= 0.0
        assert v == pytest.approx(sc.kl(1 - p, 1 - q), rel=1e-9, abs=1e-12)
        if abs(p - q) > 1e-9:
            assert v > 0.0


class TestWarpMaps:
    def test_boundary_fixed_points(self):
        for eps in (0.1, 1.0, 17.0):
            assert sc.g_eps_minus(eps, 0.0) == 0.0
            assert sc.g_eps_minus(eps, 1.0) == 1.0
            assert sc.g_eps_plus(eps, 0.0) == 0.0
            assert sc.g_eps_plus(eps, 1.0) == 1.0

    def test_ln2_value(self):
        assert sc.g_eps_minus(LN2, 0.5) == pytest.approx(2 / 3, abs=1e-12)

    def test_inverse_pair(self):
        assert sc.g_eps_plus(LN2, sc.g_eps_minus(LN2, 0.3)) == pytest.approx(
            0.3, abs=1e-12)

    @given(st.floats(0.001, 0.999), st.floats(0.01, 20.0))
    def test_ordering_and_inverse(self, x, eps):
        gm = sc.g_eps_minus(eps, x)
        gp = sc.g_eps_plus(eps, x)
        assert gm > x > gp
        assert sc.g_eps_plus(eps, gm) == pytest.approx(x, abs=1e-12)

    def test_domain(self):
        with pytest.raises(ScalarDomainError):
            sc.g_eps_minus(0.0, 0.5)
        with pytest.raises(ScalarDomainError):
            sc.g_eps_minus(1.0, 1.5)


class TestRateFunction:
    def test_value_at_one(self):
        expected = math.sqrt(2) - 1 + math.log(2 * (math.sqrt(2) - 1))
        assert sc.h_rate(1.0) == pytest.approx(expected, abs=1e-12)

    def test_quadratic_small_x(self):
        # h(x) ~ x^2/4 near zero
        assert sc.h_rate(1e-3) == pytest.approx(2.5e-7, abs=1e-10)

    def test_inverse_round_trip(self):
        assert sc.h_inv(sc.h_rate(3.7)) == pytest.approx(3.7, abs=1e-10)

    @given(st.floats(1e-3, 50.0), st.floats(1e-3, 50.0))
    def test_increasing(self, a, b):
        lo, hi = sorted((a, b))
        if hi - lo > 1e-9:
            assert sc.h_rate(lo) < sc.h_rate(hi)

    def test_domain(self):
        with pytest.raises(ScalarDomainError):
            sc.h_rate(0.0)
        with pytest.raises(ScalarDomainError):
            sc.h_inv(-1.0)


class TestLambertBar:
    def test_at_one(self):
        assert sc.lambert_bar(1.0) == pytest.approx(1.0, abs=1e-9)

    def test_sandwich_at_five(self):
        v = sc.lambert_bar(5.0)
        assert 5 + math.log(5) <= v <= 5 + math.log(5) + min(0.5, 5 ** -0.5)

    @pytest.mark.parametrize("x", [2.0, 10.0, 100.0])
    def test_defining_equation(self, x):
        w = sc.lambert_bar(x)
        assert w - math.log(w) == pytest.approx(x, abs=1e-10)

    def test_sandwich_on_log_grid(self):
        for x in np.logspace(math.log10(1.01), 6, 40):
            v = sc.lambert_bar(float(x))
            assert x + math.log(x) - 1e-9 <= v
            assert v <= x + math.log(x) + min(0.5, x ** -0.5) + 1e-9

    def test_domain(self):
        with pytest.raises(ScalarDomainError):
            sc.lambert_bar(0.5)


class TestEnvelope:
    def test_value_at_zero(self):
        assert sc.f_envelope(0.0) == pytest.approx(3 - LN2, abs=1e-12)

    def test_monotone(self):
        assert sc.f_envelope(10.0) < sc.f_envelope(1.0)

    def test_threshold_inversion(self):
        # f(x) <= delta iff x >= Wbar(log(1/delta) + 3 - ln2) - 3 + ln2
        delta = 0.01
        x_star = sc.lambert_bar(math.log(1 / delta) + 3 - LN2) - 3 + LN2
        assert sc.f_envelope(x_star) == pytest.approx(delta, abs=1e-9)
        assert sc.f_envelope(x_star + 1e-6) < delta
        assert sc.f_envelope(x_star - 1e-6) > delta

    def test_inversion_grid(self):
        for delta in (0.3, 0.05, 1e-4, 1e-9):
            x_star = sc.lambert_bar(math.log(1 / delta) + 3 - LN2) - 3 + LN2
            assert abs(sc.f_envelope(x_star) - delta) < 1e-9 * max(1, 1 / delta * 1e-9) + 1e-9


class TestGridHelpers:
    def test_unit_values(self):
        assert sc.k_eta(1.0, 1.0) == pytest.approx(1.0, abs=1e-12)
        assert sc.r_ratio(1.0, 1.0) == pytest.approx(1.0, abs=1e-12)

    def test_powers_of_two(self):
        assert sc.k_eta(1.0, 8.0) == pytest.approx(4.0, abs=1e-12)
        assert sc.r_ratio(1.0, 8.0) == pytest.approx(2.0, abs=1e-12)

    def test_domain(self):
        with pytest.raises(ScalarDomainError):
            sc.k_eta(1.0, 0.5)
        with pytest.raises(ScalarDomainError):
            sc.k_eta(-1.0, 2.0)
