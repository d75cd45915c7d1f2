import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dpbai import divergences as dv
from dpbai.divergences import DivergenceRegime
from dpbai.scalars import ScalarDomainError, g_eps_minus, kl

from oracles import d_eps_grid, d_plus_grid, d_tilde_plus_grid

means = st.floats(0.02, 0.98)
budgets = st.floats(0.05, 20.0)


class TestDPlus:
    def test_indicator_kills(self):
        for eps in (0.1, 1.0, 10.0):
            v, regime = dv.d_plus(eps, 0.5, 0.3)
            assert v == 0.0 and regime == DivergenceRegime.zero

    def test_kl_branch(self):
        v, regime = dv.d_plus(10.0, 0.3, 0.5)
        assert regime == DivergenceRegime.kl_regime
        assert v == pytest.approx(kl(0.3, 0.5), abs=1e-12)

    def test_privacy_branch_clipped(self):
        v, regime = dv.d_plus(0.1, -2.0, 0.5)
        assert regime == DivergenceRegime.privacy_regime
        assert v == pytest.approx(-math.log(1 - 0.5 * (1 - math.exp(-0.1))),
                                  abs=1e-12)

    @given(means, means, budgets)
    def test_matches_grid(self, lam, mu, eps):
        v, _ = dv.d_plus(eps, lam, mu)
        assert v == pytest.approx(d_plus_grid(eps, lam, mu, n=20_001),
                                  abs=5e-7)

    def test_monotone_in_lam(self):
        eps, mu = 0.7, 0.8
        vals = [dv.d_plus(eps, lam, mu)[0] for lam in np.linspace(0.0, mu, 50)]
        assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))

    def test_continuity_across_boundaries(self):
        # no jump bigger than a mesh-consistent Lipschitz bound at either
        # regime boundary
        eps, lam = 0.5, 0.3
        gm = g_eps_minus(eps, lam)
        for center in (lam, gm):
            mus = np.linspace(max(center - 1e-6, 0.0), min(center + 1e-6, 1.0), 201)
            vals = np.array([dv.d_plus(eps, lam, float(m))[0] for m in mus])
            assert np.abs(np.diff(vals)).max() < 5e-7

    def test_convex_in_mu(self):
        eps, lam = 0.5, 0.3
        mus = np.linspace(lam + 0.01, 0.99, 200)
        vals = np.array([dv.d_plus(eps, lam, float(m))[0] for m in mus])
        assert np.diff(vals, 2).min() >= -1e-9

    @given(means, means, means, means, budgets)
    def test_midpoint_jointly_convex(self, l1, m1, l2, m2, eps):
        mid = dv.d_plus(eps, (l1 + l2) / 2, (m1 + m2) / 2)[0]
        avg = (dv.d_plus(eps, l1, m1)[0] + dv.d_plus(eps, l2, m2)[0]) / 2
        assert mid <= avg + 1e-10

    def test_domain(self):
        with pytest.raises(ScalarDomainError):
            dv.d_plus(1.0, 0.3, 1.5)
        with pytest.raises(ScalarDomainError):
            dv.d_plus(-1.0, 0.3, 0.5)


class TestDMinus:
    def test_indicator_kills(self):
        assert dv.d_minus(1.0, 0.3, 0.5)[0] == 0.0

    def test_kl_branch_value(self):
        v, _ = dv.d_minus(10.0, 0.5, 0.3)
        assert v == pytest.approx(0.5 * math.log(5 / 3) + 0.5 * math.log(5 / 7),
                                  abs=1e-12)

    @given(means, means, budgets)
    def test_defining_symmetry(self, lam, mu, eps):
        assert dv.d_minus(eps, lam, mu)[0] == dv.d_plus(eps, 1 - lam, 1 - mu)[0]


class TestUnsigned:
    def test_equal_means(self):
        assert dv.d_eps_unsigned(1.0, 0.4, 0.4) == 0.0

    @given(means, means, budgets)
    def test_kl_tv_envelope(self, lam, mu, eps):
        v = dv.d_eps_unsigned(eps, lam, mu)
        if abs(lam - mu) > 1e-12:
            assert v <= min(kl(lam, mu), eps * abs(lam - mu)) + 1e-12

    def test_matches_grid(self):
        v = dv.d_eps_unsigned(0.1, 0.7, 0.3)
        assert v == pytest.approx(d_eps_grid(0.1, 0.7, 0.3), abs=1e-6)

    def test_domain(self):
        with pytest.raises(ScalarDomainError):
            dv.d_eps_unsigned(1.0, 0.0, 0.5)


class TestDerivative:
    def test_branch_boundary_continuity(self):
        eps, lam = 0.5, 0.3
        gm = g_eps_minus(eps, lam)
        below = dv.d_plus_dmu(eps, lam, gm - 1e-13)
        above = dv.d_plus_dmu(eps, lam, gm + 1e-13)
        assert below == pytest.approx(above, abs=1e-10)

    def test_kl_branch_value(self):
        assert dv.d_plus_dmu(10.0, 0.3, 0.5) == pytest.approx(0.8, abs=1e-12)

    def test_finite_difference(self):
        eps, lam, mu = 0.1, 0.2, 0.5
        h = 1e-6
        fd = (dv.d_plus(eps, lam, mu + h)[0] - dv.d_plus(eps, lam, mu - h)[0]) / (2 * h)
        assert dv.d_plus_dmu(eps, lam, mu) == pytest.approx(fd, abs=1e-6)

    def test_finite_difference_privacy_branch(self):
        eps, mu = 0.1, 0.5
        h = 1e-6
        fd = (dv.d_plus(eps, -2.0, mu + h)[0] - dv.d_plus(eps, -2.0, mu - h)[0]) / (2 * h)
        a = 1 - math.exp(-eps)
        assert a / (1 - mu * a) == pytest.approx(fd, abs=1e-6)


class TestModified:
    def test_indicator_kills(self):
        for r in (0.5, 1.0, 8.0):
            assert dv.d_tilde_plus(1.0, 0.6, 0.4, r) == 0.0

    def test_gap_bound(self):
        # d+ - d~+ within [-log4/r, (log(1+2 eps r)+1)/r]
        eps, lam, mu, r = 1.0, 0.2, 0.6, 5.0
        gap = dv.d_plus(eps, lam, mu)[0] - dv.d_tilde_plus(eps, lam, mu, r)
        assert -math.log(4) / r - 1e-12 <= gap
        assert gap <= (math.log(1 + 2 * eps * r) + 1) / r + 1e-12

    @given(st.floats(0.05, 0.6), st.floats(0.05, 0.35), budgets,
           st.floats(0.5, 64.0))
    def test_gap_bound_random(self, lam, gap, eps, r):
        mu = lam + gap
        d = dv.d_plus(eps, lam, mu)[0]
        dt = dv.d_tilde_plus(eps, lam, mu, r)
        assert d <= dt + (math.log(1 + 2 * eps * r) + 1) / r + 1e-10
        assert d >= dt - math.log(4) / r - 1e-10

    def test_matches_grid(self):
        v = dv.d_tilde_plus(1.0, 0.2, 0.6, 1000.0)
        assert v == pytest.approx(d_tilde_plus_grid(1.0, 0.2, 0.6, 1000.0),
                                  abs=1e-6)

    def test_matches_grid_random(self):
        rng = np.random.default_rng(5)
        for _ in range(25):
            eps = 10 ** rng.uniform(-1, 1)
            lam = rng.uniform(0.05, 0.6)
            mu = lam + rng.uniform(0.05, 0.95 - lam)
            r = 10 ** rng.uniform(-0.3, 2)
            v = dv.d_tilde_plus(eps, lam, mu, r)
            assert v == pytest.approx(d_tilde_plus_grid(eps, lam, mu, r, n=40_001),
                                      abs=2e-6)

    def test_monotone_in_r(self):
        eps, lam, mu = 1.0, 0.2, 0.6
        vals = [dv.d_tilde_plus(eps, lam, mu, r) for r in (0.5, 1, 2, 4, 8, 32)]
        assert all(a < b for a, b in zip(vals, vals[1:]))

    @given(st.floats(0.1, 0.9), st.floats(0.05, 0.85), budgets,
           st.floats(0.5, 64.0))
    def test_symmetry(self, mu, shift, eps, r):
        lam = mu + shift
        a = dv.d_tilde_minus(eps, lam, mu, r) if mu < 1 else 0.0
        b = dv.d_tilde_plus(eps, 1 - lam, 1 - mu, r)
        assert a == pytest.approx(b, rel=1e-12, abs=1e-15)


class TestInvertDTilde:
    def test_round_trip(self):
        mu, r, c = 0.5, 4.0, 0.2
        x = dv.invert_d_tilde(1.0, mu, r, c, "plus")
        assert dv.d_tilde_plus(1.0, mu - x, mu, r) == pytest.approx(c, abs=1e-8)

    def test_round_trip_minus(self):
        mu, r, c = 0.35, 2.0, 0.15
        x = dv.invert_d_tilde(0.7, mu, r, c, "minus")
        assert dv.d_tilde_minus(0.7, mu + x, mu, r) == pytest.approx(c, abs=1e-8)

    def test_decreasing_in_r(self):
        mu, c = 0.5, 0.2
        xs = [dv.invert_d_tilde(1.0, mu, r, c, "plus") for r in (1, 2, 4, 8)]
        assert all(a > b for a, b in zip(xs, xs[1:]))

    def test_against_grid_bisection(self):
        eps, mu, r, c = 0.5, 0.4, 2.0, 0.1
        x = dv.invert_d_tilde(eps, mu, r, c, "plus")
        lo, hi = 1e-9, 3.0
        for _ in range(60):
            mid = (lo + hi) / 2
            if d_tilde_plus_grid(eps, mu - mid, mu, r, n=20_001) < c:
                lo = mid
            else:
                hi = mid
        assert x == pytest.approx((lo + hi) / 2, abs=1e-5)
