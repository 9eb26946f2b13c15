"""Denoiser calculus: stated values, quadrature oracles, derivative gates."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from grampa.denoisers import (
    AwgnChannelParams,
    BernoulliGaussianParams,
    SnipeParams,
    awgn_output_mmse,
    bernoulli_gaussian_mmse,
    nonneg_map,
    nonneg_mmse,
    quadrature_mmse,
    snipe,
    snipe_from_slab_limit,
    soft_threshold_map,
)


def central_diff(fn, x, h):
    return (fn(x + h) - fn(x - h)) / (2.0 * h)


def generic_points(seed, count=100, scale=4.0):
    rng = np.random.default_rng(seed)
    hats = rng.uniform(-scale, scale, count)
    nus = 10.0 ** rng.uniform(-1.0, 1.0, count)
    return hats, nus


class TestSnipe:
    def test_zero_input(self):
        assert snipe(0.0, 1.0, SnipeParams(0.0)).value == 0.0

    def test_stated_value(self):
        ev = snipe(1.0, 1.0, SnipeParams(0.0))
        assert ev.value == pytest.approx(1.0 / (1.0 + np.exp(-0.5)), abs=1e-12)

    def test_large_input_passthrough(self):
        ev = snipe(100.0, 1.0, SnipeParams(0.0))
        assert ev.value == pytest.approx(100.0, rel=1e-12)

    def test_odd_symmetry_exact(self):
        q = np.linspace(-8, 8, 41)
        params = SnipeParams(1.5)
        pos = snipe(q, 1.3, params).value
        neg = snipe(-q, 1.3, params).value
        assert np.array_equal(pos, -neg)

    @settings(max_examples=60, deadline=None)
    @given(
        q=st.floats(-10, 10),
        log_nu=st.floats(-1, 1),
        omega=st.floats(-2, 5),
    )
    def test_derivative_finite_difference(self, q, log_nu, omega):
        nu = 10.0**log_nu
        params = SnipeParams(omega)
        h = 1e-5 * max(abs(q), 1.0)
        fd = central_diff(lambda t: snipe(t, nu, params).value, q, h)
        an = snipe(q, nu, params).derivative
        assert an == pytest.approx(fd, rel=1e-4, abs=1e-6)


class TestSnipeSlabLimit:
    def test_wide_slab_matches_closed_form(self):
        val = snipe_from_slab_limit(1.0, 1.0, 0.0, 1e6)
        assert val == pytest.approx(snipe(1.0, 1.0, SnipeParams(0.0)).value, abs=1e-3)

    def test_zero_center_is_zero(self):
        for sigma in (1e2, 1e4, 1e6):
            assert snipe_from_slab_limit(0.0, 1.0, 1.0, sigma) == pytest.approx(0.0, abs=1e-14)

    def test_monotone_approach(self):
        target = snipe(1.0, 1.0, SnipeParams(0.0)).value
        errs = [
            abs(snipe_from_slab_limit(1.0, 1.0, 0.0, sigma) - target)
            for sigma in (1e2, 1e4, 1e6)
        ]
        assert errs[0] > errs[1] > errs[2]

    def test_declared_grid_agreement(self):
        # the full sigma=1e6 grid is exercised by the acceptance suite; this
        # spot-checks the corners
        for omega in (-2.0, 5.0):
            for nu in (0.1, 10.0):
                for q in (-10.0, 0.5, 10.0):
                    closed = snipe(q, nu, SnipeParams(omega)).value
                    limit = snipe_from_slab_limit(q, nu, omega, 1e6)
                    assert limit == pytest.approx(closed, abs=1e-3)


class TestAwgnOutput:
    def test_match_keeps_value(self):
        ev = awgn_output_mmse(2.5, 1.0, AwgnChannelParams(y=2.5, noise_var=0.7))
        assert ev.value == pytest.approx(2.5)

    def test_noiseless_limit(self):
        ev = awgn_output_mmse(0.3, 1.0, AwgnChannelParams(y=9.0, noise_var=0.0))
        assert ev.value == pytest.approx(9.0)
        assert ev.derivative == pytest.approx(0.0)

    def test_balanced_case(self):
        ev = awgn_output_mmse(0.0, 1.0, AwgnChannelParams(y=1.0, noise_var=1.0))
        assert ev.value == pytest.approx(0.5)
        assert ev.derivative == pytest.approx(0.5)

    def test_against_quadrature(self):
        params = AwgnChannelParams(y=1.0, noise_var=1.0)
        quad = quadrature_mmse(lambda z: (1.0 - z) ** 2 / 2.0, 0.0, 1.0)
        ev = awgn_output_mmse(0.0, 1.0, params)
        assert ev.value == pytest.approx(quad.value, abs=1e-8)
        assert ev.derivative == pytest.approx(quad.derivative, abs=1e-8)


class TestSoftThreshold:
    def test_above_threshold(self):
        assert soft_threshold_map(3.0, 1.0, 1.0).value == pytest.approx(2.0)

    def test_dead_zone(self):
        ev = soft_threshold_map(0.5, 1.0, 1.0)
        assert ev.value == 0.0 and ev.derivative == 0.0

    def test_negative_side(self):
        assert soft_threshold_map(-3.0, 1.0, 1.0).value == pytest.approx(-2.0)

    @settings(max_examples=40, deadline=None)
    @given(r=st.floats(-6, 6), log_nu=st.floats(-1, 1), lam=st.floats(0.1, 3))
    def test_matches_dense_minimization(self, r, log_nu, lam):
        nu = 10.0**log_nu
        grid = np.linspace(r - 5 * max(nu, 1), r + 5 * max(nu, 1), 400001)
        spacing = grid[1] - grid[0]
        objective = lam * np.abs(grid) + (grid - r) ** 2 / (2 * nu)
        best = grid[np.argmin(objective)]
        assert soft_threshold_map(r, nu, lam).value == pytest.approx(best, abs=spacing + 1e-9)


class TestBernoulliGaussian:
    def test_pure_gaussian(self):
        ev = bernoulli_gaussian_mmse(2.0, 0.5, BernoulliGaussianParams(beta=1.0, sigma_sq=2.0))
        assert ev.value == pytest.approx(2.0 * 2.0 / 2.5)

    def test_odd(self):
        params = BernoulliGaussianParams(beta=0.4, sigma_sq=1.3)
        assert bernoulli_gaussian_mmse(0.0, 1.0, params).value == pytest.approx(0.0)

    def test_against_quadrature(self):
        beta, s2 = 0.5, 1.0
        params = BernoulliGaussianParams(beta=beta, sigma_sq=s2)
        ev = bernoulli_gaussian_mmse(1.0, 0.1, params)

        def slab_penalty(u):
            return -np.log(beta) + u * u / (2 * s2) + 0.5 * np.log(2 * np.pi * s2)

        quad = quadrature_mmse(slab_penalty, 1.0, 0.1, spike_weight=1.0 - beta)
        assert ev.value == pytest.approx(quad.value, abs=1e-8)
        assert ev.derivative == pytest.approx(quad.derivative, abs=1e-8)

    def test_param_validation(self):
        with pytest.raises(ValueError):
            BernoulliGaussianParams(beta=0.0, sigma_sq=1.0)
        with pytest.raises(ValueError):
            BernoulliGaussianParams(beta=0.5, sigma_sq=0.0)


class TestNonneg:
    def test_map_cases(self):
        assert nonneg_map(2.0, 1.0).value == 2.0
        assert nonneg_map(-2.0, 1.0).value == 0.0
        ev = nonneg_map(0.0, 1.0)
        assert ev.value == 0.0 and ev.derivative == 0.0

    def test_mmse_truncation_inactive(self):
        ev = nonneg_mmse(50.0, 1.0)
        assert ev.value == pytest.approx(50.0, abs=1e-10)

    def test_mmse_half_normal(self):
        assert nonneg_mmse(0.0, 1.0).value == pytest.approx(np.sqrt(2 / np.pi), abs=1e-12)

    def test_mmse_deep_negative(self):
        ev = nonneg_mmse(-50.0, 1.0)
        assert 0.0 <= ev.value <= 0.02
        assert np.isfinite(ev.derivative)

    def test_never_nan(self):
        r = np.array([-1e6, -1e3, -200.0, 0.0, 200.0, 1e6])
        ev = nonneg_mmse(r, np.ones_like(r))
        assert np.all(np.isfinite(ev.value)) and np.all(np.isfinite(ev.derivative))
        assert np.all(ev.value >= 0.0)

    def test_mmse_against_quadrature(self):
        for r in (-2.0, -0.3, 0.0, 0.7, 3.0):
            quad = quadrature_mmse(
                lambda x: 0.0 if x >= 0 else np.inf, r, 1.0, support=(0.0, np.inf)
            )
            ev = nonneg_mmse(r, 1.0)
            assert ev.value == pytest.approx(quad.value, abs=1e-8)
            assert ev.derivative == pytest.approx(quad.derivative, abs=1e-7)


class TestQuadrature:
    def test_zero_penalty_returns_center(self):
        ev = quadrature_mmse(lambda x: 0.0, 1.7, 2.0)
        assert ev.value == pytest.approx(1.7, abs=1e-10)
        assert ev.derivative == pytest.approx(1.0, abs=1e-8)

    def test_invalid_variance(self):
        with pytest.raises(ValueError):
            quadrature_mmse(lambda x: 0.0, 0.0, 0.0)


class TestDerivativeGates:
    """Central finite differences validate every analytic derivative."""

    cases = [
        ("snipe", lambda h, nu: snipe(h, nu, SnipeParams(1.0))),
        ("awgn", lambda h, nu: awgn_output_mmse(h, nu, AwgnChannelParams(y=0.7, noise_var=0.8))),
        ("soft", lambda h, nu: soft_threshold_map(h, nu, 0.9)),
        ("bg", lambda h, nu: bernoulli_gaussian_mmse(h, nu, BernoulliGaussianParams(0.3, 2.0))),
        ("nonneg_map", lambda h, nu: nonneg_map(h, nu)),
        ("nonneg_mmse", lambda h, nu: nonneg_mmse(h, nu)),
    ]

    @pytest.mark.parametrize("name,fn", cases, ids=[c[0] for c in cases])
    def test_100_random_points(self, name, fn):
        hats, nus = generic_points(hash(name) % 2**32)
        checked = 0
        for h0, nu in zip(hats, nus):
            step = 1e-5 * max(abs(h0), 1.0)
            if name in ("soft", "nonneg_map"):
                # piecewise-linear: skip points within a step of the kink
                kink = 0.9 * nu if name == "soft" else 0.0
                if abs(abs(h0) - kink) < 10 * step:
                    continue
            fd = central_diff(lambda t: fn(t, nu).value, h0, step)
            an = fn(h0, nu).derivative
            assert float(an) == pytest.approx(fd, rel=1e-4, abs=1e-7), (name, h0, nu)
            checked += 1
        assert checked >= 90

    @pytest.mark.parametrize("name,fn", cases, ids=[c[0] for c in cases])
    def test_derivative_ranges(self, name, fn):
        hats, nus = generic_points(hash(name) % 2**31, count=200)
        ders = np.array([float(fn(h, nu).derivative) for h, nu in zip(hats, nus)])
        assert np.all(ders >= -1e-12)
        if name in ("awgn", "nonneg_mmse"):
            # log-concave priors keep the posterior-variance ratio below one
            assert np.all(ders <= 1.0 + 1e-12)
        if name in ("soft", "nonneg_map"):
            assert set(np.unique(ders)) <= {0.0, 1.0}
