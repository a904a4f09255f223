import numpy as np
import pytest
import scipy.integrate
from hypothesis import given, settings, strategies as st

import common
import field
import multipliers
import testing
from field import GridSpec
from multipliers import ModelParams


class TestModelParams:
    def test_defaults_are_autonomous(self):
        assert ModelParams().is_autonomous
        assert not ModelParams(alpha=0.0).is_autonomous

    @pytest.mark.parametrize("name", ["K", "R0", "epsilon", "h_inf"])
    def test_positive_fields(self, name):
        with pytest.raises(common.ArgumentError):
            ModelParams(**{name: 0.0})

    def test_negative_delta(self):
        with pytest.raises(common.ArgumentError):
            ModelParams(delta=-1.0)


class TestSymbols:
    def test_q_at_zero_mode(self):
        assert multipliers.q_symbol(0, 3.0, testing.GROWING_RADIUS) == 1.0

    def test_l_autonomous_values(self):
        p = testing.AUTONOMOUS
        assert multipliers.l_symbol(0, 0.0, p) == 0.0
        assert multipliers.l_symbol(1, 0.0, p) == pytest.approx(0.25)
        assert multipliers.l_symbol(2, 7.0, p) == pytest.approx(0.4)

    def test_q_autonomous_value(self):
        assert multipliers.q_symbol(2, 0.0, testing.AUTONOMOUS) == pytest.approx(0.2)

    def test_vectorised(self):
        n = np.arange(5)
        values = multipliers.q_symbol(n, 0.0, testing.AUTONOMOUS)
        np.testing.assert_allclose(values, 1 / (1 + n ** 2))

    @given(
        n=st.integers(min_value=-10_000, max_value=10_000),
        t=st.floats(min_value=0.0, max_value=50.0),
        alpha=st.sampled_from([-3.0, -2.0, -1.0, 0.0, 1.0]),
    )
    @settings(max_examples=200)
    def test_symbol_bounds(self, n, t, alpha):
        p = ModelParams(alpha=alpha)
        q = multipliers.q_symbol(n, t, p)
        assert 0.0 < q <= 1.0 or (q == 0.0 and multipliers.log_weight(t, p) + np.log(n * n) > common.EXP_OVERFLOW)
        l_value = multipliers.l_symbol(n, t, p)
        assert abs(l_value) <= abs(2.5 + alpha) + 1e-15

    def test_overflow_limits(self):
        p = testing.GROWING_RADIUS
        assert multipliers.q_symbol(3, 1e4, p) == 0.0
        assert multipliers.l_symbol(3, 1e4, p) == pytest.approx(-2.5)
        assert multipliers.lambda_weight(1e4, p) == np.inf

    @pytest.mark.parametrize("alpha", [-3.0, -1.0, 0.0, 1.0])
    @pytest.mark.parametrize("t", [0.0, 0.5, 2.0])
    def test_q_decreases_in_abs_n(self, alpha, t):
        p = ModelParams(K=0.1, alpha=alpha)
        n = np.arange(0, 200)
        q = multipliers.q_symbol(n, t, p)
        assert np.all(np.diff(q) < 0)
        np.testing.assert_array_equal(multipliers.q_symbol(-n, t, p), q)

    @given(
        n=st.integers(min_value=-10_000, max_value=10_000),
        t=st.floats(min_value=0.0, max_value=5.0),
        alpha=st.sampled_from([-3.0, -1.0, 0.0, 1.0]),
        K=st.sampled_from([1e-5, 0.1, 1.0, 10.0]),
    )
    def test_smoothing_bound(self, n, t, alpha, K):
        p = ModelParams(K=K, alpha=alpha)
        kappa = multipliers.lambda_weight(t, p)
        bound = max(1.0, 1.0 / kappa)
        assert ((1 + n * n) * multipliers.q_symbol(n, t, p)) ** 2 <= bound ** 2 * (1 + 1e-12)

    @given(
        f=testing.mean_zero_fields(GridSpec(32)),
        t=st.floats(min_value=0.0, max_value=5.0),
        alpha=st.sampled_from([-3.0, -2.0, -1.0, 0.0, 1.0]),
    )
    def test_l_operator_norm(self, f, t, alpha):
        p = ModelParams(alpha=alpha)
        bound = (2.5 + abs(alpha)) * field.norms(f).l2
        assert field.norms(multipliers.apply_L(f, t, p)).l2 <= bound * (1 + 1e-12)

    def test_lambda_weight(self):
        assert multipliers.lambda_weight(1.0, ModelParams(K=2.0, R0=1.0, alpha=0.0)) == pytest.approx(2 * np.exp(3))

    @pytest.mark.parametrize("alpha", [-3.0, -1.0, 0.0, 1.0])
    @pytest.mark.parametrize("t", [0.0, 1.0, 5.0])
    def test_operator_identity(self, alpha, t):
        grid = GridSpec(64)
        p = ModelParams(alpha=alpha)
        rng = np.random.default_rng(11)
        for _ in range(100):
            f = testing.random_mean_zero_field(grid, rng, max_mode=31)
            lf = multipliers.apply_L(f, t, p)
            rhs = field.scale(field.add(multipliers.apply_Q(f, t, p), field.scale(f, -1.0)), p.viscous_factor)
            difference = field.norms(field.add(lf, field.scale(rhs, -1.0))).l2
            assert difference <= 1e-12 * field.norms(f).l2

    @pytest.mark.parametrize("alpha", [-3.0, -1.0, 0.5])
    def test_l_symbol_integral(self, alpha):
        p = ModelParams(K=0.7, alpha=alpha)
        for n in [1, 2, 7]:
            quadrature, _ = scipy.integrate.quad(lambda s: multipliers.l_symbol(n, s, p), 0.2, 1.3)
            assert multipliers.l_symbol_integral(n, 0.2, 1.3, p) == pytest.approx(quadrature, rel=1e-10)


class TestGreensFunction:
    @pytest.mark.parametrize("t", [0.0, 0.5])
    def test_unit_mass(self, t):
        grid = GridSpec(1024)
        assert multipliers.greens_mass(t, testing.GROWING_RADIUS, grid) == pytest.approx(1.0, abs=1e-8)

    @pytest.mark.parametrize("t", [0.0, 0.5])
    def test_convolution_matches_multiplier(self, t):
        grid = GridSpec(1024)
        p = testing.GROWING_RADIUS
        f = testing.random_mean_zero_field(grid, np.random.default_rng(13), max_mode=16)
        by_multiplier = field.to_physical(multipliers.apply_Q(f, t, p))
        by_convolution = multipliers.convolve_with_greens(f, t, p)
        np.testing.assert_allclose(by_convolution, by_multiplier, atol=1e-6)

    @pytest.mark.parametrize("t", [0.0, 0.5, 1.0])
    def test_even_and_positive(self, t):
        grid = GridSpec(256)
        samples = multipliers.greens_function(t, ModelParams(K=0.5, alpha=0.0), grid)
        assert np.all(samples > 0)
        np.testing.assert_allclose(samples[1:], samples[1:][::-1], rtol=1e-12)

    def test_convolution_matches_multiplier_on_random_fields(self):
        grid = GridSpec(1024)
        p = testing.GROWING_RADIUS
        rng = np.random.default_rng(29)
        for _ in range(50):
            f = testing.random_mean_zero_field(grid, rng, max_mode=16)
            by_multiplier = field.to_physical(multipliers.apply_Q(f, 0.25, p))
            by_convolution = multipliers.convolve_with_greens(f, 0.25, p)
            np.testing.assert_allclose(by_convolution, by_multiplier, atol=1e-6)

    def test_small_scale_does_not_overflow(self):
        p = ModelParams(K=1e-6, alpha=-3.0)
        samples = multipliers.greens_function(0.0, p, GridSpec(64))
        assert np.all(np.isfinite(samples))

    def test_requires_two_pi_period(self):
        with pytest.raises(common.UnsupportedConfiguration):
            multipliers.greens_function(0.0, testing.AUTONOMOUS, GridSpec(64, period=1.0))
