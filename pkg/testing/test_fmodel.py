import functools

import numpy as np
import pytest

import common
import diagnostics
import field
import fmodel
import multipliers
import testing
from field import GridSpec, SpectralField
from fmodel import IntegratorConfig, Termination
from multipliers import ModelParams


GRID16 = GridSpec(16)
GRID32 = GridSpec(32)


class TestRightHandSides:
    def test_zero_field(self):
        zero = SpectralField.zeros(GRID16)
        assert np.all(fmodel.rhs_nonautonomous(zero, 0.3, testing.GROWING_RADIUS).half == 0)
        assert np.all(fmodel.rhs_autonomous(zero).half == 0)
        assert np.all(fmodel.rhs_linearized(zero, 0.0, testing.AUTONOMOUS).half == 0)

    def test_nonzero_mean_is_rejected(self):
        f = SpectralField.from_function(lambda x: 1.0 + np.sin(x), GRID16)
        with pytest.raises(common.ContractError):
            fmodel.rhs_nonautonomous(f, 0.0, testing.AUTONOMOUS)
        with pytest.raises(common.ContractError):
            fmodel.rhs_autonomous(f)

    def test_single_mode(self):
        a = 0.3
        f = testing.single_mode(GRID16, 1, a)
        out = fmodel.rhs_nonautonomous(f, 0.0, testing.AUTONOMOUS)
        assert out.coeff(1) == pytest.approx(0.25 * a / 2, abs=1e-15)
        nonlinear = out.half.copy()
        nonlinear[1] = 0.0
        assert np.all(np.abs(nonlinear[3:]) < 1e-15)
        assert abs(nonlinear[2]) > 0

    def test_single_mode_autonomous(self):
        f = testing.single_mode(GRID16, 1, 0.5)
        out = fmodel.rhs_autonomous(f)
        assert out.coeff(1) == pytest.approx(multipliers.l_symbol(1, 0.0, testing.AUTONOMOUS) * f.coeff(1))

    def test_output_mean_is_zero(self):
        f = testing.random_mean_zero_field(GRID32, np.random.default_rng(2))
        assert fmodel.rhs_nonautonomous(f, 0.7, ModelParams(alpha=-1.0)).half[0] == 0

    @pytest.mark.parametrize("t", [0.0, 0.4, 3.0])
    def test_autonomous_matches_nonautonomous(self, t):
        rng = np.random.default_rng(17)
        for _ in range(10):
            f = testing.random_mean_zero_field(GRID32, rng)
            a = fmodel.rhs_autonomous(f)
            b = fmodel.rhs_nonautonomous(f, t, testing.AUTONOMOUS)
            assert np.max(np.abs(a.half - b.half)) < 1e-12

    def test_small_amplitude_linearises(self):
        f = testing.random_mean_zero_field(GRID32, np.random.default_rng(19))
        p = ModelParams(alpha=-1.0)
        errors = []
        for a in (1e-2, 5e-3):
            out = fmodel.rhs_nonautonomous(field.scale(f, a), 0.2, p)
            linear = multipliers.apply_L(field.scale(f, a), 0.2, p)
            errors.append(field.norms(field.add(out, field.scale(linear, -1.0))).l2)
        assert errors[0] / errors[1] == pytest.approx(4.0, rel=0.15)


class TestLinearized:
    @pytest.mark.parametrize("n", [1, 2, 5, 10])
    def test_matches_dispersion(self, n):
        g = testing.single_mode(GRID32, n)
        out = fmodel.rhs_linearized(g, 0.0, testing.AUTONOMOUS)
        assert out.coeff(n) / g.coeff(n) == pytest.approx(diagnostics.dispersion_lambda(n), abs=1e-12)

    def test_mode_one_rate(self):
        assert fmodel.linearized_symbol(1, 0.0, testing.AUTONOMOUS) == pytest.approx(1.1875)

    def test_derived_form_at_alpha_minus_three(self):
        l_value = multipliers.l_symbol(np.arange(5), 0.0, testing.AUTONOMOUS)
        derived = fmodel.linearized_symbol(np.arange(5), 0.0, testing.AUTONOMOUS, fmodel.LinearizationForm.DERIVED)
        np.testing.assert_allclose(derived, 4 * l_value - 6 * l_value ** 2, atol=1e-14)


class TestIntegratorConfig:
    def test_defaults(self):
        cfg = IntegratorConfig()
        assert cfg.abs_tol == 1e-10
        assert cfg.rel_tol == 1e-8
        assert cfg.blowup_cap == 1e3

    @pytest.mark.parametrize("options", [
        {"abs_tol": 0.0}, {"rel_tol": -1.0}, {"dt_min": 1e-2, "dt_init": 1e-3},
        {"blowup_cap": 0.0}, {"snapshot_stride": 0}, {"fixed_dt": 0.0}, {"t_end": 0.0},
    ])
    def test_invalid(self, options):
        with pytest.raises(common.ArgumentError):
            IntegratorConfig(**options)


class TestIntegrate:
    def test_zero_initial_data(self):
        record = fmodel.integrate(SpectralField.zeros(GRID16), fmodel.FModelVariant.AUTONOMOUS,
                                  IntegratorConfig(t_end=0.5), testing.AUTONOMOUS)
        assert record.termination is Termination.REACHED_T_END
        assert record.final_time == 0.5
        assert np.all(record.sup_norms == 0)
        assert all(np.all(s.half == 0) for s in record.snapshots)

    def test_linear_mode_one_growth(self):
        g0 = testing.single_mode(GRID32, 1)
        record = fmodel.integrate(g0, fmodel.FModelVariant.LINEARIZED, IntegratorConfig(t_end=0.1),
                                  testing.AUTONOMOUS)
        ratio = record.final_state.coeff(1) / g0.coeff(1)
        assert abs(ratio - np.exp(0.11875)) < 1e-6 * np.exp(0.11875)

    def test_dispersion_reproduction(self):
        g0 = field.add(testing.single_mode(GRID32, 1), testing.single_mode(GRID32, 2))
        record = fmodel.integrate(g0, fmodel.rhs_linearized, IntegratorConfig(t_end=0.1), testing.AUTONOMOUS)
        for n, rate in ((1, 1.1875), (2, 3 * 16 / (4 * 25) + 8 / 5)):
            ratio = (record.final_state.coeff(n) / g0.coeff(n)).real
            assert ratio == pytest.approx(np.exp(rate * 0.1), rel=1e-6)

    def test_record_layout(self):
        f0 = testing.sine(GRID32, 1, 0.1)
        record = fmodel.integrate(f0, fmodel.FModelVariant.NONAUTONOMOUS,
                                  IntegratorConfig(t_end=0.3, snapshot_stride=3), testing.GROWING_RADIUS)
        n = len(record.times)
        for column in (record.sup_norms, record.h2_norms, record.continuation_integral,
                       record.energies, record.dissipations, record.step_sizes):
            assert len(column) == n
        assert np.all(np.diff(record.continuation_integral) >= 0)
        assert np.all(np.diff(record.times) > 0)
        assert record.snapshot_times[0] == 0.0
        assert record.snapshot_times[-1] == record.final_time == 0.3
        assert all(s.is_mean_zero for s in record.snapshots)

    def test_continuation_integral_matches_trapezoid(self):
        f0 = testing.sine(GRID32, 1, 0.1)
        p = testing.GROWING_RADIUS
        record = fmodel.integrate(f0, fmodel.FModelVariant.NONAUTONOMOUS, IntegratorConfig(t_end=0.2), p)
        expected = diagnostics.continuation_integral(record.times, record.sup_norms, p)
        np.testing.assert_allclose(record.continuation_integral, expected, rtol=1e-12)

    def test_fixed_step_convergence_order(self):
        g0 = testing.single_mode(GRID32, 3)
        exact = np.exp(fmodel.linearized_symbol(3, 0.0, testing.AUTONOMOUS) * 1.0)
        errors = []
        for dt in (0.1, 0.05):
            cfg = IntegratorConfig(t_end=1.0, fixed_dt=dt, dt_init=dt)
            record = fmodel.integrate(g0, fmodel.FModelVariant.LINEARIZED, cfg, testing.AUTONOMOUS)
            errors.append(abs(record.final_state.coeff(3) / g0.coeff(3) - exact))
        assert np.log2(errors[0] / errors[1]) >= 3.8

    def test_derived_linearization_via_partial(self):
        g0 = testing.single_mode(GRID32, 1)
        rhs = functools.partial(fmodel.rhs_linearized, form=fmodel.LinearizationForm.DERIVED)
        record = fmodel.integrate(g0, rhs, IntegratorConfig(t_end=0.1), testing.AUTONOMOUS)
        rate = 4 * 0.25 - 6 * 0.25 ** 2
        assert (record.final_state.coeff(1) / g0.coeff(1)).real == pytest.approx(np.exp(rate * 0.1), rel=1e-6)

    def test_blowup_cap_terminates(self):
        def explosive(f, t, p):
            return field.scale(f, 50.0)

        record = fmodel.integrate(testing.sine(GRID16, 1), explosive,
                                  IntegratorConfig(t_end=1.0, blowup_cap=10.0), testing.AUTONOMOUS)
        assert record.termination is Termination.BLOWUP_CAP_HIT
        assert record.sup_norms[-1] > 10.0
        assert record.final_time < 1.0

    def test_dt_underflow_terminates(self):
        def singular(f, t, p):
            # f' = 10 f / (0.05 - t) blows up at t = 0.05
            scale = 1.0 / max(0.05 - t, 1e-300)
            return field.project_mean_zero(field.scale(f, scale * 10.0))

        record = fmodel.integrate(testing.sine(GRID16, 1), singular,
                                  IntegratorConfig(t_end=1.0, blowup_cap=1e300, dt_min=1e-9), testing.AUTONOMOUS)
        assert record.termination in (Termination.DT_UNDERFLOW, Termination.BLOWUP_CAP_HIT)
        assert record.final_time < 0.05

    def test_nan_raises(self):
        def broken(f, t, p):
            return f.with_half(np.full(f.grid.half_size, np.nan))

        with pytest.raises(common.NumericalFailure):
            fmodel.integrate(testing.sine(GRID16, 1), broken, IntegratorConfig(t_end=1.0, fixed_dt=0.1),
                             testing.AUTONOMOUS)

    def test_rejects_nonzero_mean(self):
        f0 = SpectralField.from_function(lambda x: 1.0 + np.sin(x), GRID16)
        with pytest.raises(common.ContractError):
            fmodel.integrate(f0, fmodel.FModelVariant.LINEARIZED, IntegratorConfig(), testing.AUTONOMOUS)

    def test_spectral_resolution(self):
        p = ModelParams(alpha=-1.0)
        cfg = IntegratorConfig(t_end=1.0, fixed_dt=0.01, dt_init=0.01)
        finals = []
        for n_nodes in (32, 64):
            grid = GridSpec(n_nodes)
            record = fmodel.integrate(testing.sine(grid, 1, 0.05), fmodel.FModelVariant.NONAUTONOMOUS, cfg, p)
            assert record.termination is Termination.REACHED_T_END
            finals.append(record.final_state)
        coarse, fine = finals
        for n in range(1, 10):
            assert abs(coarse.coeff(n) - fine.coeff(n)) < 1e-8


# sup|f| of the autonomous model from sin(2x), from an independent method-of-lines RK45 solve at N = 1024
SIN_2X_SUP_NORMS = [(0.1, 1.0485), (0.2, 1.100), (0.35, 1.184), (0.5, 1.277), (1.0, 1.6735)]


@pytest.mark.slow
@pytest.mark.parametrize("t_end, expected", SIN_2X_SUP_NORMS)
def test_autonomous_sin_2x_trajectory(t_end, expected):
    grid = GridSpec(2 ** 10)
    record = fmodel.integrate(testing.sine(grid, 2), fmodel.FModelVariant.AUTONOMOUS,
                              IntegratorConfig(t_end=t_end, dt_init=1e-4, snapshot_stride=100), testing.AUTONOMOUS)
    assert record.termination is Termination.REACHED_T_END
    assert record.final_time == pytest.approx(t_end)
    assert record.sup_norms[-1] == pytest.approx(expected, rel=2e-3)
    assert np.all(record.sup_norms < 10.0)


@pytest.mark.slow
def test_small_data_energy_decay():
    grid = GridSpec(64)
    p = testing.GROWING_RADIUS
    record = fmodel.integrate(testing.sine(grid, 1, 1e-3), fmodel.FModelVariant.NONAUTONOMOUS,
                              IntegratorConfig(t_end=5.0, snapshot_stride=50), p)
    assert record.termination is Termination.REACHED_T_END
    assert diagnostics.energy_is_nonincreasing(record.energies, rel_tol=1e-12)
    assert np.isfinite(record.continuation_integral[-1])
