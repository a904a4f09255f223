"""
The first two levels of the linear hierarchy behind the f-model.

    g0_t = L_t g0
    g1_t = L_t g1 + N_t(g0)

N_t is the quadratic part of the f-model right-hand side. The composed field
eps g0 + eps^2 g1 approximates the f-model solution started from eps f0 up to
a remainder of order eps^3.
"""
import dataclasses
import logging

import numpy as np

try:
    from . import common
    from . import field
    from . import fmodel
    from . import multipliers
    from .multipliers import ModelParams
except ImportError:
    import common
    import field
    import fmodel
    import multipliers
    from multipliers import ModelParams

logger = logging.getLogger(__name__)

# Hermite interpolation of g0 has to stay below the integrator tolerance
DEFAULT_CASCADE_CONFIG = fmodel.IntegratorConfig(t_end=1.0, max_dt=0.02, snapshot_stride=1)

MAX_LEVEL = 1


class DenseTrajectory:
    """
    Accepted states of a run together with their time derivatives, evaluated in
    between by cubic Hermite interpolation.
    """

    def __init__(self, grid: field.GridSpec, times, states, slopes):
        self.grid = grid
        self.times = np.asarray(times, dtype=np.float64)
        self.states = np.array(states, dtype=np.complex128)
        self.slopes = np.array(slopes, dtype=np.complex128)
        if len(self.times) < 1 or self.states.shape != self.slopes.shape or len(self.times) != len(self.states):
            raise common.ArgumentError("times, states and slopes must have matching lengths")
        self._span_tol = 1e-12 * max(1.0, float(np.max(np.abs(self.times))))

    @classmethod
    def from_record(cls, grid: field.GridSpec, record: fmodel.RunRecord) -> "DenseTrajectory":
        if record.dense_states is None:
            raise common.ArgumentError("run was integrated without dense output")
        return cls(grid, record.times, record.dense_states, record.dense_slopes)

    @property
    def t_start(self) -> float:
        return float(self.times[0])

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    def covers(self, t0: float, t1: float) -> bool:
        return t0 >= self.t_start - self._span_tol and t1 <= self.t_end + self._span_tol

    def at(self, t: float) -> field.SpectralField:
        if not self.covers(t, t):
            raise common.ArgumentError(
                "t={} outside trajectory span [{}, {}]".format(t, self.t_start, self.t_end)
            )
        if len(self.times) == 1:
            return field.SpectralField(self.grid, self.states[0])
        t = min(max(t, self.t_start), self.t_end)
        i = int(np.clip(np.searchsorted(self.times, t, side="right") - 1, 0, len(self.times) - 2))
        h = self.times[i + 1] - self.times[i]
        theta = (t - self.times[i]) / h
        theta2 = theta * theta
        theta3 = theta2 * theta
        half = (
            (2 * theta3 - 3 * theta2 + 1) * self.states[i]
            + (theta3 - 2 * theta2 + theta) * h * self.slopes[i]
            + (-2 * theta3 + 3 * theta2) * self.states[i + 1]
            + (theta3 - theta2) * h * self.slopes[i + 1]
        )
        return field.SpectralField(self.grid, half)

    def final_state(self) -> field.SpectralField:
        return field.SpectralField(self.grid, self.states[-1])


class ExactG0:
    """g0(n, t) = g0(n, t0) exp(int_{t0}^{t} l_symbol(n, s) ds), in closed form."""

    def __init__(self, g0_init: field.SpectralField, p: ModelParams, t_start: float = 0.0):
        self.g0_init = field.project_mean_zero(g0_init)
        self.p = p
        self.t_start = t_start

    def at(self, t: float) -> field.SpectralField:
        exponent = multipliers.l_symbol_integral(self.g0_init.grid.wavenumbers, self.t_start, t, self.p)
        return self.g0_init.with_half(self.g0_init.half * np.exp(exponent))


@dataclasses.dataclass
class CascadePair:
    g0: DenseTrajectory
    g1: DenseTrajectory
    epsilon: float

    def composed(self, t: float) -> field.SpectralField:
        """eps g0 + eps^2 g1 at time t."""
        eps = self.epsilon
        return field.add(field.scale(self.g0.at(t), eps), field.scale(self.g1.at(t), eps * eps))


@dataclasses.dataclass(frozen=True)
class CascadeComparison:
    epsilon: float
    t_end: float
    err_norm: float
    direct_termination: fmodel.Termination


def cascade_forcing(g0: field.SpectralField, t: float, p: ModelParams) -> field.SpectralField:
    return field.project_mean_zero(fmodel.nonlinear_term(g0, t, p))


def rhs_cascade(level: int, g: field.SpectralField, t: float, p: ModelParams,
                g0: field.SpectralField | None = None) -> field.SpectralField:
    if level == 0:
        return field.project_mean_zero(multipliers.apply_L(g, t, p))
    if level == 1:
        if g0 is None:
            raise common.ArgumentError("level 1 right-hand side needs the level 0 field")
        return field.add(field.project_mean_zero(multipliers.apply_L(g, t, p)), cascade_forcing(g0, t, p))
    raise common.ArgumentError("cascade levels above {} are not implemented, got {}".format(MAX_LEVEL, level))


def _span_config(t_span, cfg: fmodel.IntegratorConfig | None) -> fmodel.IntegratorConfig:
    t0, t1 = t_span
    base = DEFAULT_CASCADE_CONFIG if cfg is None else cfg
    return dataclasses.replace(base, t_start=float(t0), t_end=float(t1))


def solve_g0(g0_init: field.SpectralField, t_span, p: ModelParams,
             cfg: fmodel.IntegratorConfig | None = None) -> DenseTrajectory:
    def rhs(g, t, p):
        return rhs_cascade(0, g, t, p)

    record = fmodel.integrate(g0_init, rhs, _span_config(t_span, cfg), p, dense=True)
    return DenseTrajectory.from_record(g0_init.grid, record)


def solve_g1(g0_traj: DenseTrajectory, g1_init: field.SpectralField, t_span, p: ModelParams,
             cfg: fmodel.IntegratorConfig | None = None) -> DenseTrajectory:
    """
    :raises ArgumentError: when t_span is not covered by g0_traj or the grids differ
    """
    if g0_traj.grid != g1_init.grid:
        raise common.ArgumentError("grid mismatch: {} vs {}".format(g0_traj.grid, g1_init.grid))
    if not g0_traj.covers(*t_span):
        raise common.ArgumentError(
            "g0 trajectory spans [{}, {}], g1 requested on {}".format(g0_traj.t_start, g0_traj.t_end, tuple(t_span))
        )

    def rhs(g, t, p):
        return rhs_cascade(1, g, t, p, g0=g0_traj.at(t))

    record = fmodel.integrate(g1_init, rhs, _span_config(t_span, cfg), p, dense=True)
    return DenseTrajectory.from_record(g1_init.grid, record)


def solve_pair(f0: field.SpectralField, epsilon: float, t_end: float, p: ModelParams,
               cfg: fmodel.IntegratorConfig | None = None) -> CascadePair:
    t_span = (0.0, t_end)
    g0 = solve_g0(f0, t_span, p, cfg)
    g1 = solve_g1(g0, field.SpectralField.zeros(f0.grid), t_span, p, cfg)
    return CascadePair(g0=g0, g1=g1, epsilon=epsilon)


def compose_and_compare(f0: field.SpectralField, epsilon: float, t_end: float, p: ModelParams,
                        cfg: fmodel.IntegratorConfig | None = None) -> CascadeComparison:
    """
    H2 distance at t_end between the f-model started from eps f0 and eps g0 + eps^2 g1
    with g0(0) = f0, g1(0) = 0.
    """
    pair = solve_pair(f0, epsilon, t_end, p, cfg)
    direct = fmodel.integrate(
        field.scale(f0, epsilon), fmodel.rhs_nonautonomous, _span_config((0.0, t_end), cfg), p
    )
    if direct.termination is not fmodel.Termination.REACHED_T_END:
        logger.warning("direct f-model solve stopped early at t={}: {}".format(
            direct.final_time, direct.termination.value))
    difference = field.add(direct.final_state, field.scale(pair.composed(direct.final_time), -1.0))
    err_norm = field.norms(difference).h2
    logger.info("eps={:.3g}: cascade remainder {:.3e} in H2".format(epsilon, err_norm))
    return CascadeComparison(epsilon=epsilon, t_end=t_end, err_norm=err_norm, direct_termination=direct.termination)
