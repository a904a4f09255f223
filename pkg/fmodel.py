"""
Right-hand sides of the f-models and their adaptive time integration.

The non-autonomous f-model for R(t) = e^{alpha t} reads

    f_t = L_t f + Q_t d_x [ kappa ( 3/2 f_x L_t f + 3 (L_t f_x) f + 3 (5/2 + alpha) f_x f ) ],

kappa = (K/R0) e^{(3+alpha)t}. With alpha = -3 and K/R0 = 1 the operators stop
depending on time and the autonomous model is recovered.
"""
import dataclasses
import enum
import logging
from typing import Callable

import numpy as np

try:
    from . import common
    from . import diagnostics
    from . import field
    from . import multipliers
    from .multipliers import ModelParams
except ImportError:
    import common
    import diagnostics
    import field
    import multipliers
    from multipliers import ModelParams

logger = logging.getLogger(__name__)

AUTONOMOUS_PARAMS = ModelParams(K=1.0, R0=1.0, alpha=-3.0)

RhsFunction = Callable[[field.SpectralField, float, ModelParams], field.SpectralField]


class Termination(enum.Enum):
    REACHED_T_END = "reached_t_end"
    BLOWUP_CAP_HIT = "blowup_cap_hit"
    DT_UNDERFLOW = "dt_underflow"


class FModelVariant(enum.Enum):
    NONAUTONOMOUS = "nonautonomous"
    AUTONOMOUS = "autonomous"
    LINEARIZED = "linearized"


class LinearizationForm(enum.Enum):
    # 3 L_t^2 g + 4 L_t g; reduces to 3 L^2 g + 4 L g and the dispersion relation lambda(n)
    DISPERSION = "dispersion"
    # 3 kappa Q_t L_t g_xx + 4 L_t g; equals 4 L g - 6 L^2 g at alpha = -3
    DERIVED = "derived"


def _check_mean_zero(f: field.SpectralField):
    if abs(f.half[0]) > common.MEAN_ZERO_TOL:
        raise common.ContractError("f-model input must have zero mean, mean = {:.3e}".format(abs(f.half[0])))


def nonlinear_term(f: field.SpectralField, t: float, p: ModelParams) -> field.SpectralField:
    """Q_t d_x of the bracketed products, each product dealiased."""
    kappa = multipliers.lambda_weight(t, p)
    fx = field.derivative(f, 1)
    f_phys = field.to_physical(f)
    fx_phys = field.to_physical(fx)
    lf_phys = field.to_physical(multipliers.apply_L(f, t, p))
    lfx_phys = field.to_physical(multipliers.apply_L(fx, t, p))
    products = kappa * (
        1.5 * fx_phys * lf_phys
        + 3.0 * lfx_phys * f_phys
        + 3.0 * p.viscous_factor * fx_phys * f_phys
    )
    flux = field.dealias(field.to_spectral(products, f.grid))
    return multipliers.apply_Q(field.derivative(flux, 1), t, p)


def rhs_nonautonomous(f: field.SpectralField, t: float, p: ModelParams) -> field.SpectralField:
    _check_mean_zero(f)
    result = field.add(multipliers.apply_L(f, t, p), nonlinear_term(f, t, p))
    return field.project_mean_zero(result)


def rhs_autonomous(f: field.SpectralField, p: ModelParams = AUTONOMOUS_PARAMS) -> field.SpectralField:
    """
    L f + 3/2 Q (f_x L f)_x + 3 Q ((L f_x) f)_x + 3/2 L (f^2) with the time independent
    operators of alpha = -3, K/R0 = 1 (p is accepted for a uniform signature).
    """
    _check_mean_zero(f)
    if not p.is_autonomous:
        logger.debug("rhs_autonomous ignores alpha={}, K/R0={}".format(p.alpha, p.k_over_r0))
    q = AUTONOMOUS_PARAMS
    lf = multipliers.apply_L(f, 0.0, q)
    fx = field.derivative(f, 1)
    bracket = field.add(
        field.scale(field.multiply(fx, lf), 1.5),
        field.scale(field.multiply(multipliers.apply_L(fx, 0.0, q), f), 3.0),
    )
    result = field.add(
        field.add(lf, multipliers.apply_Q(field.derivative(bracket, 1), 0.0, q)),
        field.scale(multipliers.apply_L(field.multiply(f, f), 0.0, q), 1.5),
    )
    return field.project_mean_zero(result)


def linearized_symbol(n, t: float, p: ModelParams, form: LinearizationForm = LinearizationForm.DISPERSION):
    l_value = np.asarray(multipliers.l_symbol(n, t, p))
    if form is LinearizationForm.DISPERSION:
        value = 3.0 * l_value * l_value + 4.0 * l_value
    else:
        k2 = np.asarray(n, dtype=np.float64) ** 2
        kappa = multipliers.lambda_weight(t, p)
        value = -3.0 * kappa * np.asarray(multipliers.q_symbol(n, t, p)) * l_value * k2 + 4.0 * l_value
    if np.ndim(n) == 0:
        return float(value)
    return value


def rhs_linearized(g: field.SpectralField, t: float, p: ModelParams,
                   form: LinearizationForm = LinearizationForm.DISPERSION) -> field.SpectralField:
    symbol = linearized_symbol(g.grid.wavenumbers, t, p, form)
    return field.project_mean_zero(g.with_half(g.half * symbol))


def _autonomous_rhs(f: field.SpectralField, t: float, p: ModelParams) -> field.SpectralField:
    return rhs_autonomous(f, p)


RHS_BY_VARIANT: dict[FModelVariant, RhsFunction] = {
    FModelVariant.NONAUTONOMOUS: rhs_nonautonomous,
    FModelVariant.AUTONOMOUS: _autonomous_rhs,
    FModelVariant.LINEARIZED: rhs_linearized,
}


def resolve_rhs(rhs: FModelVariant | RhsFunction) -> RhsFunction:
    if isinstance(rhs, FModelVariant):
        return RHS_BY_VARIANT[rhs]
    if callable(rhs):
        return rhs
    raise common.ArgumentError("unknown right-hand side {!r}".format(rhs))


@dataclasses.dataclass(frozen=True)
class IntegratorConfig:
    t_end: float = 1.0
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    dt_init: float = 1e-3
    dt_min: float = 1e-12
    blowup_cap: float = 1e3
    snapshot_stride: int = 10
    # None selects the adaptive controller
    fixed_dt: float | None = None
    max_dt: float = np.inf
    t_start: float = 0.0

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise common.ArgumentError("tolerances must be positive")
        if not 0 < self.dt_min < self.dt_init:
            raise common.ArgumentError("need 0 < dt_min < dt_init, got {} and {}".format(self.dt_min, self.dt_init))
        if not self.blowup_cap > 0:
            raise common.ArgumentError("blowup_cap must be positive")
        if int(self.snapshot_stride) != self.snapshot_stride or self.snapshot_stride < 1:
            raise common.ArgumentError("snapshot_stride must be a positive integer")
        if self.fixed_dt is not None and not self.fixed_dt > 0:
            raise common.ArgumentError("fixed_dt must be positive")
        if not self.t_end > self.t_start:
            raise common.ArgumentError("t_end must exceed t_start")


@dataclasses.dataclass
class RunRecord:
    times: np.ndarray
    snapshots: list[field.SpectralField]
    snapshot_times: np.ndarray
    sup_norms: np.ndarray
    h2_norms: np.ndarray
    continuation_integral: np.ndarray
    energies: np.ndarray
    dissipations: np.ndarray
    step_sizes: np.ndarray
    termination: Termination
    rejected_steps: int = 0
    dense_states: list[np.ndarray] | None = None
    dense_slopes: list[np.ndarray] | None = None

    @property
    def final_state(self) -> field.SpectralField:
        return self.snapshots[-1]

    @property
    def final_time(self) -> float:
        return float(self.times[-1])


# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = _A[6]
# fifth minus fourth order weights
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)

_SAFETY = 0.9
_FAC_MIN = 0.2
_FAC_MAX = 5.0
_PI_ALPHA = 0.17
_PI_BETA = 0.04


class _Recorder:
    def __init__(self, grid: field.GridSpec, p: ModelParams, stride: int, dense: bool):
        self.grid = grid
        self.p = p
        self.stride = stride
        self.times = []
        self.sup_norms = []
        self.h2_norms = []
        self.energies = []
        self.dissipations = []
        self.step_sizes = []
        self.continuation = []
        self.snapshots = []
        self.snapshot_times = []
        self.dense_states = [] if dense else None
        self.dense_slopes = [] if dense else None
        self._integrand = None

    def record(self, t: float, y: np.ndarray, dt: float, slope: np.ndarray | None, force_snapshot=False) -> float:
        state = field.SpectralField(self.grid, y)
        norms = field.norms(state)
        energy, dissipation = diagnostics._energy_terms(norms, t, self.p)
        integrand = diagnostics.continuation_integrand(norms.linf, t, self.p)
        if self._integrand is None:
            total = 0.0
        else:
            total = self.continuation[-1] + 0.5 * dt * (self._integrand + integrand)
        self._integrand = integrand
        self.times.append(t)
        self.sup_norms.append(norms.linf)
        self.h2_norms.append(norms.h2)
        self.energies.append(energy)
        self.dissipations.append(dissipation)
        self.step_sizes.append(dt)
        self.continuation.append(total)
        if self.dense_states is not None:
            self.dense_states.append(state.half)
            self.dense_slopes.append(np.array(slope))
        if force_snapshot or (len(self.times) - 1) % self.stride == 0:
            self.snapshots.append(state)
            self.snapshot_times.append(t)
        return norms.linf

    def finish(self, y: np.ndarray, termination: Termination, rejected: int) -> RunRecord:
        if not self.snapshot_times or self.snapshot_times[-1] != self.times[-1]:
            self.snapshots.append(field.SpectralField(self.grid, y))
            self.snapshot_times.append(self.times[-1])
        return RunRecord(
            times=np.array(self.times),
            snapshots=self.snapshots,
            snapshot_times=np.array(self.snapshot_times),
            sup_norms=np.array(self.sup_norms),
            h2_norms=np.array(self.h2_norms),
            continuation_integral=np.array(self.continuation),
            energies=np.array(self.energies),
            dissipations=np.array(self.dissipations),
            step_sizes=np.array(self.step_sizes),
            termination=termination,
            rejected_steps=rejected,
            dense_states=self.dense_states,
            dense_slopes=self.dense_slopes,
        )


def _error_norm(error: np.ndarray, y: np.ndarray, y_new: np.ndarray, cfg: IntegratorConfig) -> float:
    scale = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(y), np.abs(y_new))
    with np.errstate(over="ignore", invalid="ignore"):
        value = float(np.sqrt(np.mean(np.abs(error / scale) ** 2)))
    if not np.isfinite(value):
        return np.inf
    return value


def integrate(f0: field.SpectralField, rhs: FModelVariant | RhsFunction, cfg: IntegratorConfig,
              p: ModelParams, dense: bool = False) -> RunRecord:
    """
    Integrate f_t = rhs(f, t) from cfg.t_start to cfg.t_end with the Dormand-Prince
    pair. The zero mode is projected out after every accepted step.

    :param dense: keep every accepted state and slope for Hermite interpolation
    :rtype: RunRecord whose termination tells why the run stopped
    """
    _check_mean_zero(f0)
    rhs_fn = resolve_rhs(rhs)
    grid = f0.grid

    def evaluate(y: np.ndarray, t: float) -> np.ndarray:
        return rhs_fn(field.SpectralField(grid, y), t, p).half

    recorder = _Recorder(grid, p, cfg.snapshot_stride, dense)
    t = cfg.t_start
    y = np.array(f0.half)
    y[0] = 0.0
    slope = evaluate(y, t)
    recorder.record(t, y, 0.0, slope)

    dt = cfg.fixed_dt if cfg.fixed_dt is not None else min(cfg.dt_init, cfg.max_dt)
    end_tol = 1e-14 * max(1.0, abs(cfg.t_end))
    err_prev = 1.0
    rejected = 0
    step = 0
    termination = Termination.REACHED_T_END

    while cfg.t_end - t > end_tol:
        while True:
            step_dt = min(dt, cfg.t_end - t)
            stages = [slope]
            for i in range(1, 7):
                increment = sum(a * k for a, k in zip(_A[i], stages) if a != 0.0)
                stages.append(evaluate(y + step_dt * increment, t + _C[i] * step_dt))
            y_new = y + step_dt * sum(b * k for b, k in zip(_B, stages) if b != 0.0)
            if cfg.fixed_dt is not None:
                break
            err = _error_norm(step_dt * sum(e * k for e, k in zip(_E, stages) if e != 0.0), y, y_new, cfg)
            if err <= 1.0:
                factor = _SAFETY * err ** -_PI_ALPHA * err_prev ** _PI_BETA if err > 0 else _FAC_MAX
                err_prev = max(err, 1e-4)
                if step_dt == dt:
                    dt = min(step_dt * min(_FAC_MAX, max(_FAC_MIN, factor)), cfg.max_dt)
                break
            rejected += 1
            dt = step_dt * max(_FAC_MIN, _SAFETY * err ** -0.2) if np.isfinite(err) else step_dt * _FAC_MIN
            logger.debug("step rejected at t={:.6g}, err={:.3g}, new dt={:.3g}".format(t, err, dt))
            if dt < cfg.dt_min:
                termination = Termination.DT_UNDERFLOW
                break
        if termination is Termination.DT_UNDERFLOW:
            break
        if not np.all(np.isfinite(y_new)):
            raise common.NumericalFailure("non-finite state", t=t, step=step)
        mean_removed = y_new[0] != 0
        y_new[0] = 0.0
        step += 1
        t = cfg.t_end if cfg.t_end - (t + step_dt) <= end_tol else t + step_dt
        y = y_new
        # FSAL: the last stage is the derivative at the new point unless the mean was removed
        slope = evaluate(y, t) if mean_removed else stages[6]
        sup_norm = recorder.record(t, y, step_dt, slope)
        if sup_norm > cfg.blowup_cap:
            termination = Termination.BLOWUP_CAP_HIT
            break

    logger.info("integration stopped at t={:.6g} after {} steps ({} rejected): {}".format(
        t, step, rejected, termination.value))
    return recorder.finish(y, termination, rejected)
