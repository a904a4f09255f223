"""
Finite difference solvers for the biofilm height equations.

All four variants share one structure. With u = h_t,

    u - a D[h^3 u_r] - b D[h_r h^2 u] = g h + c D[h^3 h_r] + d D[h^2 h_r]

where D[F] = (1/r)(r F)_r on radial grids and F_x on slabs. The left side is a
tridiagonal system for u, solved every step; h is then advanced explicitly.

    variant   a              b                c                            d                g
    orig      K R            3/2 K R          K R_t                        delta^2          1
    scaled    K R e^{3t}     3/2 K R e^{3t}   (5/2 K R + K R_t) e^{3t}     delta^2 e^{2t}   0

(R and R_t are taken relative to R0.)
"""
import dataclasses
import enum
import logging
from typing import Callable

import numpy as np
import scipy.linalg

try:
    from . import common
    from . import config
    from .multipliers import ModelParams
except ImportError:
    import common
    import config
    from multipliers import ModelParams

logger = logging.getLogger(__name__)

MIN_CELLS = 8
FLOOR_TOL = 1e-12


class Geometry(enum.Enum):
    RADIAL = "radial"
    SLAB = "slab"


class HVariant(enum.Enum):
    ORIG_RADIAL = "orig_radial"
    ORIG_SLAB = "orig_slab"
    SCALED_RADIAL = "scaled_radial"
    SCALED_SLAB = "scaled_slab"

    @property
    def geometry(self) -> Geometry:
        return Geometry.RADIAL if self in (HVariant.ORIG_RADIAL, HVariant.SCALED_RADIAL) else Geometry.SLAB

    @property
    def scaled(self) -> bool:
        return self in (HVariant.SCALED_RADIAL, HVariant.SCALED_SLAB)


class TimeScheme(enum.Enum):
    EULER = "euler"
    HEUN = "heun"


class RadiusKind(enum.Enum):
    SELF_SIMILAR = "self_similar"
    EXP_ALPHA = "exp_alpha"


@dataclasses.dataclass(frozen=True)
class FdGrid:
    geometry: Geometry
    n_cells: int
    extent: float

    def __post_init__(self):
        if int(self.n_cells) != self.n_cells or self.n_cells < MIN_CELLS:
            raise common.ArgumentError("n_cells must be an integer >= {}, got {}".format(MIN_CELLS, self.n_cells))
        if not self.extent > 0:
            raise common.ArgumentError("extent must be positive, got {}".format(self.extent))

    @classmethod
    def from_spacing(cls, geometry: Geometry, dr: float, extent: float = config.fd_extent) -> "FdGrid":
        length = extent if geometry is Geometry.RADIAL else 2 * extent
        return cls(geometry, int(round(length / dr)) + 1, extent)

    @property
    def dr(self) -> float:
        if self.geometry is Geometry.RADIAL:
            return self.extent / (self.n_cells - 1)
        return 2 * self.extent / (self.n_cells - 1)

    def nodes(self) -> np.ndarray:
        if self.geometry is Geometry.RADIAL:
            return np.linspace(0.0, self.extent, self.n_cells)
        return np.linspace(-self.extent, self.extent, self.n_cells)


@dataclasses.dataclass(frozen=True, eq=False)
class HeightField:
    grid: FdGrid
    h: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        h = np.array(self.h, dtype=np.float64)
        if h.shape != (self.grid.n_cells,):
            raise common.ArgumentError("{} heights expected, got shape {}".format(self.grid.n_cells, h.shape))
        if not np.all(np.isfinite(h)):
            raise common.NumericalFailure("height field has non-finite values", t=self.t)
        h.flags.writeable = False
        object.__setattr__(self, "h", h)

    def respects_floor(self, h_inf: float) -> bool:
        return bool(np.min(self.h) >= h_inf - FLOOR_TOL)


@dataclasses.dataclass(frozen=True)
class RadiusLaw:
    """R(t)/R0 and its time derivative."""
    kind: RadiusKind
    alpha: float = 0.0
    K: float = 1.0
    factor: float = common.SELFSIMILAR_FACTOR

    def __call__(self, t: float) -> tuple[float, float]:
        if self.kind is RadiusKind.EXP_ALPHA:
            rho = float(np.exp(self.alpha * t))
            return rho, self.alpha * rho
        growth = 1.0 + self.factor * self.K * np.expm1(3 * t)
        rho = float(growth ** (1 / 7))
        return rho, float(3 * self.factor * self.K * np.exp(3 * t) * rho / (7 * growth))


def radius_law(kind: RadiusKind, alpha: float | None, p: ModelParams,
               factor: float = common.SELFSIMILAR_FACTOR) -> RadiusLaw:
    if kind is RadiusKind.EXP_ALPHA:
        if alpha is None:
            raise common.ArgumentError("exp_alpha radius law needs alpha")
        return RadiusLaw(kind, alpha=alpha)
    return RadiusLaw(kind, K=p.K, factor=factor)


@dataclasses.dataclass(frozen=True)
class TridiagonalSystem:
    """
    lower[i] u[i-1] + diag[i] u[i] + upper[i] u[i+1] = rhs[i], lower[0] = upper[-1] = 0.
    """
    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray
    rhs: np.ndarray

    def matvec(self, u: np.ndarray) -> np.ndarray:
        result = self.diag * u
        result[1:] += self.lower[1:] * u[:-1]
        result[:-1] += self.upper[:-1] * u[1:]
        return result

    def is_diagonally_dominant(self) -> bool:
        return bool(np.all(np.abs(self.diag) >= np.abs(self.lower) + np.abs(self.upper)))

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.lower[1:], -1) + np.diag(self.upper[:-1], 1)


def thomas_solve(lower, diag, upper, rhs) -> np.ndarray:
    """
    Thomas algorithm, no pivoting.
    :raises NumericalFailure: on a zero pivot
    """
    n = len(diag)
    c_prime = np.zeros(n)
    d_prime = np.zeros(n)
    if diag[0] == 0:
        raise common.NumericalFailure("zero pivot in row 0")
    c_prime[0] = upper[0] / diag[0]
    d_prime[0] = rhs[0] / diag[0]
    for i in range(1, n):
        pivot = diag[i] - lower[i] * c_prime[i - 1]
        if pivot == 0:
            raise common.NumericalFailure("zero pivot in row {}".format(i))
        c_prime[i] = upper[i] / pivot
        d_prime[i] = (rhs[i] - lower[i] * d_prime[i - 1]) / pivot
    u = np.zeros(n)
    u[-1] = d_prime[-1]
    for i in range(n - 2, -1, -1):
        u[i] = d_prime[i] - c_prime[i] * u[i + 1]
    return u


def solve_tridiagonal(system: TridiagonalSystem) -> np.ndarray:
    if system.is_diagonally_dominant():
        return thomas_solve(system.lower, system.diag, system.upper, system.rhs)
    logger.debug("matrix not diagonally dominant, using banded solve with pivoting")
    ab = np.array((np.roll(system.upper, 1), system.diag, np.roll(system.lower, -1)))
    try:
        return scipy.linalg.solve_banded((1, 1), ab, system.rhs)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise common.NumericalFailure("singular h_t system: {}".format(e))


@dataclasses.dataclass(frozen=True)
class _Coefficients:
    a: float
    b: float
    c: float
    d: float
    g: float


def _coefficients(t: float, p: ModelParams, variant: HVariant, radius: RadiusLaw) -> _Coefficients:
    rho, rho_t = radius(t)
    if not variant.scaled:
        return _Coefficients(a=p.K * rho, b=1.5 * p.K * rho, c=p.K * rho_t, d=p.delta ** 2, g=1.0)
    growth = np.exp(3 * t)
    return _Coefficients(
        a=p.K * rho * growth,
        b=1.5 * p.K * rho * growth,
        c=(2.5 * p.K * rho + p.K * rho_t) * growth,
        d=p.delta ** 2 * np.exp(2 * t),
        g=0.0,
    )


def _check_variant(grid: FdGrid, variant: HVariant):
    if grid.geometry is not variant.geometry:
        raise common.ArgumentError("variant {} needs a {} grid".format(variant.value, variant.geometry.value))


def assemble_ht_system(state: HeightField, t: float, p: ModelParams, variant: HVariant,
                       radius: RadiusLaw) -> TridiagonalSystem:
    grid = state.grid
    _check_variant(grid, variant)
    k = _coefficients(t, p, variant, radius)
    h = state.h
    n = grid.n_cells
    dr = grid.dr

    dh = np.diff(h)
    h3_half = 0.5 * (h[1:] ** 3 + h[:-1] ** 3)
    h2_half = 0.5 * (h[1:] ** 2 + h[:-1] ** 2)
    p_half = dh / dr * h2_half
    if grid.geometry is Geometry.RADIAL:
        r_half = (np.arange(n - 1) + 0.5) * dr
        inv_r = np.zeros(n)
        inv_r[1:] = 1.0 / (np.arange(1, n) * dr)
    else:
        r_half = np.ones(n - 1)
        inv_r = np.ones(n)

    lower = np.zeros(n)
    diag = np.ones(n)
    upper = np.zeros(n)
    rhs = k.g * h.copy()

    i = np.arange(1, n - 1)
    w_plus = r_half[i] * h3_half[i] * inv_r[i] / dr ** 2
    w_minus = r_half[i - 1] * h3_half[i - 1] * inv_r[i] / dr ** 2
    v_plus = r_half[i] * p_half[i] * inv_r[i] / dr
    v_minus = r_half[i - 1] * p_half[i - 1] * inv_r[i] / dr
    lower[i] = -k.a * w_minus + 0.5 * k.b * v_minus
    diag[i] = 1.0 + k.a * (w_plus + w_minus) - 0.5 * k.b * (v_plus - v_minus)
    upper[i] = -k.a * w_plus - 0.5 * k.b * v_plus

    # (r h^3 h_r) and (r h^2 h_r) at half nodes
    flux3 = r_half * h3_half * dh / dr
    flux2 = r_half * h2_half * dh / dr
    rhs[i] += (k.c * (flux3[i] - flux3[i - 1]) + k.d * (flux2[i] - flux2[i - 1])) * inv_r[i] / dr

    if grid.geometry is Geometry.RADIAL:
        # symmetry at r = 0: (1/r)(r F)_r -> 4 F_{1/2} / dr
        diag[0] = 1.0 + 4 * k.a * h3_half[0] / dr ** 2 - 2 * k.b * p_half[0] / dr
        upper[0] = -4 * k.a * h3_half[0] / dr ** 2 - 2 * k.b * p_half[0] / dr
        rhs[0] += 4 * (k.c * h3_half[0] + k.d * h2_half[0]) * dh[0] / dr ** 2
    # outer rows (r = extent, x = -extent, x = extent) impose u = g h, not Dirichlet h = h_inf:
    # the edge node follows a flat precursor film, h_inf e^t for orig and fixed for scaled
    return TridiagonalSystem(lower=lower, diag=diag, upper=upper, rhs=rhs)


def time_derivative(state: HeightField, t: float, p: ModelParams, variant: HVariant, radius: RadiusLaw) -> np.ndarray:
    return solve_tridiagonal(assemble_ht_system(state, t, p, variant, radius))


def _advance(state: HeightField, h: np.ndarray, t: float, p: ModelParams, step: int | None = None) -> HeightField:
    if not np.all(np.isfinite(h)):
        raise common.NumericalFailure("non-finite height", t=t, step=step)
    return HeightField(state.grid, np.maximum(h, p.h_inf), t)


def step_euler(state: HeightField, dt: float, t: float, p: ModelParams, variant: HVariant,
               radius: RadiusLaw, step: int | None = None) -> HeightField:
    if not dt > 0:
        raise common.ArgumentError("dt must be positive, got {}".format(dt))
    u = time_derivative(state, t, p, variant, radius)
    return _advance(state, state.h + dt * u, t + dt, p, step)


def step_heun(state: HeightField, dt: float, t: float, p: ModelParams, variant: HVariant,
              radius: RadiusLaw, step: int | None = None) -> HeightField:
    if not dt > 0:
        raise common.ArgumentError("dt must be positive, got {}".format(dt))
    u_start = time_derivative(state, t, p, variant, radius)
    predicted = _advance(state, state.h + dt * u_start, t + dt, p, step)
    u_end = time_derivative(predicted, t + dt, p, variant, radius)
    return _advance(state, state.h + 0.5 * dt * (u_start + u_end), t + dt, p, step)


STEPPERS = {
    TimeScheme.EULER: step_euler,
    TimeScheme.HEUN: step_heun,
}


def scaled_profile(state: HeightField, variant: HVariant) -> np.ndarray:
    """h e^{-t} for the orig variants, h itself for the scaled ones."""
    if variant.scaled:
        return np.array(state.h)
    return state.h * np.exp(-state.t)


def front_position(grid: FdGrid, profile: np.ndarray, threshold: float) -> float:
    """Largest |x| (or r) where profile exceeds threshold, 0 if nowhere."""
    above = np.nonzero(profile > threshold)[0]
    if len(above) == 0:
        return 0.0
    return float(np.max(np.abs(grid.nodes()[above])))


def support_width(grid: FdGrid, profile: np.ndarray, threshold: float) -> float:
    above = np.nonzero(profile > threshold)[0]
    if len(above) == 0:
        return 0.0
    nodes = grid.nodes()
    if grid.geometry is Geometry.RADIAL:
        return 2.0 * float(nodes[above[-1]])
    return float(nodes[above[-1]] - nodes[above[0]])


@dataclasses.dataclass
class HeightTrajectory:
    variant: HVariant
    grid: FdGrid
    times: np.ndarray
    heights: list[np.ndarray]
    scaled_heights: list[np.ndarray]
    max_heights: np.ndarray
    support_widths: np.ndarray
    front_positions: np.ndarray
    steps: int

    @property
    def final_height(self) -> np.ndarray:
        return self.heights[-1]


def evolve(initial: HeightField, t_end: float, dt: float, p: ModelParams, variant: HVariant,
           radius: RadiusLaw, snapshot_times=None, scheme: TimeScheme = TimeScheme.EULER,
           threshold: float | None = None) -> HeightTrajectory:
    """
    Fixed step integration from initial.t to t_end. Snapshots are taken at the
    step nearest to each requested time (default: start and end).

    :param threshold: support threshold on the scaled profile, default 2 h_inf
    """
    _check_variant(initial.grid, variant)
    if not dt > 0:
        raise common.ArgumentError("dt must be positive, got {}".format(dt))
    if not t_end > initial.t:
        raise common.ArgumentError("t_end must exceed the initial time {}".format(initial.t))
    threshold = 2 * p.h_inf if threshold is None else threshold
    n_steps = int(round((t_end - initial.t) / dt))
    if snapshot_times is None:
        snapshot_times = [initial.t, t_end]
    snapshot_steps = {}
    for ts in snapshot_times:
        if not initial.t - dt / 2 <= ts <= t_end + dt / 2:
            raise common.ArgumentError("snapshot time {} outside [{}, {}]".format(ts, initial.t, t_end))
        snapshot_steps.setdefault(int(round((ts - initial.t) / dt)), ts)
    stepper = STEPPERS[scheme]

    times, heights, scaled = [], [], []

    def take_snapshot(state: HeightField):
        profile = scaled_profile(state, variant)
        times.append(state.t)
        heights.append(np.array(state.h))
        scaled.append(profile)

    state = HeightField(initial.grid, np.maximum(initial.h, p.h_inf), initial.t)
    if 0 in snapshot_steps:
        take_snapshot(state)
    for step in range(1, n_steps + 1):
        t = initial.t + (step - 1) * dt
        state = stepper(state, dt, t, p, variant, radius, step=step)
        state = HeightField(state.grid, state.h, initial.t + step * dt)
        if step in snapshot_steps:
            take_snapshot(state)
            logger.debug("snapshot at t={:.4g}, max h={:.4g}".format(state.t, float(np.max(state.h))))

    logger.info("{} run finished at t={:.4g} after {} steps".format(variant.value, state.t, n_steps))
    return HeightTrajectory(
        variant=variant,
        grid=initial.grid,
        times=np.array(times),
        heights=heights,
        scaled_heights=scaled,
        max_heights=np.array([np.max(h) for h in heights]),
        support_widths=np.array([support_width(initial.grid, s, threshold) for s in scaled]),
        front_positions=np.array([front_position(initial.grid, s, threshold) for s in scaled]),
        steps=n_steps,
    )


def selfsimilar_profile(r, t: float, radius: RadiusLaw, p: ModelParams) -> np.ndarray:
    rho, _ = radius(t)
    big_r = p.R0 * rho
    bracket = np.maximum(1.0 - 1.5 * np.asarray(r, dtype=np.float64) ** 2 / big_r ** 2, 0.0)
    return np.maximum(np.exp(t) / rho ** 2 * np.cbrt(bracket), p.h_inf)


ProfileSource = Callable[[np.ndarray, float], tuple[np.ndarray, np.ndarray]]


def selfsimilar_source(radius: RadiusLaw, p: ModelParams) -> ProfileSource:
    """Self-similar profile and its exact time derivative (zero on the tails)."""

    def source(r, t):
        r = np.asarray(r, dtype=np.float64)
        rho, rho_t = radius(t)
        big_r = p.R0 * rho
        bracket = 1.0 - 1.5 * r ** 2 / big_r ** 2
        h = selfsimilar_profile(r, t, radius, p)
        inside = bracket > 0
        with np.errstate(divide="ignore", invalid="ignore"):
            log_rate = 1.0 - 2.0 * rho_t / rho + (r ** 2 * rho_t / (p.R0 ** 2 * rho ** 3)) / bracket
        core = np.exp(t) / rho ** 2 * np.cbrt(np.where(inside, bracket, 0.0))
        h_t = np.where(inside & (core > p.h_inf), h * log_rate, 0.0)
        return h, h_t

    return source


def constant_source(c: float, variant: HVariant) -> ProfileSource:
    """Exact solution of a spatially constant state: c e^t (orig) or c (scaled)."""

    def source(r, t):
        r = np.asarray(r, dtype=np.float64)
        if variant.scaled:
            return np.full(r.shape, c), np.zeros(r.shape)
        value = c * np.exp(t)
        return np.full(r.shape, value), np.full(r.shape, value)

    return source


NodeMask = Callable[[np.ndarray, float], np.ndarray]


def selfsimilar_interior(radius: RadiusLaw, p: ModelParams, margin: float) -> NodeMask:
    """
    Nodes inside the self-similar support, at least margin away from the front.
    h ~ (front - r)^{1/3} there, so rows near the front carry an O(1) truncation error.
    """
    if not margin >= 0:
        raise common.ArgumentError("margin must be nonnegative, got {}".format(margin))

    def mask(r, t):
        r = np.abs(np.asarray(r, dtype=np.float64))
        rho, _ = radius(t)
        front = p.R0 * rho * np.sqrt(2.0 / 3.0)
        core = np.exp(t) / rho ** 2 * np.cbrt(np.maximum(1.0 - 1.5 * r ** 2 / (p.R0 * rho) ** 2, 0.0))
        return (r <= front - margin) & (core > p.h_inf)

    return mask


def residual_profile(source: ProfileSource, t: float, p: ModelParams, grid: FdGrid, radius: RadiusLaw,
                     variant: HVariant = HVariant.ORIG_RADIAL) -> np.ndarray:
    """Row-wise M(h) h_t - b(h) on the profile produced by source at time t."""
    if p.delta != 0:
        raise common.ArgumentError("residual check needs delta = 0, got {}".format(p.delta))
    h, h_t = source(grid.nodes(), t)
    system = assemble_ht_system(HeightField(grid, h, t), t, p, variant, radius)
    return system.matvec(np.asarray(h_t, dtype=np.float64)) - system.rhs


def residual_check(source: ProfileSource, t_list, p: ModelParams, grid: FdGrid, radius: RadiusLaw,
                   variant: HVariant = HVariant.ORIG_RADIAL, interior: NodeMask | None = None) -> np.ndarray:
    """
    Discrete L2 norm of M(h) h_t - b(h) along the profiles produced by source.

    :param interior: restricts the norm to the nodes it selects at each time
    """
    r = grid.nodes()
    residuals = []
    for t in t_list:
        residual = residual_profile(source, t, p, grid, radius, variant)
        if interior is not None:
            residual = residual[interior(r, t)]
        residuals.append(float(np.sqrt(grid.dr * np.sum(residual ** 2))))
    return np.array(residuals)


def gaussian_bump(grid: FdGrid, p: ModelParams, amplitude: float = 1.0, width: float = 1.0, t: float = 0.0) -> HeightField:
    r = grid.nodes()
    return HeightField(grid, np.maximum(amplitude * np.exp(-r ** 2 / width ** 2), p.h_inf), t)


def constant(grid: FdGrid, c: float, t: float = 0.0) -> HeightField:
    if not c > 0:
        raise common.ArgumentError("constant height must be positive, got {}".format(c))
    return HeightField(grid, np.full(grid.n_cells, float(c)), t)


def selfsimilar_matched(grid: FdGrid, t0: float, radius: RadiusLaw, p: ModelParams, variant: HVariant) -> HeightField:
    """Self-similar core at t0 matched to h_inf tails, divided by e^{t0} for the scaled variants."""
    h = selfsimilar_profile(np.abs(grid.nodes()), t0, radius, p)
    if variant.scaled:
        h = np.maximum(h * np.exp(-t0), p.h_inf)
    return HeightField(grid, h, t0)


def perturbed_constant(grid: FdGrid, p: ModelParams, c: float, amplitude: float, k: float, t: float = 0.0) -> HeightField:
    """c + amplitude cos(k r), floored at h_inf."""
    if not c > 0:
        raise common.ArgumentError("constant height must be positive, got {}".format(c))
    if not k > 0:
        raise common.ArgumentError("wavenumber must be positive, got {}".format(k))
    return HeightField(grid, np.maximum(c + amplitude * np.cos(k * grid.nodes()), p.h_inf), t)
