import dataclasses

import numpy as np

try:
    from . import common
    from . import field
except ImportError:
    import common
    import field


@dataclasses.dataclass(frozen=True)
class ModelParams:
    K: float = 1.0
    R0: float = 1.0
    alpha: float = -3.0
    delta: float = 0.0
    epsilon: float = 1.0
    h_inf: float = 1e-3

    def __post_init__(self):
        for name in ("K", "R0", "epsilon", "h_inf"):
            if not getattr(self, name) > 0:
                raise common.ArgumentError("{} must be positive, got {}".format(name, getattr(self, name)))
        if not self.delta >= 0:
            raise common.ArgumentError("delta must be nonnegative, got {}".format(self.delta))
        if not np.isfinite(self.alpha):
            raise common.ArgumentError("alpha must be finite, got {}".format(self.alpha))

    @property
    def k_over_r0(self) -> float:
        return self.K / self.R0

    @property
    def viscous_factor(self) -> float:
        """5/2 + alpha, the coefficient (5KR/2R0 + KR_t/R0)/(KR/R0) for R = e^{alpha t}."""
        return 2.5 + self.alpha

    @property
    def is_autonomous(self) -> bool:
        return self.alpha == -3.0 and self.k_over_r0 == 1.0


def log_weight(t: float, p: ModelParams) -> float:
    return (3.0 + p.alpha) * t + np.log(p.k_over_r0)


def lambda_weight(t: float, p: ModelParams) -> float:
    """(K/R0) e^{(3+alpha)t}; +inf once the exponent passes the overflow guard."""
    exponent = log_weight(t, p)
    if exponent > common.EXP_OVERFLOW:
        return np.inf
    return float(np.exp(exponent))


def _symbol_exponent(n, t: float, p: ModelParams):
    # (3+alpha)t + log(K n^2 / R0); -inf at n = 0
    n = np.asarray(n, dtype=np.float64)
    with np.errstate(divide="ignore"):
        return log_weight(t, p) + np.log(n * n)


def _as_output(value, n):
    if np.ndim(n) == 0:
        return float(value)
    return value


def q_symbol(n, t: float, p: ModelParams):
    exponent = _symbol_exponent(n, t, p)
    overflow = exponent > common.EXP_OVERFLOW
    value = np.where(overflow, 0.0, 1.0 / (1.0 + np.exp(np.minimum(exponent, common.EXP_OVERFLOW))))
    return _as_output(value, n)


def l_symbol(n, t: float, p: ModelParams):
    exponent = _symbol_exponent(n, t, p)
    overflow = exponent > common.EXP_OVERFLOW
    # kappa n^2 / (1 + kappa n^2) written as 1 / (1 + e^{-x})
    with np.errstate(over="ignore"):
        ratio = 1.0 / (1.0 + np.exp(-np.minimum(exponent, common.EXP_OVERFLOW)))
    value = -p.viscous_factor * np.where(overflow, 1.0, ratio)
    return _as_output(value, n)


def l_symbol_integral(n, t0: float, t1: float, p: ModelParams):
    """Closed form of the integral of l_symbol(n, t) over [t0, t1]."""
    if p.alpha == -3.0:
        return _as_output(np.asarray(l_symbol(n, 0.0, p)) * (t1 - t0), n)
    log_growth = np.logaddexp(0.0, _symbol_exponent(n, t1, p)) - np.logaddexp(0.0, _symbol_exponent(n, t0, p))
    return _as_output(-p.viscous_factor / (3.0 + p.alpha) * log_growth, n)


def apply_Q(f: field.SpectralField, t: float, p: ModelParams) -> field.SpectralField:
    return f.with_half(f.half * q_symbol(f.grid.wavenumbers, t, p))


def apply_L(f: field.SpectralField, t: float, p: ModelParams) -> field.SpectralField:
    return f.with_half(f.half * l_symbol(f.grid.wavenumbers, t, p))


def _greens_scale(t: float, p: ModelParams, grid: field.GridSpec) -> float:
    if not np.isclose(grid.period, 2 * np.pi, rtol=0.0, atol=1e-12):
        raise common.UnsupportedConfiguration(
            "Green's function is defined on the 2*pi torus, grid period is {}".format(grid.period)
        )
    return float(np.sqrt(lambda_weight(t, p)))


def greens_function(t: float, p: ModelParams, grid: field.GridSpec) -> np.ndarray:
    """
    Samples of G_t(x) = cosh((x mod 2pi - pi)/lam) / (2 lam sinh(pi/lam)),
    lam = sqrt((K/R0) e^{(3+alpha)t}), in a form that does not overflow for small lam.
    """
    lam = _greens_scale(t, p, grid)
    s = np.abs(np.mod(grid.nodes(), 2 * np.pi) - np.pi)
    numerator = np.exp((s - np.pi) / lam) + np.exp((-s - np.pi) / lam)
    return numerator / (2 * lam * -np.expm1(-2 * np.pi / lam))


def greens_mass(t: float, p: ModelParams, grid: field.GridSpec) -> float:
    """
    Trapezoid integral of G_t over one period with the endpoint correction
    for the jump of G_t' at x = 0 (G'(2pi-) - G'(0+) = 1/lam^2).
    """
    lam = _greens_scale(t, p, grid)
    h = grid.period / grid.n_nodes
    return float(h * np.sum(greens_function(t, p, grid)) - h * h / (12 * lam * lam))


def convolve_with_greens(f: field.SpectralField, t: float, p: ModelParams) -> np.ndarray:
    """
    Physical samples of (G_t * f)(x_j) computed by circular convolution,
    corrected for the kink of G_t the same way as greens_mass.
    """
    grid = f.grid
    lam = _greens_scale(t, p, grid)
    h = grid.period / grid.n_nodes
    samples = field.to_physical(f)
    kernel = greens_function(t, p, grid)
    convolution = h * np.fft.irfft(np.fft.rfft(kernel) * np.fft.rfft(samples), n=grid.n_nodes)
    return convolution - h * h / (12 * lam * lam) * samples
