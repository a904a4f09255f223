import dataclasses
import logging

import numpy as np
import scipy.integrate

try:
    from . import common
    from . import field
    from .multipliers import ModelParams, lambda_weight
except ImportError:
    import common
    import field
    from multipliers import ModelParams, lambda_weight

logger = logging.getLogger(__name__)


def dispersion_lambda(n):
    """Growth rate of mode n in the linearised autonomous f-model, bounded by 11/4."""
    n = np.asarray(n, dtype=np.float64)
    ratio = n * n / (1.0 + n * n)
    value = 0.75 * ratio * ratio + 2.0 * ratio
    if value.ndim == 0:
        return float(value)
    return value


@dataclasses.dataclass(frozen=True)
class StabilityQuery:
    c: float
    wavenumber: float
    delta: float = 0.0
    t: float = 0.0
    p: ModelParams = ModelParams(K=1.0, R0=1.0)
    # e^{2t} on the delta^2 term, as in the final expression for beta
    growth_factor: bool = True
    # delta(t) = delta * e^{-delta_decay * t}
    delta_decay: float = 0.0

    def __post_init__(self):
        if not self.c > 0:
            raise common.ArgumentError("base state c must be positive, got {}".format(self.c))
        if not self.delta >= 0:
            raise common.ArgumentError("delta must be nonnegative, got {}".format(self.delta))


def planewave_beta(q: StabilityQuery) -> float:
    a2 = q.wavenumber * q.wavenumber
    elastic = q.c ** 3 * q.p.k_over_r0
    delta_t = q.delta * np.exp(-q.delta_decay * q.t)
    damping = delta_t * delta_t * q.c * q.c * a2
    if q.growth_factor:
        damping *= np.exp(2 * q.t)
    return float((0.5 * elastic * a2 - damping) / (1.0 + elastic * a2))


def continuation_integrand(f_linf: float, t: float, p: ModelParams) -> float:
    if f_linf < 0:
        raise common.ArgumentError("sup norm must be nonnegative, got {}".format(f_linf))
    return lambda_weight(t, p) * (1.0 + f_linf)


def continuation_integral(times, sup_norms, p: ModelParams) -> np.ndarray:
    """Cumulative trapezoid integral of the continuation integrand along accepted steps."""
    times = np.asarray(times, dtype=np.float64)
    integrand = np.array([continuation_integrand(linf, t, p) for t, linf in zip(times, sup_norms)])
    if len(times) == 0:
        return np.zeros(0)
    return scipy.integrate.cumulative_trapezoid(integrand, times, initial=0.0)


def _energy_terms(norms: field.Norms, t: float, p: ModelParams) -> tuple[float, float]:
    with np.errstate(over="ignore"):
        growth = np.exp((3.0 + p.alpha) * t)
    hdot2_sq = norms.hdot2 ** 2
    energy = norms.hdot1 ** 2 + p.k_over_r0 * growth * hdot2_sq
    return float(energy), float(growth * hdot2_sq)


def energy_E(f: field.SpectralField, t: float, p: ModelParams) -> float:
    return _energy_terms(field.norms(f), t, p)[0]


def dissipation_D(f: field.SpectralField, t: float, p: ModelParams) -> float:
    return _energy_terms(field.norms(f), t, p)[1]


def gamma(p: ModelParams) -> float:
    """Effective dissipation coefficient; positive exactly when alpha > -2."""
    return p.k_over_r0 * (1.0 + p.alpha / 2.0)


def energy_is_nonincreasing(energies, rel_tol: float = 1e-12) -> bool:
    energies = np.asarray(energies, dtype=np.float64)
    if len(energies) < 2:
        return True
    increase = np.diff(energies)
    return bool(np.all(increase <= rel_tol * np.abs(energies[:-1])))
